#include "openloop/bridge.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "openloop/oscillator.hpp"

namespace openloop {
namespace {

using Clock = std::chrono::steady_clock;

void ignore_sigpipe() {
  static const bool once = [] {
    std::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)once;
}

void write_all(int fd, const std::string& data) {
  std::size_t written = 0;
  while (written < data.size()) {
    const ssize_t n = ::write(fd, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw EnvironmentError(std::string("bridge: write failed: ") + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
}

// Reads from fd into buffer until a full line is available.
std::string read_line(int fd, std::string& buffer, std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  for (;;) {
    if (const auto pos = buffer.find('\n'); pos != std::string::npos) {
      std::string line = buffer.substr(0, pos);
      buffer.erase(0, pos + 1);
      return line;
    }
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (remaining.count() <= 0) throw EnvironmentError("bridge: timed out waiting for a response");
    pollfd pfd{fd, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw EnvironmentError(std::string("bridge: poll failed: ") + std::strerror(errno));
    }
    if (ready == 0) throw EnvironmentError("bridge: timed out waiting for a response");
    char chunk[4096];
    const ssize_t n = ::read(fd, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw EnvironmentError(std::string("bridge: read failed: ") + std::strerror(errno));
    }
    if (n == 0) throw EnvironmentError("bridge: server closed the connection");
    buffer.append(chunk, static_cast<std::size_t>(n));
  }
}

std::vector<double> number_list(const nlohmann::json& value, const char* field) {
  if (!value.is_array()) throw EnvironmentError(std::string("bridge: '") + field + "' is not a list");
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& v : value) {
    if (!v.is_number()) throw EnvironmentError(std::string("bridge: '") + field + "' has a non-number");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

SubprocessChannel::SubprocessChannel(const std::string& command) {
  ignore_sigpipe();
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe(in_pipe) != 0) throw EnvironmentError("bridge: pipe() failed");
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw EnvironmentError("bridge: pipe() failed");
  }
  pid_ = ::fork();
  if (pid_ < 0) throw EnvironmentError("bridge: fork() failed");
  if (pid_ == 0) {
    ::setpgid(0, 0);
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  ::fcntl(to_child_, F_SETFD, FD_CLOEXEC);
  ::fcntl(from_child_, F_SETFD, FD_CLOEXEC);
}

SubprocessChannel::~SubprocessChannel() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    // Give the server a moment to exit on EOF before forcing it.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) != 0) return;
      ::usleep(2000);
    }
    // The shell may have forked the server; kill the whole process group.
    ::kill(-pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
  }
}

void SubprocessChannel::send_line(const std::string& line) { write_all(to_child_, line + "\n"); }

std::string SubprocessChannel::receive_line(std::chrono::milliseconds timeout) {
  return read_line(from_child_, buffer_, timeout);
}

TcpChannel::TcpChannel(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout) {
  ignore_sigpipe();
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  const std::string service = std::to_string(port);
  if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &result) != 0 || result == nullptr) {
    throw EnvironmentError("bridge: cannot resolve " + host);
  }
  for (addrinfo* ai = result; ai != nullptr && fd_ < 0; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    timeval tv{};
    tv.tv_sec = static_cast<long>(timeout.count() / 1000);
    tv.tv_usec = static_cast<long>((timeout.count() % 1000) * 1000);
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      fd_ = fd;
    } else {
      ::close(fd);
    }
  }
  ::freeaddrinfo(result);
  if (fd_ < 0) throw EnvironmentError("bridge: cannot connect to " + host + ":" + service);
}

TcpChannel::~TcpChannel() {
  if (fd_ >= 0) ::close(fd_);
}

void TcpChannel::send_line(const std::string& line) { write_all(fd_, line + "\n"); }

std::string TcpChannel::receive_line(std::chrono::milliseconds timeout) {
  return read_line(fd_, buffer_, timeout);
}

std::unique_ptr<LineChannel> open_channel(const std::string& endpoint, const std::string& env_id,
                                          std::chrono::milliseconds timeout) {
  if (endpoint.empty()) throw std::invalid_argument("bridge: empty endpoint");
  if (endpoint.rfind("tcp:", 0) == 0) {
    const std::string rest = endpoint.substr(4);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos || colon == 0) {
      throw std::invalid_argument("bridge: tcp endpoint must be tcp:<host>:<port>");
    }
    int port = 0;
    try {
      port = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("bridge: bad port in " + endpoint);
    }
    if (port <= 0 || port > 65535) throw std::invalid_argument("bridge: bad port in " + endpoint);
    return std::make_unique<TcpChannel>(rest.substr(0, colon), static_cast<std::uint16_t>(port), timeout);
  }
  std::string command = endpoint;
  for (auto pos = command.find("{env}"); pos != std::string::npos; pos = command.find("{env}", pos)) {
    command.replace(pos, 5, env_id);
    pos += env_id.size();
  }
  return std::make_unique<SubprocessChannel>(command);
}

BridgeClient::BridgeClient(std::unique_ptr<LineChannel> channel, std::chrono::milliseconds timeout)
    : channel_(std::move(channel)), timeout_(timeout) {}

nlohmann::json BridgeClient::request(const nlohmann::json& message) {
  channel_->send_line(message.dump());
  const std::string line = channel_->receive_line(timeout_);
  nlohmann::json response;
  try {
    response = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw EnvironmentError(std::string("bridge: malformed response: ") + e.what());
  }
  if (!response.is_object() || !response.contains("ok") || !response["ok"].is_boolean()) {
    throw EnvironmentError("bridge: response without an 'ok' flag");
  }
  if (!response["ok"].get<bool>()) {
    const std::string error =
        response.contains("error") && response["error"].is_string() ? response["error"].get<std::string>() : "unknown error";
    throw EnvironmentError("bridge: server error: " + error);
  }
  return response;
}

BridgeSpec BridgeClient::spec() {
  const nlohmann::json response = request({{"op", "spec"}});
  if (!response.contains("spec") || !response["spec"].is_object()) {
    throw EnvironmentError("bridge: spec response without 'spec'");
  }
  const auto& s = response["spec"];
  BridgeSpec out;
  try {
    out.obs_dim = s.at("obs_dim").get<std::size_t>();
    out.act_dim = s.at("act_dim").get<std::size_t>();
    out.control_period = s.at("control_period").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw EnvironmentError(std::string("bridge: bad spec: ") + e.what());
  }
  return out;
}

std::vector<double> BridgeClient::reset(std::uint64_t seed) {
  const nlohmann::json response = request({{"op", "reset"}, {"seed", seed}});
  if (!response.contains("obs")) throw EnvironmentError("bridge: reset response without 'obs'");
  return number_list(response["obs"], "obs");
}

BridgeStep BridgeClient::step(const std::vector<double>& action) {
  const nlohmann::json response = request({{"op", "step"}, {"action", action}});
  BridgeStep out;
  if (!response.contains("obs")) throw EnvironmentError("bridge: step response without 'obs'");
  out.observation = number_list(response["obs"], "obs");
  if (response.contains("reward")) {
    if (!response["reward"].is_number()) throw EnvironmentError("bridge: non-numeric reward");
    out.reward = response["reward"].get<double>();
  }
  out.terminated = response.value("terminated", false);
  out.truncated = response.value("truncated", false);
  return out;
}

void BridgeClient::close() {
  try {
    (void)request({{"op", "close"}});
  } catch (const EnvironmentError&) {
    // The server may exit before answering; nothing left to clean up.
  }
}

ExternalEnvironment::ExternalEnvironment(const BridgeOptions& options, std::optional<double> horizon)
    : client_(open_channel(options.endpoint, options.env_id,
                           std::chrono::milliseconds(static_cast<long>(options.timeout_seconds * 1000))),
              std::chrono::milliseconds(static_cast<long>(options.timeout_seconds * 1000))) {
  const BridgeSpec remote = client_.spec();
  spec_.name = "external:" + options.env_id;
  spec_.joint_count = remote.act_dim;
  spec_.obs_dim = remote.obs_dim;
  spec_.control_period = remote.control_period;
  spec_.episode_horizon =
      horizon.value_or(static_cast<double>(options.max_episode_steps) * remote.control_period);
  spec_.actuation = options.actuation;
  spec_.joint_position_index = options.joint_position_index;
  spec_.joint_velocity_index = options.joint_velocity_index;
  spec_.validate();
  if (spec_.actuation == ActuationMode::kTorque &&
      (spec_.joint_position_index + spec_.joint_count > spec_.obs_dim ||
       spec_.joint_velocity_index + spec_.joint_count > spec_.obs_dim)) {
    throw std::invalid_argument("bridge: joint observation indices exceed obs_dim");
  }
}

ExternalEnvironment::~ExternalEnvironment() { client_.close(); }

std::vector<double> ExternalEnvironment::reset(std::uint64_t seed) {
  steps_taken_ = 0;
  last_observation_ = client_.reset(seed);
  if (last_observation_.size() != spec_.obs_dim) throw EnvironmentError("bridge: observation size mismatch");
  return last_observation_;
}

StepResult ExternalEnvironment::step(std::span<const double> action) {
  check_action(spec_, action);
  BridgeStep remote = client_.step(std::vector<double>(action.begin(), action.end()));
  if (remote.observation.size() != spec_.obs_dim) throw EnvironmentError("bridge: observation size mismatch");
  ++steps_taken_;
  StepResult result;
  result.observation = std::move(remote.observation);
  result.reward = remote.reward;
  result.terminated = remote.terminated;
  result.truncated = remote.truncated || steps_taken_ >= spec_.episode_steps();
  last_observation_ = result.observation;
  return result;
}

}  // namespace openloop
