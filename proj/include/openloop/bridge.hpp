#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "openloop/envlab.hpp"

namespace openloop {

/// Bidirectional line-oriented byte stream (one message per '\n'-terminated
/// line). Throws EnvironmentError on EOF, I/O failure or timeout.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void send_line(const std::string& line) = 0;
  [[nodiscard]] virtual std::string receive_line(std::chrono::milliseconds timeout) = 0;
};

/// Spawns `/bin/sh -c command` and talks to it over its stdin/stdout.
class SubprocessChannel final : public LineChannel {
 public:
  explicit SubprocessChannel(const std::string& command);
  ~SubprocessChannel() override;
  SubprocessChannel(const SubprocessChannel&) = delete;
  SubprocessChannel& operator=(const SubprocessChannel&) = delete;

  void send_line(const std::string& line) override;
  [[nodiscard]] std::string receive_line(std::chrono::milliseconds timeout) override;
  [[nodiscard]] int pid() const { return pid_; }

 private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

/// Connects to host:port over TCP.
class TcpChannel final : public LineChannel {
 public:
  TcpChannel(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout);
  ~TcpChannel() override;
  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;

  void send_line(const std::string& line) override;
  [[nodiscard]] std::string receive_line(std::chrono::milliseconds timeout) override;

 private:
  int fd_ = -1;
  std::string buffer_;
};

/// "tcp:<host>:<port>" opens a TcpChannel; anything else is run as a shell
/// command with every "{env}" replaced by env_id.
[[nodiscard]] std::unique_ptr<LineChannel> open_channel(const std::string& endpoint,
                                                        const std::string& env_id,
                                                        std::chrono::milliseconds timeout);

struct BridgeSpec {
  std::size_t obs_dim = 0;
  std::size_t act_dim = 0;
  double control_period = 0.0;
};

struct BridgeStep {
  std::vector<double> observation;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
};

/// Client side of the line-delimited JSON protocol:
///   request  {"op": "spec"|"reset"|"step"|"close", "seed"?: int, "action"?: [..]}
///   response {"ok": true, "obs"?, "reward"?, "terminated"?, "truncated"?, "spec"?}
///            or {"ok": false, "error": "..."}
/// Exactly one response line per request line, in order.
class BridgeClient {
 public:
  BridgeClient(std::unique_ptr<LineChannel> channel, std::chrono::milliseconds timeout);

  [[nodiscard]] BridgeSpec spec();
  [[nodiscard]] std::vector<double> reset(std::uint64_t seed);
  [[nodiscard]] BridgeStep step(const std::vector<double>& action);
  void close();

  /// Sends one request object and returns the decoded response. Throws
  /// EnvironmentError when the server reports ok == false.
  nlohmann::json request(const nlohmann::json& message);

 private:
  std::unique_ptr<LineChannel> channel_;
  std::chrono::milliseconds timeout_;
};

/// Environment contract over the bridge. One server per instance.
class ExternalEnvironment final : public Environment {
 public:
  ExternalEnvironment(const BridgeOptions& options, std::optional<double> horizon);
  ~ExternalEnvironment() override;

  [[nodiscard]] const EnvSpec& spec() const override { return spec_; }
  std::vector<double> reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;
  [[nodiscard]] std::vector<double> state_vector() const override { return last_observation_; }

 private:
  BridgeClient client_;
  EnvSpec spec_;
  std::vector<double> last_observation_;
  std::size_t steps_taken_ = 0;
};

}  // namespace openloop
