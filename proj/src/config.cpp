#include "openloop/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "openloop/csv.hpp"

namespace openloop {
namespace {

std::string trim(std::string_view text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = text.find_last_not_of(" \t\r");
  return std::string(text.substr(begin, end - begin + 1));
}

// Drops a trailing comment that is not inside a string literal.
std::string strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

std::vector<std::string> split_list(const std::string& raw, const std::string& where) {
  if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']') {
    throw ConfigError(where + ": expected a [list]");
  }
  const std::string inner = trim(std::string_view(raw).substr(1, raw.size() - 2));
  std::vector<std::string> items;
  if (inner.empty()) return items;
  std::string current;
  bool quoted = false;
  for (const char c : inner) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) {
      items.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  items.push_back(trim(current));
  return items;
}

double to_number(const std::string& text, const std::string& where) {
  double value = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw ConfigError(where + ": expected a number, got '" + text + "'");
  }
  return value;
}

std::string unquote(const std::string& text, const std::string& where) {
  if (text.size() < 2 || text.front() != '"' || text.back() != '"') {
    throw ConfigError(where + ": expected a \"string\", got '" + text + "'");
  }
  return text.substr(1, text.size() - 2);
}

std::string quote(const std::string& text) { return "\"" + text + "\""; }

std::string range_text(const ParamRange& r) {
  if (r.fixed) return format_double(r.lo);
  return "[" + format_double(r.lo) + ", " + format_double(r.hi) + "]";
}

ParamRange read_range(const KeyValueFile& file, const std::string& key) {
  if (file.is_list(key)) {
    const auto values = file.get_number_list(key);
    if (values.size() != 2) throw ConfigError(key + ": a range needs exactly [lo, hi]");
    if (!(values[0] < values[1])) throw ConfigError(key + ": range needs lo < hi");
    return ParamRange::uniform(values[0], values[1]);
  }
  return ParamRange::constant(file.get_number(key));
}

std::size_t read_count(const KeyValueFile& file, const std::string& key) {
  const std::int64_t v = file.get_integer(key);
  if (v < 0) throw ConfigError(key + ": must be non-negative");
  return static_cast<std::size_t>(v);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "schema_version", "env", "variant", "task_row", "joint_count", "amplitude", "offset", "phase",
      "frequency", "population", "budget", "budget_multiplier", "dt_phase", "restarts", "kp", "kd",
      "torque_limit", "seeds", "output_dir", "horizon", "bridge_endpoint", "bridge_actuation",
      "joint_position_index", "joint_velocity_index", "max_episode_steps", "bridge_timeout"};
  return keys;
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::string_view text, const std::string& origin) {
  KeyValueFile file;
  file.origin_ = origin;
  std::istringstream stream{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(stream, line)) {
    ++number;
    const std::string content = trim(strip_comment(line));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    const std::string where = origin + ":" + std::to_string(number);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError(where + ": empty key or value");
    if (!file.values_.emplace(key, value).second) throw ConfigError(where + ": duplicate key '" + key + "'");
  }
  return file;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path);
}

std::vector<std::string> KeyValueFile::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

const std::string& KeyValueFile::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(origin_ + ": missing key '" + key + "'");
  return it->second;
}

std::string KeyValueFile::get_string(const std::string& key) const {
  return unquote(raw(key), origin_ + ": " + key);
}

double KeyValueFile::get_number(const std::string& key) const {
  return to_number(raw(key), origin_ + ": " + key);
}

std::int64_t KeyValueFile::get_integer(const std::string& key) const {
  const double v = get_number(key);
  if (v != std::floor(v) || std::abs(v) > 9.0e15) {
    throw ConfigError(origin_ + ": " + key + " must be an integer");
  }
  return static_cast<std::int64_t>(v);
}

bool KeyValueFile::get_bool(const std::string& key) const {
  const std::string& v = raw(key);
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(origin_ + ": " + key + " must be true or false");
}

bool KeyValueFile::is_list(const std::string& key) const {
  const std::string& v = raw(key);
  return !v.empty() && v.front() == '[';
}

std::vector<double> KeyValueFile::get_number_list(const std::string& key) const {
  const std::string where = origin_ + ": " + key;
  std::vector<double> out;
  for (const std::string& item : split_list(raw(key), where)) out.push_back(to_number(item, where));
  return out;
}

std::vector<std::string> KeyValueFile::get_string_list(const std::string& key) const {
  const std::string where = origin_ + ": " + key;
  std::vector<std::string> out;
  for (const std::string& item : split_list(raw(key), where)) out.push_back(unquote(item, where));
  return out;
}

std::optional<PDGains> default_gains_for_task(std::string_view task) {
  if (task == "Ant-v4" || task == "HalfCheetah-v4") return PDGains{1.0, 0.05, std::nullopt};
  if (task == "Hopper-v4" || task == "Walker2d-v4") return PDGains{10.0, 0.5, std::nullopt};
  if (task == "Swimmer-v4") return PDGains{7.0, 0.7, std::nullopt};
  if (task == "crawler") return PDGains{50.0, 2.0, std::nullopt};
  return std::nullopt;
}

ExperimentConfig ExperimentConfig::from_file(const KeyValueFile& file) {
  for (const std::string& key : file.keys()) {
    if (known_keys().count(key) == 0) throw ConfigError("unknown config key '" + key + "'");
  }
  ExperimentConfig c;
  try {
    if (file.has("schema_version")) c.schema_version = static_cast<int>(file.get_integer("schema_version"));
    if (file.has("env")) c.env = file.get_string("env");
    if (file.has("variant")) c.variant = parse_variant(file.get_string("variant"));
    if (file.has("task_row")) c.task_row = file.get_string("task_row");
    if (file.has("joint_count")) c.joint_count = read_count(file, "joint_count");
    if (file.has("amplitude")) c.amplitude = read_range(file, "amplitude");
    if (file.has("offset")) c.offset = read_range(file, "offset");
    if (file.has("phase")) c.phase = read_range(file, "phase");
    if (file.has("frequency")) c.frequency = read_range(file, "frequency");
    if (file.has("population")) c.population = read_count(file, "population");
    if (file.has("budget")) c.budget = read_count(file, "budget");
    if (file.has("budget_multiplier")) c.budget_multiplier = file.get_number("budget_multiplier");
    if (file.has("dt_phase")) c.dt_phase = file.get_number("dt_phase");
    if (file.has("restarts")) c.restarts = file.get_bool("restarts");
    if (file.has("kp")) c.kp = file.get_number("kp");
    if (file.has("kd")) c.kd = file.get_number("kd");
    if (file.has("torque_limit")) c.torque_limit = file.get_number("torque_limit");
    if (file.has("seeds")) {
      c.seeds.clear();
      for (const double s : file.get_number_list("seeds")) {
        if (s < 0 || s != std::floor(s)) throw ConfigError("seeds must be non-negative integers");
        c.seeds.push_back(static_cast<std::uint64_t>(s));
      }
    }
    if (file.has("output_dir")) c.output_dir = file.get_string("output_dir");
    if (file.has("horizon")) c.horizon = file.get_number("horizon");
    if (file.has("bridge_endpoint")) c.bridge_endpoint = file.get_string("bridge_endpoint");
    if (file.has("bridge_actuation")) {
      const std::string mode = file.get_string("bridge_actuation");
      if (mode == "torque") {
        c.bridge_actuation = ActuationMode::kTorque;
      } else if (mode == "position") {
        c.bridge_actuation = ActuationMode::kPosition;
      } else {
        throw ConfigError("bridge_actuation must be \"torque\" or \"position\"");
      }
    }
    if (file.has("joint_position_index")) c.joint_position_index = read_count(file, "joint_position_index");
    if (file.has("joint_velocity_index")) c.joint_velocity_index = read_count(file, "joint_velocity_index");
    if (file.has("max_episode_steps")) c.max_episode_steps = read_count(file, "max_episode_steps");
    if (file.has("bridge_timeout")) c.bridge_timeout = file.get_number("bridge_timeout");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  return from_file(KeyValueFile::load(path));
}

void ExperimentConfig::validate() const {
  if (schema_version != kConfigSchemaVersion) {
    throw ConfigError("unsupported schema_version " + std::to_string(schema_version));
  }
  if (!is_known_environment(env)) throw ConfigError("unknown environment '" + env + "'");
  if (env.rfind("external:", 0) == 0 && bridge_endpoint.empty()) {
    throw ConfigError("external environments need bridge_endpoint");
  }
  if (!search_row_for_task(resolved_task_row()) &&
      !(amplitude && offset && phase && frequency)) {
    throw ConfigError("no search-space defaults for task '" + resolved_task_row() +
                      "'; set amplitude, offset, phase and frequency");
  }
  if (population < 2) throw ConfigError("population must be >= 2");
  if (budget == 0) throw ConfigError("budget must be > 0");
  if (!(budget_multiplier > 0.0)) throw ConfigError("budget_multiplier must be > 0");
  if (!(dt_phase > 0.0)) throw ConfigError("dt_phase must be > 0");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (horizon && !(*horizon > 0.0)) throw ConfigError("horizon must be > 0");
  if (!(bridge_timeout > 0.0)) throw ConfigError("bridge_timeout must be > 0");
  if (frequency && !(frequency->lo > 0.0)) throw ConfigError("frequency must be > 0");
  try {
    gains().validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::string ExperimentConfig::resolved_task_row() const {
  if (!task_row.empty()) return task_row;
  if (env == "purcell_swimmer") return "Swimmer-v4";
  if (env == "crawler") return "Hopper-v4";
  if (env.rfind("external:", 0) == 0) return env.substr(9);
  return env;
}

SearchRow ExperimentConfig::search_row() const {
  SearchRow row = search_row_for_task(resolved_task_row()).value_or(SearchRow{});
  if (amplitude) row.amplitude = *amplitude;
  if (offset) row.offset = *offset;
  if (phase) row.phase = *phase;
  if (frequency) row.frequency = *frequency;
  return row;
}

SearchSpace ExperimentConfig::search_space(std::size_t env_joint_count) const {
  if (joint_count && *joint_count != env_joint_count) {
    throw ConfigError("config joint_count " + std::to_string(*joint_count) + " does not match the " +
                      std::to_string(env_joint_count) + " joints of '" + env + "'");
  }
  try {
    return SearchSpace::from_row(search_row(), env_joint_count, variant);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

PDGains ExperimentConfig::gains() const {
  const std::optional<PDGains> defaults =
      default_gains_for_task(env == "crawler" ? std::string("crawler") : resolved_task_row());
  if ((!kp || !kd) && !defaults) {
    throw ConfigError("no default PD gains for '" + resolved_task_row() + "'; set kp and kd");
  }
  PDGains g;
  g.kp = kp ? *kp : defaults->kp;
  g.kd = kd ? *kd : defaults->kd;
  g.torque_limit = torque_limit;
  return g;
}

EnvOptions ExperimentConfig::env_options() const {
  EnvOptions options;
  options.horizon = horizon;
  const PDGains g = gains();
  options.crawler.kp = g.kp;
  options.crawler.kd = g.kd;
  options.bridge.endpoint = bridge_endpoint;
  options.bridge.actuation = bridge_actuation;
  options.bridge.joint_position_index = joint_position_index;
  options.bridge.joint_velocity_index = joint_velocity_index;
  options.bridge.max_episode_steps = max_episode_steps;
  options.bridge.timeout_seconds = bridge_timeout;
  return options;
}

std::uint64_t ExperimentConfig::effective_budget() const {
  return static_cast<std::uint64_t>(std::llround(static_cast<double>(budget) * budget_multiplier));
}

std::string ExperimentConfig::to_text() const {
  const SearchRow row = search_row();
  const PDGains g = gains();
  std::ostringstream out;
  out << "schema_version = " << schema_version << '\n';
  out << "env = " << quote(env) << '\n';
  out << "variant = " << quote(std::string(to_string(variant))) << '\n';
  out << "task_row = " << quote(resolved_task_row()) << '\n';
  if (joint_count) out << "joint_count = " << *joint_count << '\n';
  out << "amplitude = " << range_text(row.amplitude) << '\n';
  out << "offset = " << range_text(row.offset) << '\n';
  out << "phase = " << range_text(row.phase) << '\n';
  out << "frequency = " << range_text(row.frequency) << '\n';
  out << "population = " << population << '\n';
  out << "budget = " << budget << '\n';
  out << "budget_multiplier = " << format_double(budget_multiplier) << '\n';
  out << "dt_phase = " << format_double(dt_phase) << '\n';
  out << "restarts = " << (restarts ? "true" : "false") << '\n';
  out << "kp = " << format_double(g.kp) << '\n';
  out << "kd = " << format_double(g.kd) << '\n';
  if (g.torque_limit) out << "torque_limit = " << format_double(*g.torque_limit) << '\n';
  out << "seeds = [";
  for (std::size_t i = 0; i < seeds.size(); ++i) out << (i ? ", " : "") << seeds[i];
  out << "]\n";
  out << "output_dir = " << quote(output_dir) << '\n';
  if (horizon) out << "horizon = " << format_double(*horizon) << '\n';
  out << "bridge_endpoint = " << quote(bridge_endpoint) << '\n';
  out << "bridge_actuation = " << quote(std::string(to_string(bridge_actuation))) << '\n';
  out << "joint_position_index = " << joint_position_index << '\n';
  out << "joint_velocity_index = " << joint_velocity_index << '\n';
  out << "max_episode_steps = " << max_episode_steps << '\n';
  out << "bridge_timeout = " << format_double(bridge_timeout) << '\n';
  return out.str();
}

}  // namespace openloop
