#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "openloop/envlab.hpp"
#include "openloop/oscillator.hpp"
#include "openloop/pd_control.hpp"
#include "openloop/search_space.hpp"

namespace openloop {

/// Invalid or unreadable experiment configuration (CLI exit code 1).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Flat `key = value` file: numbers, true/false, "strings" and [lists].
/// `#` starts a comment. Keys are unique.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::string_view text, const std::string& origin = "<config>");
  static KeyValueFile load(const std::string& path);

  [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) != 0; }
  [[nodiscard]] std::vector<std::string> keys() const;

  [[nodiscard]] std::string get_string(const std::string& key) const;
  [[nodiscard]] double get_number(const std::string& key) const;
  [[nodiscard]] std::int64_t get_integer(const std::string& key) const;
  [[nodiscard]] bool get_bool(const std::string& key) const;
  [[nodiscard]] bool is_list(const std::string& key) const;
  [[nodiscard]] std::vector<double> get_number_list(const std::string& key) const;
  [[nodiscard]] std::vector<std::string> get_string_list(const std::string& key) const;

 private:
  [[nodiscard]] const std::string& raw(const std::string& key) const;

  std::string origin_;
  std::map<std::string, std::string> values_;
};

inline constexpr int kConfigSchemaVersion = 1;

/// Default PD gains per task row; nullopt for an unknown task.
[[nodiscard]] std::optional<PDGains> default_gains_for_task(std::string_view task);

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::string env = "crawler";
  PolicyVariant variant = PolicyVariant::kFull;
  std::string task_row;  // search-space/PD row; derived from env when empty
  std::optional<std::size_t> joint_count;
  std::optional<ParamRange> amplitude;
  std::optional<ParamRange> offset;
  std::optional<ParamRange> phase;
  std::optional<ParamRange> frequency;

  std::size_t population = 30;
  std::uint64_t budget = 200000;  // environment control steps
  double budget_multiplier = 1.0;
  double dt_phase = kDefaultPhaseStep;
  bool restarts = false;

  std::optional<double> kp;
  std::optional<double> kd;
  std::optional<double> torque_limit;

  std::vector<std::uint64_t> seeds{0};
  std::string output_dir = "runs";
  std::optional<double> horizon;

  std::string bridge_endpoint;
  ActuationMode bridge_actuation = ActuationMode::kTorque;
  std::size_t joint_position_index = 0;
  std::size_t joint_velocity_index = 0;
  std::size_t max_episode_steps = 1000;
  double bridge_timeout = 10.0;

  /// Throws ConfigError on unknown keys, bad types or invalid values.
  static ExperimentConfig from_file(const KeyValueFile& file);
  static ExperimentConfig load(const std::string& path);

  /// Canonical text with every field (defaults included), parseable by load().
  [[nodiscard]] std::string to_text() const;

  void validate() const;
  [[nodiscard]] std::string resolved_task_row() const;
  [[nodiscard]] SearchRow search_row() const;
  [[nodiscard]] SearchSpace search_space(std::size_t env_joint_count) const;
  [[nodiscard]] PDGains gains() const;
  [[nodiscard]] EnvOptions env_options() const;
  [[nodiscard]] std::uint64_t effective_budget() const;
};

}  // namespace openloop
