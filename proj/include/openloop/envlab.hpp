#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace openloop {

/// The environment cannot perform the requested operation (e.g. external
/// forcing on a bridged task).
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The environment failed at runtime (bridge timeout, EOF, protocol error).
class EnvironmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ActuationMode { kTorque, kPosition };

[[nodiscard]] std::string_view to_string(ActuationMode mode);

struct EnvSpec {
  std::string name;
  std::size_t joint_count = 0;
  std::size_t obs_dim = 0;
  double control_period = 0.05;   // s, integer multiple of 1 ms
  double episode_horizon = 20.0;  // s
  ActuationMode actuation = ActuationMode::kPosition;
  std::vector<std::pair<double, double>> action_bounds;
  // Torque-actuated tasks: where the joint positions and velocities start in
  // the observation vector, for the PD loop on the primary side.
  std::size_t joint_position_index = 0;
  std::size_t joint_velocity_index = 0;

  [[nodiscard]] std::size_t episode_steps() const;
  void validate() const;
};

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
};

/// Episodic environment contract. Instances are single-threaded; run one
/// instance per evaluation thread.
class Environment {
 public:
  virtual ~Environment() = default;

  [[nodiscard]] virtual const EnvSpec& spec() const = 0;
  /// Deterministic initial state for a given seed.
  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  /// Advances one control period. Throws std::invalid_argument on a wrong
  /// action length or a non-finite action.
  virtual StepResult step(std::span<const double> action) = 0;

  /// Dimension of the force vector accepted by apply_external_force (0 when
  /// unsupported).
  [[nodiscard]] virtual std::size_t force_dimension() const { return 0; }
  /// The force acts for the next duration_steps control steps.
  virtual void apply_external_force(std::span<const double> force, std::size_t duration_steps);

  /// Full physical state (not the observation), for invariance audits.
  [[nodiscard]] virtual std::vector<double> state_vector() const = 0;
};

/// Throws std::invalid_argument unless the action has the right length and
/// only finite entries.
void check_action(const EnvSpec& spec, std::span<const double> action);

struct SwimmerConfig {
  double half_link_length = 0.5;  // each link has length 2 * half_link_length
  double drag_tangential = 1.0;
  double drag_normal = 2.0;
  double tracking_gain = 20.0;
  double max_joint_rate = 4.0;              // rad/s
  double joint_limit = 2.0943951023931953;  // 2 pi / 3
  double physics_step = 0.001;
  double control_period = 0.05;
  double horizon = 20.0;
};

struct CrawlerConfig {
  double rest_length = 1.0;
  double mass = 1.0;
  double kp = 50.0;
  double kd = 2.0;
  double drag_forward = 0.5;
  double drag_backward = 5.0;
  double physics_step = 0.001;
  double control_period = 0.05;
  double horizon = 20.0;
};

struct BridgeOptions {
  // "tcp:<host>:<port>" or a shell command that speaks the protocol on stdio.
  std::string endpoint;
  std::string env_id;
  ActuationMode actuation = ActuationMode::kTorque;
  std::size_t joint_position_index = 0;
  std::size_t joint_velocity_index = 0;
  std::size_t max_episode_steps = 1000;
  double timeout_seconds = 10.0;
};

struct EnvOptions {
  std::optional<double> horizon;  // overrides the built-in episode length
  SwimmerConfig swimmer;
  CrawlerConfig crawler;
  BridgeOptions bridge;
};

/// Registry: "purcell_swimmer", "crawler", "external:<bridge-env-id>".
[[nodiscard]] std::unique_ptr<Environment> make_environment(std::string_view name,
                                                            const EnvOptions& options = {});
[[nodiscard]] bool is_known_environment(std::string_view name);

}  // namespace openloop
