#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "openloop/envlab.hpp"
#include "openloop/oscillator.hpp"
#include "openloop/pd_control.hpp"

namespace openloop {

/// Maps observations to joint-space commands (desired positions).
class Policy {
 public:
  virtual ~Policy() = default;
  virtual void reset() {}
  [[nodiscard]] virtual std::vector<double> act(std::span<const double> observation,
                                                std::size_t tick) = 0;
};

/// Replays a precomputed trajectory; never reads the observation. Past the
/// last row the final command is held.
class OpenLoopPolicy final : public Policy {
 public:
  explicit OpenLoopPolicy(Trajectory trajectory) : trajectory_(std::move(trajectory)) {}
  OpenLoopPolicy(const OscillatorParams& params, PolicyVariant variant, const EnvSpec& spec,
                 double dt_phase = kDefaultPhaseStep);

  [[nodiscard]] std::vector<double> act(std::span<const double> observation, std::size_t tick) override;
  [[nodiscard]] const Trajectory& trajectory() const { return trajectory_; }

 private:
  Trajectory trajectory_;
};

struct EpisodeResult {
  double episodic_return = 0.0;
  std::size_t steps = 0;
  bool terminated = false;
  std::vector<std::vector<double>> actions;  // environment inputs, when recorded
};

struct RolloutOptions {
  PDGains gains;               // used only for torque-actuated environments
  bool record_actions = false;
};

/// Runs one episode from reset(seed) until termination or truncation.
/// Torque-actuated environments get PD torques computed from the policy's
/// desired positions and the joint feedback in env.state_vector() (the
/// uncorrupted measurement, at spec().joint_position_index /
/// joint_velocity_index).
[[nodiscard]] EpisodeResult run_episode(Environment& env, Policy& policy, std::uint64_t seed,
                                        const RolloutOptions& options = {});

}  // namespace openloop
