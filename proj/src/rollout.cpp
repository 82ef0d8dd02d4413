#include "openloop/rollout.hpp"

#include <algorithm>

namespace openloop {

OpenLoopPolicy::OpenLoopPolicy(const OscillatorParams& params, PolicyVariant variant,
                               const EnvSpec& spec, double dt_phase)
    : trajectory_(precompute_trajectory(params, variant, spec.episode_horizon, spec.control_period,
                                        dt_phase)) {
  if (params.joint_count() != spec.joint_count) {
    throw std::invalid_argument("policy joint count does not match the environment");
  }
}

std::vector<double> OpenLoopPolicy::act(std::span<const double> /*observation*/, std::size_t tick) {
  if (trajectory_.rows() == 0) throw std::logic_error("open-loop policy has an empty trajectory");
  return trajectory_.row(std::min(tick, trajectory_.rows() - 1));
}

EpisodeResult run_episode(Environment& env, Policy& policy, std::uint64_t seed,
                          const RolloutOptions& options) {
  const EnvSpec& spec = env.spec();
  EpisodeResult result;
  policy.reset();
  std::vector<double> observation = env.reset(seed);
  const std::size_t max_steps = spec.episode_steps();
  for (std::size_t tick = 0; tick < max_steps; ++tick) {
    std::vector<double> command = policy.act(observation, tick);
    if (spec.actuation == ActuationMode::kTorque) {
      const std::vector<double> feedback = env.state_vector();
      const std::size_t n = spec.joint_count;
      const std::span<const double> all(feedback);
      command = compute_torque(options.gains, command, all.subspan(spec.joint_position_index, n),
                               all.subspan(spec.joint_velocity_index, n));
    }
    StepResult step = env.step(command);
    if (options.record_actions) result.actions.push_back(std::move(command));
    result.episodic_return += step.reward;
    ++result.steps;
    observation = std::move(step.observation);
    if (step.terminated) {
      result.terminated = true;
      break;
    }
    if (step.truncated) break;
  }
  return result;
}

}  // namespace openloop
