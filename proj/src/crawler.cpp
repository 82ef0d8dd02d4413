#include "openloop/crawler.hpp"

#include <cmath>
#include <iostream>

#include "openloop/oscillator.hpp"

namespace openloop {

Crawler::Crawler(CrawlerConfig config) : config_(config) {
  gains_.kp = config_.kp;
  gains_.kd = config_.kd;
  gains_.validate();
  spec_.name = "crawler";
  spec_.joint_count = 1;
  spec_.obs_dim = 4;
  spec_.control_period = config_.control_period;
  spec_.episode_horizon = config_.horizon;
  spec_.actuation = ActuationMode::kPosition;
  spec_.action_bounds.assign(1, {-config_.rest_length, config_.rest_length});
  spec_.validate();
  substeps_ = substeps_per_tick(config_.control_period, config_.physics_step);
}

std::vector<double> Crawler::reset(std::uint64_t /*seed*/) {
  state_ = State{};
  state_.x1 = -0.5 * config_.rest_length;
  state_.x2 = 0.5 * config_.rest_length;
  energy_ = EnergyLedger{};
  steps_taken_ = 0;
  done_ = false;
  force_ = 0.0;
  force_steps_left_ = 0;
  return observation();
}

double Crawler::drag_coefficient(double velocity) const {
  return velocity > 0.0 ? config_.drag_forward : config_.drag_backward;
}

StepResult Crawler::step(std::span<const double> action) {
  if (done_) throw std::logic_error("crawler: step on a finished episode");
  check_action(spec_, action);
  const double target = action[0];
  const double dt = config_.physics_step;
  const double m = config_.mass;

  if (force_steps_left_ == 0) force_ = 0.0;
  const double start = midpoint();
  for (std::size_t s = 0; s < substeps_; ++s) {
    const double actuator = compute_torque(gains_, target, elongation(), state_.v2 - state_.v1);
    const double drag1 = drag_coefficient(state_.v1) * state_.v1;
    const double drag2 = drag_coefficient(state_.v2) * state_.v2;
    const double v1 = state_.v1 + dt * (-actuator - drag1 + force_) / m;
    const double v2 = state_.v2 + dt * (actuator - drag2) / m;

    const double avg1 = 0.5 * (state_.v1 + v1);
    const double avg2 = 0.5 * (state_.v2 + v2);
    energy_.actuator_work += actuator * (avg2 - avg1) * dt;
    energy_.external_work += force_ * avg1 * dt;
    energy_.drag_dissipation += (drag1 * avg1 + drag2 * avg2) * dt;

    state_.v1 = v1;
    state_.v2 = v2;
    state_.x1 += v1 * dt;
    state_.x2 += v2 * dt;
    state_.time += dt;
  }
  if (force_steps_left_ > 0 && --force_steps_left_ == 0) force_ = 0.0;
  ++steps_taken_;

  StepResult result;
  bool ok = true;
  for (double v : state_vector()) ok = ok && std::isfinite(v);
  if (!ok) {
    std::cerr << "crawler: non-finite state at t=" << state_.time << ", terminating\n";
    result.terminated = true;
    done_ = true;
  } else {
    result.reward = midpoint() - start;
  }
  result.truncated = steps_taken_ >= spec_.episode_steps();
  done_ = done_ || result.truncated;
  result.observation = observation();
  return result;
}

void Crawler::apply_external_force(std::span<const double> force, std::size_t duration_steps) {
  if (force.size() != 1) throw std::invalid_argument("crawler: force must be 1-D");
  force_ = force[0];
  force_steps_left_ = duration_steps;
}

double Crawler::kinetic_energy() const {
  return 0.5 * config_.mass * (state_.v1 * state_.v1 + state_.v2 * state_.v2);
}

std::vector<double> Crawler::observation() const {
  return {elongation(), state_.v2 - state_.v1, state_.v1, state_.v2};
}

std::vector<double> Crawler::state_vector() const {
  return {state_.x1, state_.x2, state_.v1, state_.v2, state_.time};
}

}  // namespace openloop
