#include "openloop/oscillator.hpp"

#include <cmath>
#include <stdexcept>

namespace openloop {

void OscillatorParams::validate() const {
  const std::size_t n = amplitudes.size();
  if (n == 0) throw std::invalid_argument("oscillator params: joint count must be >= 1");
  if (offsets.size() != n || phase_shifts.size() != n) {
    throw std::invalid_argument("oscillator params: amplitude/offset/phase lengths differ");
  }
  if (!(omega_swing > 0.0) || !(omega_stance > 0.0)) {
    throw std::invalid_argument("oscillator params: frequencies must be positive");
  }
}

bool uses_phase_shift(PolicyVariant variant) {
  return variant == PolicyVariant::kFull || variant == PolicyVariant::kNoSwing;
}

bool uses_swing_stance(PolicyVariant variant) {
  return variant == PolicyVariant::kFull || variant == PolicyVariant::kNoPhase;
}

std::string_view to_string(PolicyVariant variant) {
  switch (variant) {
    case PolicyVariant::kFull: return "full";
    case PolicyVariant::kNoSwing: return "no_swing";
    case PolicyVariant::kNoPhase: return "no_phase";
    case PolicyVariant::kNoPhaseNoSwing: return "no_phase_no_swing";
  }
  return "unknown";
}

PolicyVariant parse_variant(std::string_view name) {
  if (name == "full") return PolicyVariant::kFull;
  if (name == "no_swing") return PolicyVariant::kNoSwing;
  if (name == "no_phase") return PolicyVariant::kNoPhase;
  if (name == "no_phase_no_swing") return PolicyVariant::kNoPhaseNoSwing;
  throw std::invalid_argument("unknown policy variant: " + std::string(name));
}

PhaseState PhaseState::initial(std::size_t joint_count) {
  return PhaseState{std::vector<double>(joint_count, 0.0), 0.0};
}

void advance_phase(PhaseState& state, const OscillatorParams& params, PolicyVariant variant,
                   double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("phase_step: dt must be positive");
  if (state.theta.size() != params.joint_count()) {
    throw std::invalid_argument("phase_step: joint count mismatch");
  }
  const bool switching = uses_swing_stance(variant);
  const bool shifted = uses_phase_shift(variant);
  const double swing_increment = params.omega_swing * dt;
  const double stance_increment = params.omega_stance * dt;
  for (std::size_t i = 0; i < state.theta.size(); ++i) {
    if (!switching) {
      state.theta[i] += swing_increment;
      continue;
    }
    const double phi = shifted ? params.phase_shifts[i] : 0.0;
    state.theta[i] += std::sin(state.theta[i] + phi) > 0.0 ? swing_increment : stance_increment;
  }
  state.time += dt;
}

PhaseState phase_step(const PhaseState& state, const OscillatorParams& params,
                      PolicyVariant variant, double dt) {
  PhaseState next = state;
  advance_phase(next, params, variant, dt);
  return next;
}

std::vector<double> desired_position(const PhaseState& state, const OscillatorParams& params,
                                     PolicyVariant variant) {
  const std::size_t n = params.joint_count();
  if (state.theta.size() != n || params.offsets.size() != n || params.phase_shifts.size() != n) {
    throw std::invalid_argument("desired_position: dimension mismatch");
  }
  const bool shifted = uses_phase_shift(variant);
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = shifted ? params.phase_shifts[i] : 0.0;
    q[i] = params.amplitudes[i] * std::sin(state.theta[i] + phi) + params.offsets[i];
  }
  return q;
}

Trajectory::Trajectory(double dt_control, std::size_t rows, std::size_t joints)
    : dt_control_(dt_control), rows_(rows), joints_(joints), values_(rows * joints, 0.0) {}

std::vector<double> Trajectory::row(std::size_t index) const {
  if (index >= rows_) throw std::out_of_range("trajectory row out of range");
  const auto begin = values_.begin() + static_cast<std::ptrdiff_t>(index * joints_);
  return {begin, begin + static_cast<std::ptrdiff_t>(joints_)};
}

std::size_t substeps_per_tick(double dt_control, double dt_phase) {
  if (!(dt_phase > 0.0) || !(dt_control >= dt_phase)) {
    throw std::invalid_argument("need dt_control >= dt_phase > 0");
  }
  const double ratio = dt_control / dt_phase;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * rounded) {
    throw std::invalid_argument("dt_control must be an integer multiple of dt_phase");
  }
  return static_cast<std::size_t>(rounded);
}

std::size_t tick_count(double horizon, double period) {
  if (!(horizon > 0.0) || !(period > 0.0)) {
    throw std::invalid_argument("horizon and period must be positive");
  }
  const double ratio = horizon / period;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) <= 1e-9 * std::max(1.0, rounded)) {
    return static_cast<std::size_t>(rounded);
  }
  return static_cast<std::size_t>(std::ceil(ratio));
}

Trajectory precompute_trajectory(const OscillatorParams& params, PolicyVariant variant,
                                 double horizon, double dt_control, double dt_phase) {
  params.validate();
  const std::size_t substeps = substeps_per_tick(dt_control, dt_phase);
  const std::size_t rows = tick_count(horizon, dt_control);
  const std::size_t n = params.joint_count();

  Trajectory trajectory(dt_control, rows, n);
  PhaseState state = PhaseState::initial(n);
  for (std::size_t row = 0; row < rows; ++row) {
    const std::vector<double> q = desired_position(state, params, variant);
    for (std::size_t j = 0; j < n; ++j) trajectory(row, j) = q[j];
    for (std::size_t s = 0; s < substeps; ++s) advance_phase(state, params, variant, dt_phase);
  }
  return trajectory;
}

}  // namespace openloop
