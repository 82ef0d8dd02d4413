#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace openloop {

/// Integration step for the oscillator phase, in seconds.
inline constexpr double kDefaultPhaseStep = 0.001;

/// Per-joint amplitude/offset/phase shift plus the two shared frequencies.
///
/// A joint's desired position is a_i * sin(theta_i + phi_i) + b_i, where
/// theta_i advances at omega_swing while sin(theta_i + phi_i) > 0 and at
/// omega_stance otherwise.
struct OscillatorParams {
  std::vector<double> amplitudes;    // rad
  std::vector<double> offsets;       // rad
  std::vector<double> phase_shifts;  // rad
  double omega_swing = 1.0;          // rad/s
  double omega_stance = 1.0;         // rad/s

  [[nodiscard]] std::size_t joint_count() const { return amplitudes.size(); }

  /// Throws std::invalid_argument when array lengths disagree, are empty,
  /// or a frequency is not strictly positive.
  void validate() const;

  friend bool operator==(const OscillatorParams&, const OscillatorParams&) = default;
};

enum class PolicyVariant {
  kFull,            // phase shifts and swing/stance frequencies
  kNoSwing,         // single frequency omega_swing
  kNoPhase,         // all phase shifts forced to zero
  kNoPhaseNoSwing,  // both simplifications
};

[[nodiscard]] bool uses_phase_shift(PolicyVariant variant);
[[nodiscard]] bool uses_swing_stance(PolicyVariant variant);
[[nodiscard]] std::string_view to_string(PolicyVariant variant);
/// Accepts "full", "no_swing", "no_phase", "no_phase_no_swing".
[[nodiscard]] PolicyVariant parse_variant(std::string_view name);

struct PhaseState {
  std::vector<double> theta;  // rad, one per joint
  double time = 0.0;          // s

  /// All phases start at zero.
  static PhaseState initial(std::size_t joint_count);

  friend bool operator==(const PhaseState&, const PhaseState&) = default;
};

/// Advances every phase by one explicit Euler step. The swing/stance branch is
/// chosen from the phase at the start of the step; sin == 0 selects stance.
[[nodiscard]] PhaseState phase_step(const PhaseState& state, const OscillatorParams& params,
                                     PolicyVariant variant, double dt);

/// In-place variant of phase_step used by the trajectory precomputation.
void advance_phase(PhaseState& state, const OscillatorParams& params, PolicyVariant variant,
                   double dt);

[[nodiscard]] std::vector<double> desired_position(const PhaseState& state,
                                                   const OscillatorParams& params,
                                                   PolicyVariant variant);

/// Desired joint positions sampled at the control rate, row-major.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(double dt_control, std::size_t rows, std::size_t joints);

  [[nodiscard]] double dt_control() const { return dt_control_; }
  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t joints() const { return joints_; }

  [[nodiscard]] double operator()(std::size_t row, std::size_t joint) const {
    return values_[row * joints_ + joint];
  }
  double& operator()(std::size_t row, std::size_t joint) { return values_[row * joints_ + joint]; }

  /// Copy of one row (the command for one control tick).
  [[nodiscard]] std::vector<double> row(std::size_t index) const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  double dt_control_ = 0.0;
  std::size_t rows_ = 0;
  std::size_t joints_ = 0;
  std::vector<double> values_;
};

/// Integrates the phase at dt_phase and samples the desired positions every
/// dt_control, starting at t = 0. Row k holds the command for t = k * dt_control
/// and there are ceil(horizon / dt_control) rows.
///
/// dt_control must be an exact integer multiple of dt_phase.
[[nodiscard]] Trajectory precompute_trajectory(const OscillatorParams& params,
                                               PolicyVariant variant, double horizon,
                                               double dt_control,
                                               double dt_phase = kDefaultPhaseStep);

/// Number of phase substeps per control tick; throws std::invalid_argument
/// when the ratio is not an integer.
[[nodiscard]] std::size_t substeps_per_tick(double dt_control, double dt_phase);

/// ceil(horizon / period), tolerant to representation error in the ratio.
[[nodiscard]] std::size_t tick_count(double horizon, double period);

}  // namespace openloop
