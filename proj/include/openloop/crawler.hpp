#pragma once

#include "openloop/envlab.hpp"
#include "openloop/pd_control.hpp"

namespace openloop {

/// Two point masses on a line joined by a linear actuator, with direction
/// dependent ground drag c(v) = drag_forward for v > 0, drag_backward
/// otherwise. The single "joint" is the elongation x2 - x1 - rest_length,
/// driven by a PD force toward the commanded elongation. Semi-implicit Euler.
///
/// Observation: (elongation, elongation rate, v1, v2). Reward: displacement
/// of the midpoint (x1 + x2) / 2 over the control step. External forces act
/// on mass 1.
class Crawler final : public Environment {
 public:
  struct State {
    double x1 = 0.0;
    double x2 = 0.0;
    double v1 = 0.0;
    double v2 = 0.0;
    double time = 0.0;
  };

  /// Work terms accumulated since reset, using the step-average velocity so
  /// that actuator + external work - dissipation equals the kinetic-energy
  /// change of the discrete scheme.
  struct EnergyLedger {
    double actuator_work = 0.0;
    double external_work = 0.0;
    double drag_dissipation = 0.0;
  };

  explicit Crawler(CrawlerConfig config = {});

  [[nodiscard]] const EnvSpec& spec() const override { return spec_; }
  std::vector<double> reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;
  [[nodiscard]] std::size_t force_dimension() const override { return 1; }
  void apply_external_force(std::span<const double> force, std::size_t duration_steps) override;
  [[nodiscard]] std::vector<double> state_vector() const override;

  [[nodiscard]] const State& state() const { return state_; }
  [[nodiscard]] const EnergyLedger& energy() const { return energy_; }
  [[nodiscard]] double kinetic_energy() const;
  [[nodiscard]] double midpoint() const { return 0.5 * (state_.x1 + state_.x2); }
  [[nodiscard]] double elongation() const { return state_.x2 - state_.x1 - config_.rest_length; }

 private:
  [[nodiscard]] double drag_coefficient(double velocity) const;
  [[nodiscard]] std::vector<double> observation() const;

  CrawlerConfig config_;
  PDGains gains_;
  EnvSpec spec_;
  State state_;
  EnergyLedger energy_;
  std::size_t substeps_ = 0;
  std::size_t steps_taken_ = 0;
  bool done_ = false;
  double force_ = 0.0;
  std::size_t force_steps_left_ = 0;
};

}  // namespace openloop
