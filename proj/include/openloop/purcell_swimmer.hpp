#pragma once

#include <array>

#include <Eigen/Dense>

#include "openloop/envlab.hpp"

namespace openloop {

/// Three-link swimmer in Stokes flow (resistive force theory).
///
/// Geometry in the body frame: the center link spans [-l, l] on the x axis.
/// The rear link hangs off (-l, 0) along -(cos a1, sin a1); the front link
/// leaves (l, 0) along (cos a2, sin a2). Every link has length 2l.
///
/// Joints are position-commanded and tracked by a rate-limited first-order
/// law; the body twist follows from the zero net force/torque balance.
///
/// Observation: (a1, a2, a1_dot, a2_dot, heading). Reward: x displacement of
/// the center-link midpoint over the control step.
class PurcellSwimmer final : public Environment {
 public:
  struct State {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;
    std::array<double, 2> joint{0.0, 0.0};
    std::array<double, 2> joint_rate{0.0, 0.0};
    double time = 0.0;
  };

  /// Resistance matrices of the assembly at a given shape, body frame:
  /// generalized drag on (ux, uy, omega) is -(body * twist + joint * rates).
  struct Resistance {
    Eigen::Matrix3d body;
    Eigen::Matrix<double, 3, 2> joint;
  };

  explicit PurcellSwimmer(SwimmerConfig config = {});

  [[nodiscard]] const EnvSpec& spec() const override { return spec_; }
  std::vector<double> reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;
  [[nodiscard]] std::size_t force_dimension() const override { return 2; }
  void apply_external_force(std::span<const double> force, std::size_t duration_steps) override;
  [[nodiscard]] std::vector<double> state_vector() const override;

  [[nodiscard]] const State& state() const { return state_; }
  [[nodiscard]] const SwimmerConfig& config() const { return config_; }
  /// Mean of the three link midpoints, world frame.
  [[nodiscard]] Eigen::Vector2d center_of_mass() const;

  /// 5-point Gauss-Legendre integration of the drag density along each link.
  [[nodiscard]] Resistance resistance(double joint1, double joint2) const;

  /// Body-frame twist (ux, uy, omega) for the given shape, joint rates and
  /// body-frame external force applied at the center-link midpoint.
  [[nodiscard]] Eigen::Vector3d body_twist(double joint1, double joint2,
                                           const Eigen::Vector2d& joint_rates,
                                           const Eigen::Vector2d& body_force) const;

 private:
  void physics_step(const std::array<double, 2>& command);
  [[nodiscard]] std::vector<double> observation() const;
  [[nodiscard]] bool finite() const;

  SwimmerConfig config_;
  EnvSpec spec_;
  State state_;
  std::size_t substeps_ = 0;
  std::size_t steps_taken_ = 0;
  bool done_ = false;
  Eigen::Vector2d force_{0.0, 0.0};
  std::size_t force_steps_left_ = 0;
};

}  // namespace openloop
