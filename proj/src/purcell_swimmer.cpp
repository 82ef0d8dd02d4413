#include "openloop/purcell_swimmer.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "openloop/oscillator.hpp"

namespace openloop {
namespace {

constexpr std::array<double, 5> kGaussNodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                            0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights{0.2369268850561891, 0.4786286704993665,
                                              0.5688888888888889, 0.4786286704993665,
                                              0.2369268850561891};

Eigen::Vector2d rotate(double angle, const Eigen::Vector2d& v) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

}  // namespace

PurcellSwimmer::PurcellSwimmer(SwimmerConfig config) : config_(config) {
  spec_.name = "purcell_swimmer";
  spec_.joint_count = 2;
  spec_.obs_dim = 5;
  spec_.control_period = config_.control_period;
  spec_.episode_horizon = config_.horizon;
  spec_.actuation = ActuationMode::kPosition;
  spec_.action_bounds.assign(2, {-config_.joint_limit, config_.joint_limit});
  spec_.validate();
  substeps_ = substeps_per_tick(config_.control_period, config_.physics_step);
}

std::vector<double> PurcellSwimmer::reset(std::uint64_t /*seed*/) {
  state_ = State{};
  steps_taken_ = 0;
  done_ = false;
  force_.setZero();
  force_steps_left_ = 0;
  return observation();
}

PurcellSwimmer::Resistance PurcellSwimmer::resistance(double joint1, double joint2) const {
  const double l = config_.half_link_length;
  Resistance out;
  out.body.setZero();
  out.joint.setZero();

  // Accumulates one quadrature point at body-frame position r on a link with
  // unit tangent t; joint_velocity is d r / d(joint angle) for that link.
  auto accumulate = [&](const Eigen::Vector2d& r, const Eigen::Vector2d& t, double weight,
                        int joint_index, const Eigen::Vector2d& joint_velocity) {
    const Eigen::Vector2d n(-t.y(), t.x());
    const Eigen::Matrix2d k =
        config_.drag_tangential * t * t.transpose() + config_.drag_normal * n * n.transpose();
    Eigen::Matrix<double, 2, 3> jac;
    jac << 1.0, 0.0, -r.y(), 0.0, 1.0, r.x();
    out.body += weight * jac.transpose() * k * jac;
    if (joint_index >= 0) out.joint.col(joint_index) += weight * jac.transpose() * k * joint_velocity;
  };

  const Eigen::Vector2d axis(1.0, 0.0);
  const Eigen::Vector2d t1(std::cos(joint1), std::sin(joint1));
  const Eigen::Vector2d t2(std::cos(joint2), std::sin(joint2));
  const Eigen::Vector2d n1(-t1.y(), t1.x());
  const Eigen::Vector2d n2(-t2.y(), t2.x());
  const Eigen::Vector2d rear_joint(-l, 0.0);
  const Eigen::Vector2d front_joint(l, 0.0);

  for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
    const double w = kGaussWeights[q] * l;
    const double s_center = l * kGaussNodes[q];
    accumulate(s_center * axis, axis, w, -1, Eigen::Vector2d::Zero());

    const double s = l * (1.0 + kGaussNodes[q]);  // distance from the joint
    accumulate(rear_joint - s * t1, t1, w, 0, -s * n1);
    accumulate(front_joint + s * t2, t2, w, 1, s * n2);
  }
  return out;
}

Eigen::Vector3d PurcellSwimmer::body_twist(double joint1, double joint2,
                                           const Eigen::Vector2d& joint_rates,
                                           const Eigen::Vector2d& body_force) const {
  const Resistance r = resistance(joint1, joint2);
  const Eigen::LLT<Eigen::Matrix3d> llt(r.body);
  if (llt.info() != Eigen::Success) {
    throw EnvironmentError("purcell_swimmer: drag matrix is not positive definite");
  }
  const Eigen::Vector3d rhs = Eigen::Vector3d(body_force.x(), body_force.y(), 0.0) - r.joint * joint_rates;
  return llt.solve(rhs);
}

void PurcellSwimmer::physics_step(const std::array<double, 2>& command) {
  const double dt = config_.physics_step;
  const std::array<double, 2> before = state_.joint;
  for (std::size_t j = 0; j < 2; ++j) {
    const double rate = std::clamp(config_.tracking_gain * (command[j] - state_.joint[j]),
                                   -config_.max_joint_rate, config_.max_joint_rate);
    state_.joint[j] = std::clamp(state_.joint[j] + rate * dt, -config_.joint_limit, config_.joint_limit);
    state_.joint_rate[j] = (state_.joint[j] - before[j]) / dt;
  }

  // The shape moves linearly over the step. Fourth-order Magnus step on
  // SE(2): twists at the two Gauss nodes plus their commutator, then the
  // exact exponential.
  const Eigen::Vector2d rates(state_.joint_rate[0], state_.joint_rate[1]);
  const Eigen::Vector2d body_force = rotate(-state_.heading, force_);
  auto twist_at = [&](double s) {
    return body_twist(before[0] + s * (state_.joint[0] - before[0]),
                      before[1] + s * (state_.joint[1] - before[1]), rates, body_force);
  };
  const double offset = std::sqrt(3.0) / 6.0;
  const Eigen::Vector3d t1 = twist_at(0.5 - offset);
  const Eigen::Vector3d t2 = twist_at(0.5 + offset);
  const Eigen::Vector3d bracket(t2.z() * t1.y() - t1.z() * t2.y(), t1.z() * t2.x() - t2.z() * t1.x(), 0.0);
  const Eigen::Vector3d increment = 0.5 * dt * (t1 + t2) + (std::sqrt(3.0) / 12.0) * dt * dt * bracket;

  const double dtheta = increment.z();
  double a = 1.0;  // sin(dtheta) / dtheta
  double b = 0.0;  // (1 - cos(dtheta)) / dtheta
  if (std::abs(dtheta) > 1e-9) {
    a = std::sin(dtheta) / dtheta;
    b = (1.0 - std::cos(dtheta)) / dtheta;
  } else {
    a = 1.0 - dtheta * dtheta / 6.0;
    b = dtheta / 2.0;
  }
  const Eigen::Vector2d body_delta(a * increment.x() - b * increment.y(), b * increment.x() + a * increment.y());
  const Eigen::Vector2d world_delta = rotate(state_.heading, body_delta);
  state_.x += world_delta.x();
  state_.y += world_delta.y();
  state_.heading += dtheta;
  state_.time += dt;
}

StepResult PurcellSwimmer::step(std::span<const double> action) {
  if (done_) throw std::logic_error("purcell_swimmer: step on a finished episode");
  check_action(spec_, action);
  const std::array<double, 2> command{action[0], action[1]};

  const double x_before = state_.x;
  if (force_steps_left_ == 0) force_.setZero();
  for (std::size_t s = 0; s < substeps_; ++s) physics_step(command);
  if (force_steps_left_ > 0 && --force_steps_left_ == 0) force_.setZero();
  ++steps_taken_;

  StepResult result;
  if (!finite()) {
    std::cerr << "purcell_swimmer: non-finite state at t=" << state_.time << ", terminating\n";
    result.terminated = true;
    done_ = true;
  } else {
    result.reward = state_.x - x_before;
  }
  result.truncated = steps_taken_ >= spec_.episode_steps();
  done_ = done_ || result.truncated;
  result.observation = observation();
  return result;
}

void PurcellSwimmer::apply_external_force(std::span<const double> force, std::size_t duration_steps) {
  if (force.size() != 2) throw std::invalid_argument("purcell_swimmer: force must be 2-D");
  force_ = Eigen::Vector2d(force[0], force[1]);
  force_steps_left_ = duration_steps;
}

std::vector<double> PurcellSwimmer::observation() const {
  return {state_.joint[0], state_.joint[1], state_.joint_rate[0], state_.joint_rate[1],
          state_.heading};
}

std::vector<double> PurcellSwimmer::state_vector() const {
  return {state_.x,          state_.y,          state_.heading,       state_.joint[0],
          state_.joint[1],   state_.joint_rate[0], state_.joint_rate[1], state_.time};
}

bool PurcellSwimmer::finite() const {
  for (double v : state_vector()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Eigen::Vector2d PurcellSwimmer::center_of_mass() const {
  const double l = config_.half_link_length;
  const Eigen::Vector2d rear = Eigen::Vector2d(-l, 0.0) -
                               l * Eigen::Vector2d(std::cos(state_.joint[0]), std::sin(state_.joint[0]));
  const Eigen::Vector2d front = Eigen::Vector2d(l, 0.0) +
                                l * Eigen::Vector2d(std::cos(state_.joint[1]), std::sin(state_.joint[1]));
  const Eigen::Vector2d body_com = (rear + front) / 3.0;
  return Eigen::Vector2d(state_.x, state_.y) + rotate(state_.heading, body_com);
}

}  // namespace openloop
