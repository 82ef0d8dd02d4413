#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "openloop/purcell_swimmer.hpp"
#include "support/generators.hpp"

namespace openloop {
namespace {

constexpr double kPi = std::numbers::pi;

// Independent resistance model: Simpson's rule along each link (the force
// integrand is linear and the torque integrand quadratic in arc length, so
// both rules are exact), assembled from world-style point velocities.
struct Oracle {
  double l = 0.5, xi_t = 1.0, xi_n = 2.0;

  // Generalized force on (ux, uy, w) from drag, for a body twist u and joint rates.
  Eigen::Vector3d drag(double a1, double a2, const Eigen::Vector3d& u, const Eigen::Vector2d& rates) const {
    Eigen::Vector3d total = Eigen::Vector3d::Zero();
    auto link = [&](const Eigen::Vector2d& start, double angle, double sign, int joint) {
      const Eigen::Vector2d t(std::cos(angle), std::sin(angle));
      const Eigen::Vector2d n(-t.y(), t.x());
      const double length = 2 * l;
      const double s_nodes[3] = {0.0, length / 2, length};
      const double w_nodes[3] = {length / 6, 4 * length / 6, length / 6};
      for (int k = 0; k < 3; ++k) {
        const Eigen::Vector2d r = start + sign * s_nodes[k] * t;
        Eigen::Vector2d v(u.x() - u.z() * r.y(), u.y() + u.z() * r.x());
        if (joint >= 0) v += rates[joint] * sign * s_nodes[k] * n;
        const Eigen::Vector2d f = -(xi_t * t.dot(v) * t + xi_n * n.dot(v) * n);
        total += w_nodes[k] * Eigen::Vector3d(f.x(), f.y(), r.x() * f.y() - r.y() * f.x());
      }
    };
    link({-l, 0.0}, 0.0, 1.0, -1);
    link({-l, 0.0}, a1, -1.0, 0);
    link({l, 0.0}, a2, 1.0, 1);
    return total;
  }

  // Solves drag + external = 0 by assembling the linear map column by column.
  Eigen::Vector3d twist(double a1, double a2, const Eigen::Vector2d& rates, const Eigen::Vector2d& force) const {
    Eigen::Matrix3d m;
    for (int c = 0; c < 3; ++c) m.col(c) = -drag(a1, a2, Eigen::Vector3d::Unit(c), Eigen::Vector2d::Zero());
    const Eigen::Vector3d rhs = Eigen::Vector3d(force.x(), force.y(), 0.0) + drag(a1, a2, Eigen::Vector3d::Zero(), rates);
    return m.fullPivLu().solve(rhs);
  }
};

struct Stroke {
  double amplitude;
  std::size_t period_steps;  // control steps per period
};

// Drives joint 1 with a sampled sinusoid (joint 2 held at zero) and returns
// the center-of-mass position at each period boundary.
std::vector<Eigen::Vector2d> single_joint_run(const Stroke& stroke, std::size_t periods) {
  SwimmerConfig cfg;
  cfg.horizon = static_cast<double>((periods + 1) * stroke.period_steps) * cfg.control_period;
  PurcellSwimmer env(cfg);
  env.reset(0);
  const double w = 2 * kPi / (static_cast<double>(stroke.period_steps) * cfg.control_period);
  std::vector<Eigen::Vector2d> com{env.center_of_mass()};
  std::size_t tick = 0;
  for (std::size_t p = 0; p < periods; ++p) {
    for (std::size_t s = 0; s < stroke.period_steps; ++s) {
      const double t = static_cast<double>(++tick) * cfg.control_period;
      const double u[2] = {stroke.amplitude * std::sin(w * t), 0.0};
      env.step(u);
    }
    com.push_back(env.center_of_mass());
  }
  return com;
}

TEST(Reset, StartsAtRest) {
  PurcellSwimmer env;
  EXPECT_EQ(env.reset(3), (std::vector<double>{0, 0, 0, 0, 0}));
  EXPECT_EQ(env.reset(3), env.reset(3));
  EXPECT_EQ(env.spec().episode_steps(), 400u);
  EXPECT_EQ(env.spec().joint_count, 2u);
}

TEST(Drag, ResistanceIsSymmetricPositiveDefinite) {
  PurcellSwimmer env;
  testing::Gen gen(1);
  for (int trial = 0; trial < 500; ++trial) {
    const double limit = env.config().joint_limit;
    const auto r = env.resistance(gen.uniform(-limit, limit), gen.uniform(-limit, limit));
    EXPECT_LE((r.body - r.body.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(r.body).eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Drag, TwistMatchesIndependentSolve) {
  PurcellSwimmer env;
  const Oracle oracle;
  testing::Gen gen(2);
  for (int trial = 0; trial < 200; ++trial) {
    const double a1 = gen.uniform(-2.0, 2.0), a2 = gen.uniform(-2.0, 2.0);
    const Eigen::Vector2d rates(gen.uniform(-4, 4), gen.uniform(-4, 4));
    const Eigen::Vector2d force(gen.uniform(-5, 5), gen.uniform(-5, 5));
    const Eigen::Vector3d expected = oracle.twist(a1, a2, rates, force);
    EXPECT_LE((env.body_twist(a1, a2, rates, force) - expected).norm(), 1e-10 * (1 + expected.norm()));
  }
}

TEST(Forcing, StraightBodyDriftsAlongMobilityPrediction) {
  // Straight rod of length 6l: mobility diag(1 / (xi_t L), 1 / (xi_n L)).
  for (double psi : {0.0, 0.3, 1.1, 2.5, -2.0}) {
    PurcellSwimmer env;
    env.reset(0);
    const double force[2] = {5 * std::cos(psi), 5 * std::sin(psi)};
    env.apply_external_force(force, 1);
    const Eigen::Vector2d before = env.center_of_mass();
    const double hold[2] = {0.0, 0.0};
    env.step(hold);
    const Eigen::Vector2d drift = env.center_of_mass() - before;
    const double length = 3.0;
    const Eigen::Vector2d predicted(force[0] / (1.0 * length), force[1] / (2.0 * length));
    const double angle_error = std::atan2(predicted.x() * drift.y() - predicted.y() * drift.x(), predicted.dot(drift));
    EXPECT_LT(std::abs(angle_error), 1e-6) << "psi=" << psi;
    EXPECT_NEAR(drift.norm(), predicted.norm() * 0.05, 1e-9);
    EXPECT_NEAR(env.state().heading, 0.0, 1e-15);
  }
}

TEST(Forcing, BentBodyDriftDirectionMatchesIndependentSolve) {
  PurcellSwimmer env;
  const Oracle oracle;
  testing::Gen gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    const double a1 = gen.uniform(-2.0, 2.0), a2 = gen.uniform(-2.0, 2.0);
    const double psi = gen.uniform(-kPi, kPi);
    const Eigen::Vector2d f(5 * std::cos(psi), 5 * std::sin(psi));
    const Eigen::Vector3d mine = env.body_twist(a1, a2, Eigen::Vector2d::Zero(), f);
    const Eigen::Vector3d ref = oracle.twist(a1, a2, Eigen::Vector2d::Zero(), f);
    const double angle = std::atan2(mine.x() * ref.y() - mine.y() * ref.x(), mine.head<2>().dot(ref.head<2>()));
    EXPECT_LT(std::abs(angle), 1e-6);
  }
}

TEST(Forcing, ZeroForceLeavesTrajectoryUnchanged) {
  PurcellSwimmer a, b;
  a.reset(0);
  b.reset(0);
  const double zero[2] = {0.0, 0.0};
  for (int k = 0; k < 100; ++k) {
    const double u[2] = {std::sin(0.3 * k), std::cos(0.2 * k)};
    if (k % 7 == 0) b.apply_external_force(zero, 2);
    a.step(u);
    b.step(u);
  }
  EXPECT_EQ(a.state_vector(), b.state_vector());
}

TEST(Forcing, LastsForTheRequestedSteps) {
  PurcellSwimmer env;
  env.reset(0);
  const double push[2] = {5.0, 0.0};
  const double hold[2] = {0.0, 0.0};
  env.apply_external_force(push, 2);
  EXPECT_GT(env.step(hold).reward, 0.0);
  EXPECT_GT(env.step(hold).reward, 0.0);
  EXPECT_EQ(env.step(hold).reward, 0.0);
}

TEST(Forcing, RejectsWrongDimension) {
  PurcellSwimmer env;
  const double f[1] = {1.0};
  EXPECT_THROW(env.apply_external_force(f, 1), std::invalid_argument);
  EXPECT_EQ(env.force_dimension(), 2u);
}

TEST(Scallop, UnsaturatedSingleJointStrokeHasNoNetMotion) {
  testing::Gen gen(4);
  for (int trial = 0; trial < 20; ++trial) {
    Stroke stroke{0.0, 0};
    // Keep the commanded peak rate a * omega below the 4 rad/s tracking limit.
    do {
      stroke.period_steps = gen.index(10, 50);
      stroke.amplitude = gen.uniform(-1.0, 1.0);
    } while (std::abs(stroke.amplitude) * 2 * kPi / (stroke.period_steps * 0.05) > 3.5);
    const auto com = single_joint_run(stroke, 10);
    for (std::size_t p = 3; p < 10; ++p) {
      EXPECT_LT((com[p + 1] - com[p]).norm(), 1e-6) << "a=" << stroke.amplitude << " steps=" << stroke.period_steps;
    }
  }
}

TEST(Scallop, RateLimitedStrokeHasNoNetMotionOnceTheShapeIsPeriodic) {
  // With saturated tracking the joint mean creeps toward its periodic cycle
  // over many periods; the displacement per period shrinks with it.
  for (const Stroke stroke : {Stroke{1.8, 20}, Stroke{0.96, 10}, Stroke{-1.6, 12}}) {
    const auto com = single_joint_run(stroke, 120);
    for (std::size_t p = 10; p < 120; ++p) {
      EXPECT_LE((com[p + 1] - com[p]).norm(), (com[p] - com[p - 1]).norm() + 1e-14) << "a=" << stroke.amplitude;
    }
    EXPECT_LT((com[120] - com[119]).norm(), 1e-6) << "a=" << stroke.amplitude;
  }
}

TEST(Swimming, PhaseShiftedStrokeMoves) {
  PurcellSwimmer env;
  env.reset(0);
  double total = 0.0;
  for (int k = 1; k <= 400; ++k) {
    const double t = k * 0.05;
    const double u[2] = {std::sin(2 * kPi * 0.5 * t), std::sin(2 * kPi * 0.5 * t + kPi / 2)};
    total += env.step(u).reward;
  }
  EXPECT_GT(std::abs(total), 0.1);
  EXPECT_NEAR(total, env.state().x, 1e-12);
}

TEST(Step, TracksCommandsWithinRateAndJointLimits) {
  PurcellSwimmer env;
  env.reset(0);
  const double far[2] = {2.09, -2.09};
  for (int k = 0; k < 60; ++k) {
    const StepResult r = env.step(far);
    EXPECT_LE(std::abs(r.observation[2]), 4.0 + 1e-12);
    EXPECT_LE(std::abs(r.observation[3]), 4.0 + 1e-12);
    EXPECT_LE(std::abs(r.observation[0]), 2 * kPi / 3);
  }
  EXPECT_NEAR(env.state().joint[0], 2.09, 1e-6);
  EXPECT_NEAR(env.state().joint[1], -2.09, 1e-6);
}

TEST(Step, RejectsNonFiniteOrMisSizedActions) {
  PurcellSwimmer env;
  env.reset(0);
  const double bad[2] = {NAN, 0.0};
  EXPECT_THROW(env.step(bad), std::invalid_argument);
  const double short_action[1] = {0.0};
  EXPECT_THROW(env.step(std::span<const double>(short_action, 1)), std::invalid_argument);
}

TEST(Step, TruncatesAtHorizonAndRefusesFurtherSteps) {
  SwimmerConfig cfg;
  cfg.horizon = 0.5;
  PurcellSwimmer env(cfg);
  env.reset(0);
  const double u[2] = {0.1, 0.1};
  for (int k = 0; k < 9; ++k) EXPECT_FALSE(env.step(u).truncated);
  EXPECT_TRUE(env.step(u).truncated);
  EXPECT_THROW(env.step(u), std::logic_error);
  env.reset(0);
  EXPECT_NO_THROW(env.step(u));
}

TEST(Step, DeterministicForEqualInputs) {
  PurcellSwimmer a, b;
  a.reset(1);
  b.reset(1);
  const double push[2] = {1.0, -2.0};
  for (int k = 0; k < 80; ++k) {
    const double u[2] = {std::sin(0.4 * k), std::sin(0.4 * k + 1.0)};
    if (k == 17) {
      a.apply_external_force(push, 3);
      b.apply_external_force(push, 3);
    }
    EXPECT_EQ(a.step(u).observation, b.step(u).observation);
  }
  EXPECT_EQ(a.state_vector(), b.state_vector());
}

}  // namespace
}  // namespace openloop
