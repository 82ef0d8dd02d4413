#include <vector>

#include <gtest/gtest.h>

#include "openloop/pd_control.hpp"
#include "support/generators.hpp"

namespace openloop {
namespace {

TEST(ComputeTorque, ZeroErrorAtRestGivesZero) {
  const PDGains g{10.0, 0.5, std::nullopt};
  const std::vector<double> q{0.3, -1.2};
  EXPECT_EQ(compute_torque(g, q, q, std::vector<double>{0.0, 0.0}), (std::vector<double>{0.0, 0.0}));
}

TEST(ComputeTorque, SwimmerRowGains) {
  const PDGains g{7.0, 0.7, std::nullopt};
  EXPECT_NEAR(compute_torque(g, 0.1, 0.0, 0.0), 0.7, 1e-15);
}

TEST(ComputeTorque, DerivativeTermOpposesVelocity) {
  const PDGains g{1.0, 0.05, std::nullopt};
  EXPECT_DOUBLE_EQ(compute_torque(g, 0.0, 0.0, 2.0), -0.1);
}

TEST(ComputeTorque, ClampsToTorqueLimit) {
  const PDGains g{1.0, 0.0, 1.0};
  EXPECT_DOUBLE_EQ(compute_torque(g, 10.0, 0.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(compute_torque(g, -10.0, 0.0, 0.0), -1.0);
}

TEST(ComputeTorque, RejectsLengthMismatch) {
  const PDGains g{1.0, 0.1, std::nullopt};
  EXPECT_THROW((void)compute_torque(g, std::vector<double>{0.0, 1.0}, std::vector<double>{0.0},
                                    std::vector<double>{0.0, 0.0}),
               std::invalid_argument);
}

TEST(Gains, ValidateRejectsNegativeGainsAndLimit) {
  EXPECT_THROW((PDGains{-1.0, 0.0, std::nullopt}.validate()), std::invalid_argument);
  EXPECT_THROW((PDGains{1.0, -0.1, std::nullopt}.validate()), std::invalid_argument);
  EXPECT_THROW((PDGains{1.0, 0.1, 0.0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((PDGains{0.0, 0.0, 2.0}.validate()));
}

TEST(Properties, LinearBelowTheClamp) {
  testing::Gen gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    const PDGains g{gen.uniform(0, 50), gen.uniform(0, 5), std::nullopt};
    const double e1 = gen.uniform(-1, 1), v1 = gen.uniform(-3, 3);
    const double e2 = gen.uniform(-1, 1), v2 = gen.uniform(-3, 3);
    const double s = gen.uniform(-2, 2);
    const double combined = compute_torque(g, e1 + s * e2, 0.0, v1 + s * v2);
    const double separate = compute_torque(g, e1, 0.0, v1) + s * compute_torque(g, e2, 0.0, v2);
    EXPECT_NEAR(combined, separate, 1e-12);
  }
}

TEST(Properties, OddSymmetry) {
  testing::Gen gen(4);
  for (int trial = 0; trial < 200; ++trial) {
    const PDGains g{gen.uniform(0, 50), gen.uniform(0, 5), gen.coin() ? std::optional<double>(gen.uniform(0.1, 5))
                                                                      : std::nullopt};
    const double qd = gen.uniform(-2, 2), q = gen.uniform(-2, 2), v = gen.uniform(-3, 3);
    EXPECT_EQ(compute_torque(g, -qd, -q, -v), -compute_torque(g, qd, q, v));
  }
}

TEST(Properties, MonotoneInProportionalGain) {
  testing::Gen gen(5);
  for (int trial = 0; trial < 200; ++trial) {
    const double error = gen.uniform(0.01, 1.0);
    const double v = gen.uniform(-1, 1);
    const double kd = gen.uniform(0, 2);
    const double kp1 = gen.uniform(0, 20);
    const double kp2 = kp1 + gen.uniform(0, 20);
    EXPECT_LE(compute_torque({kp1, kd, std::nullopt}, error, 0.0, v),
              compute_torque({kp2, kd, std::nullopt}, error, 0.0, v));
    EXPECT_GE(compute_torque({kp1, kd, std::nullopt}, -error, 0.0, v),
              compute_torque({kp2, kd, std::nullopt}, -error, 0.0, v));
  }
}

}  // namespace
}  // namespace openloop
