#pragma once

#include <optional>
#include <span>
#include <vector>

namespace openloop {

/// Joint-space PD gains, shared by every joint of an environment.
struct PDGains {
  double kp = 0.0;
  double kd = 0.0;
  std::optional<double> torque_limit;  // symmetric clamp, unset = no clamp

  void validate() const;
};

/// tau_i = clamp(kp * (q_des_i - q_i) - kd * qdot_i, +-torque_limit).
/// The desired velocity is taken as zero.
[[nodiscard]] std::vector<double> compute_torque(const PDGains& gains,
                                                 std::span<const double> q_des,
                                                 std::span<const double> q,
                                                 std::span<const double> q_dot);

/// Scalar form used inside the built-in physics loops.
[[nodiscard]] double compute_torque(const PDGains& gains, double q_des, double q, double q_dot);

}  // namespace openloop
