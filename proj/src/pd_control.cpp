#include "openloop/pd_control.hpp"

#include <algorithm>
#include <stdexcept>

namespace openloop {

void PDGains::validate() const {
  if (!(kp >= 0.0) || !(kd >= 0.0)) throw std::invalid_argument("PD gains must be non-negative");
  if (torque_limit && !(*torque_limit > 0.0)) {
    throw std::invalid_argument("torque limit must be positive");
  }
}

double compute_torque(const PDGains& gains, double q_des, double q, double q_dot) {
  const double tau = gains.kp * (q_des - q) - gains.kd * q_dot;
  if (!gains.torque_limit) return tau;
  return std::clamp(tau, -*gains.torque_limit, *gains.torque_limit);
}

std::vector<double> compute_torque(const PDGains& gains, std::span<const double> q_des,
                                   std::span<const double> q, std::span<const double> q_dot) {
  if (q_des.size() != q.size() || q.size() != q_dot.size()) {
    throw std::invalid_argument("compute_torque: dimension mismatch");
  }
  std::vector<double> tau(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) tau[i] = compute_torque(gains, q_des[i], q[i], q_dot[i]);
  return tau;
}

}  // namespace openloop
