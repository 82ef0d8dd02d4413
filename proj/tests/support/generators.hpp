#pragma once

// Small seeded generators for property tests.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "openloop/oscillator.hpp"

namespace openloop::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal(double mean = 0.0, double sd = 1.0) { return std::normal_distribution<double>(mean, sd)(rng_); }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

  std::vector<double> vector(std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (double& x : v) x = uniform(lo, hi);
    return v;
  }

  /// Parameters drawn from the widest per-task ranges of the search table:
  /// a in U(-2,2), b in U(-1,1), phi in 2 pi U(0,1), omega in 2 pi U(0.4,6).
  OscillatorParams params(std::size_t joints) {
    OscillatorParams p;
    p.amplitudes = vector(joints, -2.0, 2.0);
    p.offsets = vector(joints, -1.0, 1.0);
    p.phase_shifts = vector(joints, 0.0, 2.0 * std::numbers::pi);
    p.omega_swing = 2.0 * std::numbers::pi * uniform(0.4, 6.0);
    p.omega_stance = 2.0 * std::numbers::pi * uniform(0.4, 6.0);
    return p;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace openloop::testing
