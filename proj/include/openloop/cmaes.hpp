#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "openloop/search_space.hpp"

namespace openloop {

/// Raised when the covariance matrix can no longer be factorized. Callers are
/// expected to restart the optimizer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultPopulation = 30;
inline constexpr double kInitialStepSize = 0.25;
inline constexpr double kEigenvalueFloor = 1e-14;

/// Strategy constants of the (mu/mu_w, lambda) CMA-ES, standard defaults:
///
///   mu      = floor(lambda / 2)
///   w_i     = ln(mu + 1/2) - ln(i), normalized to sum 1
///   mu_eff  = 1 / sum(w_i^2)
///   c_sigma = (mu_eff + 2) / (d + mu_eff + 5)
///   d_sigma = 1 + 2 max(0, sqrt((mu_eff - 1) / (d + 1)) - 1) + c_sigma
///   c_c     = (4 + mu_eff / d) / (d + 4 + 2 mu_eff / d)
///   c_1     = 2 / ((d + 1.3)^2 + mu_eff)
///   c_mu    = min(1 - c_1, 2 (mu_eff - 2 + 1 / mu_eff) / ((d + 2)^2 + mu_eff))
///   chi_d   = sqrt(d) (1 - 1 / (4d) + 1 / (21 d^2))
struct StrategyConstants {
  std::size_t mu = 0;
  std::vector<double> weights;
  double mu_eff = 0.0;
  double c_sigma = 0.0;
  double d_sigma = 0.0;
  double c_c = 0.0;
  double c_1 = 0.0;
  double c_mu = 0.0;
  double chi_d = 0.0;

  static StrategyConstants defaults(std::size_t dimension, std::size_t population);
};

/// Strategy state in the normalized search box [0,1]^d.
struct CmaState {
  Eigen::VectorXd mean;
  double step_size = kInitialStepSize;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd path_sigma;
  Eigen::VectorXd path_c;
  std::size_t generation = 0;
  std::size_t population_size = kDefaultPopulation;
  std::uint64_t rng_seed = 0;

  [[nodiscard]] std::size_t dimension() const { return static_cast<std::size_t>(mean.size()); }
  /// Exact (bitwise) comparison of every field.
  [[nodiscard]] bool identical_to(const CmaState& other) const;
};

struct Candidate {
  std::size_t id = 0;
  Eigen::VectorXd x;          // clipped to the unit box; this is what gets evaluated
  Eigen::VectorXd unclipped;  // m + sigma * N(0, C) before clipping
};

/// Higher score is better.
struct Fitness {
  std::size_t id = 0;
  double score = 0.0;
};

/// Box-constrained CMA-ES with an ask/tell interface. Samples are clipped
/// coordinatewise to [0,1] and the update uses the clipped points.
///
/// Not reentrant: one optimization loop owns an instance. Candidate
/// evaluation between ask() and tell() may run in parallel.
class CmaEs {
 public:
  /// Mean at the box center, sigma = 0.25, C = I, zero paths.
  CmaEs(std::size_t dimension, std::uint64_t seed, std::size_t population = kDefaultPopulation);
  /// Resume from an explicit state; the RNG restarts from state.rng_seed.
  explicit CmaEs(CmaState state);

  [[nodiscard]] std::vector<Candidate> ask();
  /// Takes exactly one score per candidate of the last ask(), in any order.
  void tell(std::span<const Fitness> fitnesses);

  [[nodiscard]] const CmaState& state() const { return state_; }
  [[nodiscard]] const StrategyConstants& constants() const { return constants_; }
  /// sigma * sqrt(largest eigenvalue of C).
  [[nodiscard]] double max_std() const;

  /// Bitwise comparison of the strategy state, RNG stream and pending batch.
  [[nodiscard]] bool identical_to(const CmaEs& other) const;

 private:
  void decompose();

  CmaState state_;
  StrategyConstants constants_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  Eigen::MatrixXd basis_;      // eigenvectors of C
  Eigen::VectorXd axis_std_;   // sqrt of eigenvalues of C
  std::vector<Candidate> pending_;
};

/// init(space, seed, lambda): dimension taken from the free entries of the space.
[[nodiscard]] CmaEs make_optimizer(const SearchSpace& space, std::uint64_t seed,
                                   std::size_t population = kDefaultPopulation);

enum class StopReason { kContinue, kBudget, kStepSizeCollapse, kStagnation };

inline constexpr double kStepSizeTolerance = 1e-12;
inline constexpr double kStagnationTolerance = 1e-12;
inline constexpr std::size_t kStagnationGenerations = 50;

/// Stops when evaluations >= budget, when sigma * sqrt(max eig C) < 1e-12, or
/// when the last 50 per-generation best scores agree within 1e-12.
[[nodiscard]] StopReason should_stop(const CmaEs& optimizer, std::span<const double> best_history,
                                     std::uint64_t evaluations, std::uint64_t budget);

}  // namespace openloop
