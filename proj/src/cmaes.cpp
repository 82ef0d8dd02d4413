#include "openloop/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace openloop {
namespace {

bool same_bits(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

bool same_bits(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

}  // namespace

StrategyConstants StrategyConstants::defaults(std::size_t dimension, std::size_t population) {
  if (dimension == 0) throw std::invalid_argument("cmaes: dimension must be >= 1");
  if (population < 2) throw std::invalid_argument("cmaes: population size must be >= 2");
  const double d = static_cast<double>(dimension);

  StrategyConstants k;
  k.mu = population / 2;
  k.weights.resize(k.mu);
  for (std::size_t i = 0; i < k.mu; ++i) {
    k.weights[i] = std::log(static_cast<double>(k.mu) + 0.5) - std::log(static_cast<double>(i + 1));
  }
  const double sum = std::accumulate(k.weights.begin(), k.weights.end(), 0.0);
  double sum_sq = 0.0;
  for (double& w : k.weights) {
    w /= sum;
    sum_sq += w * w;
  }
  k.mu_eff = 1.0 / sum_sq;

  k.c_sigma = (k.mu_eff + 2.0) / (d + k.mu_eff + 5.0);
  k.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((k.mu_eff - 1.0) / (d + 1.0)) - 1.0) + k.c_sigma;
  k.c_c = (4.0 + k.mu_eff / d) / (d + 4.0 + 2.0 * k.mu_eff / d);
  k.c_1 = 2.0 / ((d + 1.3) * (d + 1.3) + k.mu_eff);
  k.c_mu = std::min(1.0 - k.c_1,
                    2.0 * (k.mu_eff - 2.0 + 1.0 / k.mu_eff) / ((d + 2.0) * (d + 2.0) + k.mu_eff));
  k.chi_d = std::sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d));
  return k;
}

bool CmaState::identical_to(const CmaState& other) const {
  return same_bits(mean, other.mean) && step_size == other.step_size &&
         same_bits(covariance, other.covariance) && same_bits(path_sigma, other.path_sigma) &&
         same_bits(path_c, other.path_c) && generation == other.generation &&
         population_size == other.population_size && rng_seed == other.rng_seed;
}

CmaEs::CmaEs(std::size_t dimension, std::uint64_t seed, std::size_t population)
    : constants_(StrategyConstants::defaults(dimension, population)), rng_(seed) {
  const auto d = static_cast<Eigen::Index>(dimension);
  state_.mean = Eigen::VectorXd::Constant(d, 0.5);
  state_.step_size = kInitialStepSize;
  state_.covariance = Eigen::MatrixXd::Identity(d, d);
  state_.path_sigma = Eigen::VectorXd::Zero(d);
  state_.path_c = Eigen::VectorXd::Zero(d);
  state_.generation = 0;
  state_.population_size = population;
  state_.rng_seed = seed;
  decompose();
}

CmaEs::CmaEs(CmaState state)
    : state_(std::move(state)),
      constants_(StrategyConstants::defaults(state_.dimension(), state_.population_size)),
      rng_(state_.rng_seed) {
  const auto d = state_.mean.size();
  if (state_.covariance.rows() != d || state_.covariance.cols() != d ||
      state_.path_sigma.size() != d || state_.path_c.size() != d) {
    throw std::invalid_argument("cmaes: inconsistent state dimensions");
  }
  if (!(state_.step_size > 0.0)) throw std::invalid_argument("cmaes: step size must be positive");
  decompose();
}

void CmaEs::decompose() {
  Eigen::MatrixXd& c = state_.covariance;
  c = (0.5 * (c + c.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c);
  if (solver.info() != Eigen::Success || !solver.eigenvalues().allFinite()) {
    throw NumericalError("cmaes: covariance eigendecomposition failed");
  }
  Eigen::VectorXd eigenvalues = solver.eigenvalues();
  basis_ = solver.eigenvectors();
  if (eigenvalues.minCoeff() < kEigenvalueFloor) {
    eigenvalues = eigenvalues.cwiseMax(kEigenvalueFloor);
    c = basis_ * eigenvalues.asDiagonal() * basis_.transpose();
    c = (0.5 * (c + c.transpose())).eval();
  }
  axis_std_ = eigenvalues.cwiseSqrt();
}

double CmaEs::max_std() const { return state_.step_size * axis_std_.maxCoeff(); }

std::vector<Candidate> CmaEs::ask() {
  const auto d = state_.mean.size();
  pending_.clear();
  pending_.reserve(state_.population_size);
  for (std::size_t k = 0; k < state_.population_size; ++k) {
    Eigen::VectorXd z(d);
    for (Eigen::Index i = 0; i < d; ++i) z[i] = normal_(rng_);
    Candidate candidate;
    candidate.id = k;
    candidate.unclipped = state_.mean + state_.step_size * (basis_ * axis_std_.cwiseProduct(z));
    if (!candidate.unclipped.allFinite()) throw NumericalError("cmaes: non-finite sample");
    candidate.x = candidate.unclipped.cwiseMax(0.0).cwiseMin(1.0);
    pending_.push_back(std::move(candidate));
  }
  return pending_;
}

void CmaEs::tell(std::span<const Fitness> fitnesses) {
  const std::size_t lambda = state_.population_size;
  if (pending_.size() != lambda) throw std::invalid_argument("cmaes: tell without a matching ask");
  if (fitnesses.size() != lambda) {
    throw std::invalid_argument("cmaes: expected " + std::to_string(lambda) + " scores");
  }
  std::vector<double> scores(lambda, 0.0);
  std::vector<bool> seen(lambda, false);
  for (const Fitness& f : fitnesses) {
    if (f.id >= lambda || seen[f.id]) throw std::invalid_argument("cmaes: missing or duplicate id");
    if (!std::isfinite(f.score)) throw std::invalid_argument("cmaes: non-finite score");
    seen[f.id] = true;
    scores[f.id] = f.score;
  }

  // Rank by score (descending); ties resolved by id so the result does not
  // depend on the order of the input pairs.
  std::vector<std::size_t> order(lambda);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });

  const StrategyConstants& k = constants_;
  const auto d = state_.mean.size();
  const double dim = static_cast<double>(d);
  const double sigma = state_.step_size;
  const Eigen::VectorXd old_mean = state_.mean;

  std::vector<Eigen::VectorXd> steps(k.mu);
  Eigen::VectorXd weighted_step = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < k.mu; ++i) {
    steps[i] = (pending_[order[i]].x - old_mean) / sigma;
    weighted_step += k.weights[i] * steps[i];
  }
  state_.mean = old_mean + sigma * weighted_step;

  // C^{-1/2} * y_w through the eigenbasis.
  const Eigen::VectorXd whitened =
      basis_ * (basis_.transpose() * weighted_step).cwiseQuotient(axis_std_);
  state_.path_sigma = (1.0 - k.c_sigma) * state_.path_sigma +
                      std::sqrt(k.c_sigma * (2.0 - k.c_sigma) * k.mu_eff) * whitened;

  const double ps_norm = state_.path_sigma.norm();
  const double decay = std::pow(1.0 - k.c_sigma, 2.0 * static_cast<double>(state_.generation + 1));
  const bool h_sigma = ps_norm / std::sqrt(1.0 - decay) < (1.4 + 2.0 / (dim + 1.0)) * k.chi_d;

  state_.path_c = (1.0 - k.c_c) * state_.path_c;
  if (h_sigma) state_.path_c += std::sqrt(k.c_c * (2.0 - k.c_c) * k.mu_eff) * weighted_step;
  const double delta_h = h_sigma ? 0.0 : k.c_c * (2.0 - k.c_c);

  Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < k.mu; ++i) rank_mu += k.weights[i] * steps[i] * steps[i].transpose();
  state_.covariance = (1.0 - k.c_1 - k.c_mu) * state_.covariance +
                      k.c_1 * (state_.path_c * state_.path_c.transpose() + delta_h * state_.covariance) +
                      k.c_mu * rank_mu;

  state_.step_size = sigma * std::exp((k.c_sigma / k.d_sigma) * (ps_norm / k.chi_d - 1.0));
  if (!std::isfinite(state_.step_size) || !(state_.step_size > 0.0)) {
    throw NumericalError("cmaes: step size left (0, inf)");
  }
  ++state_.generation;
  pending_.clear();
  decompose();
}

bool CmaEs::identical_to(const CmaEs& other) const {
  if (!state_.identical_to(other.state_) || rng_ != other.rng_ || normal_ != other.normal_) {
    return false;
  }
  if (pending_.size() != other.pending_.size()) return false;
  for (std::size_t i = 0; i < pending_.size(); ++i) {
    if (pending_[i].id != other.pending_[i].id || !same_bits(pending_[i].x, other.pending_[i].x)) {
      return false;
    }
  }
  return true;
}

CmaEs make_optimizer(const SearchSpace& space, std::uint64_t seed, std::size_t population) {
  const std::size_t d = param_count(space);
  if (d == 0) throw std::invalid_argument("cmaes: search space has no free parameters");
  return CmaEs(d, seed, population);
}

StopReason should_stop(const CmaEs& optimizer, std::span<const double> best_history,
                       std::uint64_t evaluations, std::uint64_t budget) {
  if (evaluations >= budget) return StopReason::kBudget;
  if (optimizer.max_std() < kStepSizeTolerance) return StopReason::kStepSizeCollapse;
  if (best_history.size() >= kStagnationGenerations) {
    const auto window = best_history.last(kStagnationGenerations);
    const auto [lo, hi] = std::minmax_element(window.begin(), window.end());
    if (*hi - *lo <= kStagnationTolerance) return StopReason::kStagnation;
  }
  return StopReason::kContinue;
}

}  // namespace openloop
