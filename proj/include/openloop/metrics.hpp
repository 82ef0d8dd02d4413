#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace openloop {

struct ScoreEntry {
  std::string env;
  std::string method;
  std::uint64_t seed = 0;
  double value = 0.0;  // episodic return (raw) or normalized score
};

/// Normalization anchors of one environment: a random policy for the minimum
/// and the open-loop reference for the maximum.
struct Anchors {
  double r_min = 0.0;
  double r_max = 1.0;
};

struct ScoreTable {
  std::vector<ScoreEntry> entries;
  std::map<std::string, Anchors> anchors;

  /// Distinct methods / environments, sorted.
  [[nodiscard]] std::vector<std::string> methods() const;
  [[nodiscard]] std::vector<std::string> envs() const;
  /// Values of one method across every environment and seed, in entry order.
  [[nodiscard]] std::vector<double> values(const std::string& method) const;
  /// Values of one (env, method) stratum, in entry order.
  [[nodiscard]] std::vector<double> values(const std::string& env, const std::string& method) const;
};

/// s = (r - r_min) / (r_max - r_min). Throws std::invalid_argument when an
/// environment has no anchors or degenerate ones.
[[nodiscard]] ScoreTable normalize(const ScoreTable& table);

/// Sorts, drops floor(n/4) values from each end and averages the rest.
[[nodiscard]] double iqm(std::span<const double> scores);
[[nodiscard]] double median(std::span<const double> scores);
/// Linear-interpolation quantile of unsorted data, q in [0,1].
[[nodiscard]] double quantile(std::span<const double> data, double q);

struct ProfileCurve {
  std::string method;
  std::vector<double> tau;
  std::vector<double> fraction;  // fraction of runs with score > tau
};

/// Default threshold grid: 0 to 2 in steps of 0.05.
[[nodiscard]] std::vector<double> default_tau_grid();

[[nodiscard]] std::vector<ProfileCurve> performance_profile(const ScoreTable& normalized,
                                                            std::span<const double> tau_grid);

/// Mean over all pairs of [x > y] + 0.5 [x == y].
[[nodiscard]] double probability_of_improvement(std::span<const double> x, std::span<const double> y);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

using TableStatistic = std::function<double(const ScoreTable&)>;

inline constexpr std::size_t kDefaultResamples = 2000;
inline constexpr double kDefaultConfidence = 0.95;

/// Percentile bootstrap: resamples seeds with replacement inside every
/// (env, method) stratum, recomputes the statistic, and returns the
/// (1-level)/2 and 1-(1-level)/2 empirical quantiles. Deterministic in seed.
[[nodiscard]] Interval bootstrap_ci(const TableStatistic& statistic, const ScoreTable& table,
                                    std::size_t n_resamples = kDefaultResamples,
                                    double level = kDefaultConfidence, std::uint64_t seed = 0);

struct MethodAggregate {
  std::string method;
  std::size_t runs = 0;
  double iqm = 0.0;
  Interval iqm_ci;
  double median = 0.0;
  Interval median_ci;
};

struct ImprovementPair {
  std::string x;
  std::string y;
  double probability = 0.0;  // averaged over environments both methods ran on
  Interval ci;
};

struct EvalReport {
  ScoreTable normalized;
  std::vector<MethodAggregate> aggregates;
  std::vector<ProfileCurve> profiles;
  std::vector<ImprovementPair> improvements;
};

struct ReportOptions {
  std::vector<double> tau_grid = default_tau_grid();
  std::size_t n_resamples = kDefaultResamples;
  double level = kDefaultConfidence;
  std::uint64_t seed = 0;
};

/// Normalizes the raw table and computes every aggregate.
[[nodiscard]] EvalReport build_report(const ScoreTable& raw, const ReportOptions& options = {});

/// Loads every *.csv file of a directory in the schema
/// env,method,variant,seed,generation,return. A run is (env, method, variant,
/// seed) and keeps the return of its last generation; the method label is
/// "method/variant" when variant is non-empty. Anchors come from
/// anchors.csv (env,r_min,r_max) when present, otherwise from the mean
/// return of method "random" (minimum) and "open_loop" (maximum).
[[nodiscard]] ScoreTable load_score_directory(const std::string& directory);

/// Machine-readable summary (JSON text, stable formatting, trailing newline).
[[nodiscard]] std::string summary_json(const EvalReport& report);
[[nodiscard]] std::string aggregates_csv(const EvalReport& report);
[[nodiscard]] std::string profiles_csv(const EvalReport& report);

}  // namespace openloop
