#include "openloop/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "openloop/csv.hpp"

namespace openloop {
namespace {

using Stratum = std::pair<std::string, std::string>;

std::map<Stratum, std::vector<std::size_t>> strata(const ScoreTable& table) {
  std::map<Stratum, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    out[{table.entries[i].env, table.entries[i].method}].push_back(i);
  }
  return out;
}

double mean(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

// Per-environment probability of improvement, averaged over shared envs.
double mean_improvement(const ScoreTable& table, const std::string& x, const std::string& y) {
  double total = 0.0;
  std::size_t count = 0;
  for (const std::string& env : table.envs()) {
    const auto xs = table.values(env, x);
    const auto ys = table.values(env, y);
    if (xs.empty() || ys.empty()) continue;
    total += probability_of_improvement(xs, ys);
    ++count;
  }
  return count == 0 ? 0.5 : total / static_cast<double>(count);
}

}  // namespace

std::vector<std::string> ScoreTable::methods() const {
  std::set<std::string> seen;
  for (const auto& e : entries) seen.insert(e.method);
  return {seen.begin(), seen.end()};
}

std::vector<std::string> ScoreTable::envs() const {
  std::set<std::string> seen;
  for (const auto& e : entries) seen.insert(e.env);
  return {seen.begin(), seen.end()};
}

std::vector<double> ScoreTable::values(const std::string& method) const {
  std::vector<double> out;
  for (const auto& e : entries) {
    if (e.method == method) out.push_back(e.value);
  }
  return out;
}

std::vector<double> ScoreTable::values(const std::string& env, const std::string& method) const {
  std::vector<double> out;
  for (const auto& e : entries) {
    if (e.env == env && e.method == method) out.push_back(e.value);
  }
  return out;
}

ScoreTable normalize(const ScoreTable& table) {
  ScoreTable out;
  out.entries.reserve(table.entries.size());
  for (const ScoreEntry& entry : table.entries) {
    const auto it = table.anchors.find(entry.env);
    if (it == table.anchors.end()) throw std::invalid_argument("normalize: no anchors for env " + entry.env);
    const Anchors& a = it->second;
    if (!(a.r_max != a.r_min) || !std::isfinite(a.r_min) || !std::isfinite(a.r_max)) {
      throw std::invalid_argument("normalize: degenerate anchors for env " + entry.env);
    }
    ScoreEntry normalized = entry;
    normalized.value = (entry.value - a.r_min) / (a.r_max - a.r_min);
    out.entries.push_back(std::move(normalized));
  }
  for (const auto& [env, a] : table.anchors) out.anchors[env] = Anchors{0.0, 1.0};
  return out;
}

double iqm(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("iqm: empty input");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t drop = sorted.size() / 4;
  const std::span<const double> middle(sorted.data() + drop, sorted.size() - 2 * drop);
  return mean(middle);
}

double quantile(std::span<const double> data, double q) {
  if (data.empty()) throw std::invalid_argument("quantile: empty input");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q outside [0,1]");
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  const double position = q * static_cast<double>(sorted.size() - 1);
  const auto lower = static_cast<std::size_t>(std::floor(position));
  const std::size_t upper = std::min(lower + 1, sorted.size() - 1);
  const double frac = position - static_cast<double>(lower);
  if (frac == 0.0) return sorted[lower];
  return sorted[lower] + frac * (sorted[upper] - sorted[lower]);
}

double median(std::span<const double> scores) { return quantile(scores, 0.5); }

std::vector<double> default_tau_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(0.05 * i);
  return grid;
}

std::vector<ProfileCurve> performance_profile(const ScoreTable& normalized,
                                              std::span<const double> tau_grid) {
  if (!std::is_sorted(tau_grid.begin(), tau_grid.end())) {
    throw std::invalid_argument("performance_profile: tau grid must be ascending");
  }
  std::vector<ProfileCurve> curves;
  for (const std::string& method : normalized.methods()) {
    const std::vector<double> scores = normalized.values(method);
    ProfileCurve curve;
    curve.method = method;
    curve.tau.assign(tau_grid.begin(), tau_grid.end());
    for (const double tau : tau_grid) {
      const auto above = std::count_if(scores.begin(), scores.end(), [tau](double s) { return s > tau; });
      curve.fraction.push_back(static_cast<double>(above) / static_cast<double>(scores.size()));
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

double probability_of_improvement(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw std::invalid_argument("probability_of_improvement: empty input");
  // Integer counts of wins and ties keep P(x,y) + P(y,x) == 1 exact.
  std::uint64_t twice_score = 0;
  for (const double a : x) {
    for (const double b : y) {
      if (a > b) {
        twice_score += 2;
      } else if (a == b) {
        twice_score += 1;
      }
    }
  }
  const double pairs = static_cast<double>(x.size()) * static_cast<double>(y.size());
  return static_cast<double>(twice_score) / (2.0 * pairs);
}

Interval bootstrap_ci(const TableStatistic& statistic, const ScoreTable& table,
                      std::size_t n_resamples, double level, std::uint64_t seed) {
  if (n_resamples < 100) throw std::invalid_argument("bootstrap_ci: need at least 100 resamples");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("bootstrap_ci: level must lie in (0,1)");
  const auto groups = strata(table);
  std::mt19937_64 rng(seed);
  std::vector<double> replicates;
  replicates.reserve(n_resamples);
  ScoreTable resampled;
  resampled.anchors = table.anchors;
  for (std::size_t r = 0; r < n_resamples; ++r) {
    resampled.entries.clear();
    for (const auto& [key, indices] : groups) {
      std::uniform_int_distribution<std::size_t> pick(0, indices.size() - 1);
      for (std::size_t k = 0; k < indices.size(); ++k) {
        resampled.entries.push_back(table.entries[indices[pick(rng)]]);
      }
    }
    replicates.push_back(statistic(resampled));
  }
  const double tail = (1.0 - level) / 2.0;
  return {quantile(replicates, tail), quantile(replicates, 1.0 - tail)};
}

EvalReport build_report(const ScoreTable& raw, const ReportOptions& options) {
  EvalReport report;
  report.normalized = normalize(raw);
  const ScoreTable& table = report.normalized;
  const std::vector<std::string> methods = table.methods();

  for (std::size_t m = 0; m < methods.size(); ++m) {
    const std::string& method = methods[m];
    // Bootstrap over this method's strata only.
    ScoreTable own;
    for (const auto& e : table.entries) {
      if (e.method == method) own.entries.push_back(e);
    }
    const std::vector<double> values = own.values(method);
    MethodAggregate agg;
    agg.method = method;
    agg.runs = values.size();
    agg.iqm = iqm(values);
    agg.median = median(values);
    agg.iqm_ci = bootstrap_ci([&](const ScoreTable& t) { return iqm(t.values(method)); }, own,
                              options.n_resamples, options.level, options.seed + 2 * m);
    agg.median_ci = bootstrap_ci([&](const ScoreTable& t) { return median(t.values(method)); }, own,
                                 options.n_resamples, options.level, options.seed + 2 * m + 1);
    report.aggregates.push_back(std::move(agg));
  }

  report.profiles = performance_profile(table, options.tau_grid);

  std::uint64_t pair_seed = options.seed + 2 * methods.size();
  for (const std::string& x : methods) {
    for (const std::string& y : methods) {
      if (x == y) continue;
      ScoreTable pair;
      for (const auto& e : table.entries) {
        if (e.method == x || e.method == y) pair.entries.push_back(e);
      }
      ImprovementPair p;
      p.x = x;
      p.y = y;
      p.probability = mean_improvement(pair, x, y);
      p.ci = bootstrap_ci([&](const ScoreTable& t) { return mean_improvement(t, x, y); }, pair,
                          options.n_resamples, options.level, pair_seed++);
      report.improvements.push_back(std::move(p));
    }
  }
  return report;
}

ScoreTable load_score_directory(const std::string& directory) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(directory)) throw std::invalid_argument("not a directory: " + directory);

  std::vector<fs::path> files;
  for (const auto& item : fs::directory_iterator(directory)) {
    if (item.is_regular_file() && item.path().extension() == ".csv" && item.path().filename() != "anchors.csv") {
      files.push_back(item.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::invalid_argument("no score CSV files in " + directory);

  // (env, method label, seed) -> (generation, return) of the latest row.
  std::map<std::tuple<std::string, std::string, std::uint64_t>, std::pair<std::int64_t, double>> runs;
  for (const fs::path& file : files) {
    for (const ScoreRow& row : read_score_csv(file.string())) {
      const std::string label = row.variant.empty() ? row.method : row.method + "/" + row.variant;
      const auto key = std::make_tuple(row.env, label, row.seed);
      const auto it = runs.find(key);
      if (it == runs.end() || row.generation >= it->second.first) {
        runs[key] = {row.generation, row.episodic_return};
      }
    }
  }

  ScoreTable table;
  for (const auto& [key, value] : runs) {
    table.entries.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), value.second});
  }

  const fs::path anchor_file = fs::path(directory) / "anchors.csv";
  if (fs::exists(anchor_file)) {
    table.anchors = read_anchor_csv(anchor_file.string());
  } else {
    std::map<std::string, std::vector<double>> low;
    std::map<std::string, std::vector<double>> high;
    for (const auto& e : table.entries) {
      if (e.method == "random" || e.method.rfind("random/", 0) == 0) low[e.env].push_back(e.value);
      if (e.method == "open_loop" || e.method == "open_loop/full") high[e.env].push_back(e.value);
    }
    for (const std::string& env : table.envs()) {
      if (low[env].empty() || high[env].empty()) {
        throw std::invalid_argument("no normalization anchors for env " + env +
                                    " (add anchors.csv or random/open_loop runs)");
      }
      table.anchors[env] = Anchors{mean(low[env]), mean(high[env])};
    }
  }
  return table;
}

std::string summary_json(const EvalReport& report) {
  nlohmann::ordered_json root;
  root["schema_version"] = 1;
  root["aggregates"] = nlohmann::ordered_json::array();
  for (const auto& a : report.aggregates) {
    root["aggregates"].push_back({{"method", a.method},
                                  {"runs", a.runs},
                                  {"iqm", a.iqm},
                                  {"iqm_ci", {a.iqm_ci.lo, a.iqm_ci.hi}},
                                  {"median", a.median},
                                  {"median_ci", {a.median_ci.lo, a.median_ci.hi}}});
  }
  root["probability_of_improvement"] = nlohmann::ordered_json::array();
  for (const auto& p : report.improvements) {
    root["probability_of_improvement"].push_back(
        {{"x", p.x}, {"y", p.y}, {"probability", p.probability}, {"ci", {p.ci.lo, p.ci.hi}}});
  }
  root["normalized"] = nlohmann::ordered_json::array();
  for (const auto& e : report.normalized.entries) {
    root["normalized"].push_back({{"env", e.env}, {"method", e.method}, {"seed", e.seed}, {"score", e.value}});
  }
  return root.dump(2) + "\n";
}

std::string aggregates_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "method,runs,iqm,iqm_lo,iqm_hi,median,median_lo,median_hi\n";
  for (const auto& a : report.aggregates) {
    out << a.method << ',' << a.runs << ',' << format_double(a.iqm) << ',' << format_double(a.iqm_ci.lo)
        << ',' << format_double(a.iqm_ci.hi) << ',' << format_double(a.median) << ','
        << format_double(a.median_ci.lo) << ',' << format_double(a.median_ci.hi) << '\n';
  }
  return out.str();
}

std::string profiles_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "method,tau,fraction\n";
  for (const auto& curve : report.profiles) {
    for (std::size_t i = 0; i < curve.tau.size(); ++i) {
      out << curve.method << ',' << format_double(curve.tau[i]) << ',' << format_double(curve.fraction[i]) << '\n';
    }
  }
  return out.str();
}

}  // namespace openloop
