#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "openloop/cmaes.hpp"
#include "openloop/config.hpp"
#include "openloop/csv.hpp"
#include "openloop/oscillator.hpp"
#include "openloop/rollout.hpp"

namespace openloop {

inline constexpr int kRunRecordSchemaVersion = 1;

/// Outcome of one optimization run. Everything except wall_time_seconds is
/// a deterministic function of (config, seed).
struct RunRecord {
  int schema_version = kRunRecordSchemaVersion;
  std::string config_hash;  // fnv1a64 of the canonical config text, hex
  std::string config_text;
  std::string env;
  PolicyVariant variant = PolicyVariant::kFull;
  std::uint64_t seed = 0;

  std::vector<double> generation_best;  // best episodic return per generation
  std::size_t generations = 0;
  std::size_t restarts = 0;
  OscillatorParams best_params;
  std::vector<double> best_point;  // unit-box coordinates of best_params
  double best_fitness = 0.0;
  std::uint64_t best_env_seed = 0;
  std::uint64_t env_steps = 0;
  std::uint64_t budget = 0;
  double wall_time_seconds = 0.0;

  bool complete = false;
  std::string stop_reason;  // budget, step_size, stagnation, aborted
  std::string error;

  /// Equality of every deterministic field (wall time excluded).
  [[nodiscard]] bool same_trace(const RunRecord& other) const;
};

[[nodiscard]] std::string record_to_json(const RunRecord& record);
/// Throws ConfigError on malformed input or an unsupported schema version.
[[nodiscard]] RunRecord record_from_json(const std::string& text);
void save_record(const RunRecord& record, const std::string& path);
[[nodiscard]] RunRecord load_record(const std::string& path);

/// Per-generation best returns in the shared score CSV schema (method "open_loop").
[[nodiscard]] std::vector<ScoreRow> progress_rows(const RunRecord& record);

[[nodiscard]] std::string config_hash(const ExperimentConfig& config);

struct OptimizeOptions {
  std::size_t jobs = 1;  // parallel candidate evaluations
  // Called after every generation with (generation, best of generation, steps used).
  std::function<void(std::size_t, double, std::uint64_t)> on_generation;
};

/// CMA-ES over the configured search space, one episode per candidate. A
/// generation is started only while the steps used plus the generation's
/// worst-case cost stay within budget + one episode. Environment failures
/// abort the run and return a record with complete = false; invalid
/// configurations throw ConfigError.
[[nodiscard]] RunRecord optimize(const ExperimentConfig& config, std::uint64_t seed,
                                 const OptimizeOptions& options = {});

/// Scalar fitness of one parameter set (single episode).
[[nodiscard]] EpisodeResult evaluate_once(const OscillatorParams& params, const ExperimentConfig& config,
                                          std::uint64_t env_seed, bool record_actions = false);

/// One deterministic episode per seed, in seed order.
[[nodiscard]] std::vector<EpisodeResult> evaluate(const OscillatorParams& params,
                                                  const ExperimentConfig& config,
                                                  const std::vector<std::uint64_t>& seeds,
                                                  bool record_actions = false);

}  // namespace openloop
