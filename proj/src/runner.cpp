#include "openloop/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "openloop/seeding.hpp"

namespace openloop {
namespace {

using Json = nlohmann::ordered_json;

std::string hex64(std::uint64_t value) {
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(value));
  return buffer;
}

std::string_view stop_label(StopReason reason) {
  switch (reason) {
    case StopReason::kBudget: return "budget";
    case StopReason::kStepSizeCollapse: return "step_size";
    case StopReason::kStagnation: return "stagnation";
    case StopReason::kContinue: break;
  }
  return "continue";
}

std::unique_ptr<Environment> build_environment(const ExperimentConfig& config) {
  return make_environment(config.env, config.env_options());
}

struct Evaluation {
  double score = 0.0;
  std::size_t steps = 0;
};

// Scores one generation. Worker w only touches envs[w]; results land in the
// slot of the candidate id, so the outcome does not depend on scheduling.
std::vector<Evaluation> evaluate_generation(std::vector<std::unique_ptr<Environment>>& envs,
                                            const std::vector<Candidate>& candidates,
                                            const SearchSpace& space, const ExperimentConfig& config,
                                            const RolloutOptions& rollout, std::uint64_t seed,
                                            std::size_t generation) {
  std::vector<Evaluation> results(candidates.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&](Environment& env) {
    for (std::size_t k = next++; k < candidates.size(); k = next++) {
      try {
        const Candidate& c = candidates[k];
        const Eigen::VectorXd& x = c.x;
        const OscillatorParams params = space.decode(std::span<const double>(x.data(), x.size()));
        OpenLoopPolicy policy(params, config.variant, env.spec(), config.dt_phase);
        const EpisodeResult episode = run_episode(env, policy, derive_seed(seed, generation, c.id), rollout);
        results[c.id] = Evaluation{episode.episodic_return, episode.steps};
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = candidates.size();
      }
    }
  };

  if (envs.size() == 1) {
    work(*envs[0]);
  } else {
    std::vector<std::thread> workers;
    for (auto& env : envs) workers.emplace_back(work, std::ref(*env));
    for (auto& t : workers) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace

bool RunRecord::same_trace(const RunRecord& o) const {
  return schema_version == o.schema_version && config_hash == o.config_hash &&
         config_text == o.config_text && env == o.env && variant == o.variant && seed == o.seed &&
         generation_best == o.generation_best && generations == o.generations &&
         restarts == o.restarts && best_params == o.best_params && best_point == o.best_point &&
         best_fitness == o.best_fitness && best_env_seed == o.best_env_seed &&
         env_steps == o.env_steps && budget == o.budget && complete == o.complete &&
         stop_reason == o.stop_reason && error == o.error;
}

std::string config_hash(const ExperimentConfig& config) { return hex64(fnv1a64(config.to_text())); }

std::string record_to_json(const RunRecord& r) {
  Json params;
  params["amplitudes"] = r.best_params.amplitudes;
  params["offsets"] = r.best_params.offsets;
  params["phase_shifts"] = r.best_params.phase_shifts;
  params["omega_swing"] = r.best_params.omega_swing;
  params["omega_stance"] = r.best_params.omega_stance;

  Json j;
  j["schema_version"] = r.schema_version;
  j["config_hash"] = r.config_hash;
  j["env"] = r.env;
  j["variant"] = std::string(to_string(r.variant));
  j["seed"] = r.seed;
  j["complete"] = r.complete;
  j["stop_reason"] = r.stop_reason;
  j["error"] = r.error;
  j["budget"] = r.budget;
  j["env_steps"] = r.env_steps;
  j["generations"] = r.generations;
  j["restarts"] = r.restarts;
  j["best_fitness"] = r.best_fitness;
  j["best_env_seed"] = r.best_env_seed;
  j["best_params"] = params;
  j["best_point"] = r.best_point;
  j["generation_best"] = r.generation_best;
  j["wall_time_seconds"] = r.wall_time_seconds;
  j["config"] = r.config_text;
  return j.dump(2) + "\n";
}

RunRecord record_from_json(const std::string& text) {
  RunRecord r;
  try {
    const Json j = Json::parse(text);
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kRunRecordSchemaVersion) {
      throw ConfigError("unsupported run record schema_version " + std::to_string(r.schema_version));
    }
    r.config_hash = j.at("config_hash").get<std::string>();
    r.env = j.at("env").get<std::string>();
    r.variant = parse_variant(j.at("variant").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
    r.complete = j.at("complete").get<bool>();
    r.stop_reason = j.at("stop_reason").get<std::string>();
    r.error = j.at("error").get<std::string>();
    r.budget = j.at("budget").get<std::uint64_t>();
    r.env_steps = j.at("env_steps").get<std::uint64_t>();
    r.generations = j.at("generations").get<std::size_t>();
    r.restarts = j.at("restarts").get<std::size_t>();
    r.best_fitness = j.at("best_fitness").get<double>();
    r.best_env_seed = j.at("best_env_seed").get<std::uint64_t>();
    const Json& p = j.at("best_params");
    r.best_params.amplitudes = p.at("amplitudes").get<std::vector<double>>();
    r.best_params.offsets = p.at("offsets").get<std::vector<double>>();
    r.best_params.phase_shifts = p.at("phase_shifts").get<std::vector<double>>();
    r.best_params.omega_swing = p.at("omega_swing").get<double>();
    r.best_params.omega_stance = p.at("omega_stance").get<double>();
    r.best_point = j.at("best_point").get<std::vector<double>>();
    r.generation_best = j.at("generation_best").get<std::vector<double>>();
    r.wall_time_seconds = j.at("wall_time_seconds").get<double>();
    r.config_text = j.at("config").get<std::string>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed run record: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("malformed run record: ") + e.what());
  }
  return r;
}

void save_record(const RunRecord& record, const std::string& path) {
  write_text_file(path, record_to_json(record));
}

RunRecord load_record(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open run record " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return record_from_json(buffer.str());
}

std::vector<ScoreRow> progress_rows(const RunRecord& record) {
  std::vector<ScoreRow> rows;
  for (std::size_t g = 0; g < record.generation_best.size(); ++g) {
    rows.push_back(ScoreRow{record.env, "open_loop", std::string(to_string(record.variant)), record.seed,
                            static_cast<std::int64_t>(g), record.generation_best[g]});
  }
  return rows;
}

RunRecord optimize(const ExperimentConfig& config, std::uint64_t seed, const OptimizeOptions& options) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();

  RunRecord record;
  record.config_text = config.to_text();
  record.config_hash = config_hash(config);
  record.env = config.env;
  record.variant = config.variant;
  record.seed = seed;
  record.budget = config.effective_budget();
  record.best_fitness = -std::numeric_limits<double>::infinity();

  auto finish = [&](RunRecord& r) -> RunRecord {
    if (r.generations == 0) r.best_fitness = 0.0;
    r.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return std::move(r);
  };

  std::vector<std::unique_ptr<Environment>> envs;
  std::optional<SearchSpace> space;
  try {
    const std::size_t jobs = std::max<std::size_t>(options.jobs, 1);
    for (std::size_t w = 0; w < jobs; ++w) envs.push_back(build_environment(config));
    space.emplace(config.search_space(envs.front()->spec().joint_count));
  } catch (const EnvironmentError& e) {
    record.stop_reason = "aborted";
    record.error = e.what();
    return finish(record);
  }

  const RolloutOptions rollout{config.gains(), false};
  const std::uint64_t episode_steps = envs.front()->spec().episode_steps();
  std::size_t population = config.population;
  CmaEs optimizer = make_optimizer(*space, seed, population);
  std::vector<double> history;  // per-generation best since the last restart
  StopReason reason = StopReason::kContinue;

  try {
    while (true) {
      if (record.env_steps + population * episode_steps > record.budget + episode_steps) {
        reason = StopReason::kBudget;
        break;
      }
      const std::vector<Candidate> candidates = optimizer.ask();
      const std::vector<Evaluation> results = evaluate_generation(envs, candidates, *space, config, rollout,
                                                                  seed, record.generations);
      std::vector<Fitness> fitness;
      double generation_best = -std::numeric_limits<double>::infinity();
      for (const Candidate& c : candidates) {
        const Evaluation& e = results[c.id];
        record.env_steps += e.steps;
        fitness.push_back(Fitness{c.id, e.score});
        generation_best = std::max(generation_best, e.score);
        if (e.score > record.best_fitness) {
          record.best_fitness = e.score;
          record.best_point.assign(c.x.data(), c.x.data() + c.x.size());
          record.best_params = space->decode(record.best_point);
          record.best_env_seed = derive_seed(seed, record.generations, c.id);
        }
      }
      optimizer.tell(fitness);
      history.push_back(generation_best);
      record.generation_best.push_back(generation_best);
      ++record.generations;
      if (options.on_generation) options.on_generation(record.generations - 1, generation_best, record.env_steps);

      reason = should_stop(optimizer, history, record.env_steps, record.budget);
      if (reason == StopReason::kContinue) continue;
      if (reason != StopReason::kBudget && config.restarts) {
        population *= 2;
        ++record.restarts;
        optimizer = make_optimizer(*space, derive_seed(seed, "restart") ^ record.restarts, population);
        history.clear();
        continue;
      }
      break;
    }
  } catch (const EnvironmentError& e) {
    record.stop_reason = "aborted";
    record.error = e.what();
    return finish(record);
  } catch (const NumericalError& e) {
    record.stop_reason = "aborted";
    record.error = e.what();
    return finish(record);
  }

  record.stop_reason = std::string(stop_label(reason));
  record.complete = record.generations > 0;
  if (record.generations == 0) record.error = "budget too small for one generation";
  return finish(record);
}

EpisodeResult evaluate_once(const OscillatorParams& params, const ExperimentConfig& config,
                            std::uint64_t env_seed, bool record_actions) {
  return evaluate(params, config, {env_seed}, record_actions).front();
}

std::vector<EpisodeResult> evaluate(const OscillatorParams& params, const ExperimentConfig& config,
                                    const std::vector<std::uint64_t>& seeds, bool record_actions) {
  params.validate();
  const std::unique_ptr<Environment> env = build_environment(config);
  if (params.joint_count() != env->spec().joint_count) {
    throw ConfigError("parameters have " + std::to_string(params.joint_count()) + " joints, '" + config.env +
                      "' has " + std::to_string(env->spec().joint_count));
  }
  const RolloutOptions rollout{config.gains(), record_actions};
  std::vector<EpisodeResult> results;
  for (const std::uint64_t s : seeds) {
    OpenLoopPolicy policy(params, config.variant, env->spec(), config.dt_phase);
    results.push_back(run_episode(*env, policy, s, rollout));
  }
  return results;
}

}  // namespace openloop
