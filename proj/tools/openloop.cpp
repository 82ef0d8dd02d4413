// Command-line front end: optimize, evaluate, robustness, metrics, bridge-check.
//
// Exit codes: 0 success, 1 configuration/usage error, 2 runtime failure.

#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "openloop/bridge.hpp"
#include "openloop/config.hpp"
#include "openloop/csv.hpp"
#include "openloop/metrics.hpp"
#include "openloop/perturb.hpp"
#include "openloop/runner.hpp"

namespace fs = std::filesystem;
using namespace openloop;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t jobs = 1;
};

std::string sanitize(std::string name) {
  for (char& c : name) {
    if (c == ':' || c == '/' || c == ' ') c = '_';
  }
  return name;
}

fs::path output_directory(const GlobalOptions& global, const std::string& fallback) {
  fs::path dir = global.out.empty() ? fs::path(fallback) : fs::path(global.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

ExperimentConfig config_of_record(const RunRecord& record) {
  return ExperimentConfig::from_file(KeyValueFile::parse(record.config_text, "<run record>"));
}

int run_optimize(const GlobalOptions& global, const std::string& config_path, bool print_config,
                 std::optional<double> budget_multiplier) {
  ExperimentConfig config = config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_path);
  if (budget_multiplier) {
    config.budget_multiplier = *budget_multiplier;
    config.validate();
  }
  if (print_config) {
    std::cout << config.to_text();
    return 0;
  }
  if (config_path.empty()) throw ConfigError("optimize needs a config file");

  const std::vector<std::uint64_t> seeds =
      global.seed ? std::vector<std::uint64_t>{*global.seed} : config.seeds;
  const fs::path dir = output_directory(global, config.output_dir);
  OptimizeOptions options;
  options.jobs = global.jobs;

  bool aborted = false;
  for (const std::uint64_t seed : seeds) {
    const RunRecord record = optimize(config, seed, options);
    const std::string stem = sanitize(config.env) + "_" + std::string(to_string(config.variant)) + "_seed" +
                             std::to_string(seed);
    save_record(record, (dir / (stem + ".json")).string());
    write_text_file((dir / (stem + ".csv")).string(), score_csv(progress_rows(record)));
    std::cout << config.env << " " << to_string(config.variant) << " seed " << seed << ": best "
              << format_double(record.best_fitness) << " after " << record.generations << " generations, "
              << record.env_steps << " env steps (" << record.stop_reason << ")\n";
    if (!record.complete) {
      std::cerr << "run incomplete: " << record.error << "\n";
      if (record.stop_reason == "aborted") aborted = true;
    }
  }
  return aborted ? kExitRuntime : 0;
}

int run_evaluate(const GlobalOptions& global, const std::string& record_path,
                 std::vector<std::uint64_t> seeds) {
  const RunRecord record = load_record(record_path);
  if (record.best_params.joint_count() == 0) throw ConfigError("run record has no parameters");
  const ExperimentConfig config = config_of_record(record);
  if (seeds.empty()) seeds = global.seed ? std::vector<std::uint64_t>{*global.seed}
                                         : std::vector<std::uint64_t>{record.best_env_seed};

  const std::vector<EpisodeResult> results = evaluate(record.best_params, config, seeds, true);
  const fs::path dir = output_directory(global, fs::path(record_path).parent_path().string());

  std::vector<ScoreRow> rows;
  std::ostringstream actions;
  actions << "seed,tick";
  for (std::size_t j = 0; j < record.best_params.joint_count(); ++j) actions << ",u" << j;
  actions << '\n';
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    rows.push_back(ScoreRow{record.env, "open_loop", std::string(to_string(record.variant)), seeds[i], -1,
                            results[i].episodic_return});
    for (std::size_t t = 0; t < results[i].actions.size(); ++t) {
      actions << seeds[i] << ',' << t;
      for (const double u : results[i].actions[t]) actions << ',' << format_double(u);
      actions << '\n';
    }
    std::cout << "seed " << seeds[i] << ": return " << format_double(results[i].episodic_return) << '\n';
  }
  write_text_file((dir / "evaluation.csv").string(), score_csv(rows));
  write_text_file((dir / "actions.csv").string(), actions.str());
  return 0;
}

int run_robustness(const GlobalOptions& global, const std::string& record_path, const std::string& sweep_path) {
  const RunRecord record = load_record(record_path);
  const ExperimentConfig config = config_of_record(record);
  const KeyValueFile sweep = KeyValueFile::load(sweep_path);
  for (const std::string& key : sweep.keys()) {
    if (key != "perturbations" && key != "seeds" && key != "target_index" && key != "seed") {
      throw ConfigError("unknown sweep key '" + key + "'");
    }
  }

  std::vector<PerturbationConfig> configs;
  try {
    const std::uint64_t master = sweep.has("seed") ? static_cast<std::uint64_t>(sweep.get_integer("seed"))
                                                   : global.seed.value_or(0);
    const std::size_t target = sweep.has("target_index") ? static_cast<std::size_t>(sweep.get_integer("target_index")) : 0;
    for (const std::string& label : sweep.get_string_list("perturbations")) {
      PerturbationConfig pc = PerturbationConfig::parse(label);
      pc.target_index = target;
      pc.seed = master;
      configs.push_back(pc);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::vector<std::uint64_t> seeds{0};
  if (sweep.has("seeds")) {
    seeds.clear();
    for (const double s : sweep.get_number_list("seeds")) seeds.push_back(static_cast<std::uint64_t>(s));
  }

  const SweepReport report = robustness_sweep(record.best_params, record.variant, config.env,
                                              config.env_options(), config.gains(), configs, seeds);
  std::vector<ScoreRow> rows;
  for (const SweepRow& r : report.rows) {
    rows.push_back(ScoreRow{record.env, r.label, std::string(to_string(record.variant)), r.seed, -1,
                            r.episodic_return});
    std::cout << r.label << " seed " << r.seed << ": " << format_double(r.episodic_return) << '\n';
  }
  const fs::path dir = output_directory(global, fs::path(record_path).parent_path().string());
  write_text_file((dir / "robustness.csv").string(), score_csv(rows));
  return 0;
}

int run_metrics(const GlobalOptions& global, const std::string& csv_dir, std::size_t resamples) {
  ScoreTable table;
  try {
    table = load_score_directory(csv_dir);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  ReportOptions options;
  options.seed = global.seed.value_or(0);
  options.n_resamples = resamples;
  const EvalReport report = build_report(table, options);
  const fs::path dir = output_directory(global, (fs::path(csv_dir) / "metrics").string());
  const std::string summary = summary_json(report);
  write_text_file((dir / "summary.json").string(), summary);
  write_text_file((dir / "aggregates.csv").string(), aggregates_csv(report));
  write_text_file((dir / "profiles.csv").string(), profiles_csv(report));
  std::cout << summary;
  return 0;
}

int run_bridge_check(const std::string& endpoint, const std::string& env_id, double timeout) {
  const auto ms = std::chrono::milliseconds(static_cast<long long>(timeout * 1000.0));
  BridgeClient client(open_channel(endpoint, env_id, ms), ms);
  const BridgeSpec spec = client.spec();
  const std::vector<double> obs = client.reset(0);
  if (obs.size() != spec.obs_dim) throw EnvironmentError("reset returned a wrong observation length");
  const BridgeStep step = client.step(std::vector<double>(spec.act_dim, 0.0));
  if (step.observation.size() != spec.obs_dim) throw EnvironmentError("step returned a wrong observation length");
  client.close();
  std::cout << "bridge ok: obs_dim " << spec.obs_dim << ", act_dim " << spec.act_dim << ", control_period "
            << format_double(spec.control_period) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open-loop oscillator locomotion toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Master seed (overrides the config seeds)");
  app.add_option("--out", global.out, "Output directory");
  app.add_option("--jobs", global.jobs, "Parallel candidate evaluations")->check(CLI::PositiveNumber);

  std::string config_path;
  bool print_config = false;
  double multiplier = 1.0;
  auto* optimize_cmd = app.add_subcommand("optimize", "Optimize oscillator parameters with CMA-ES");
  optimize_cmd->add_option("config", config_path, "Experiment config file");
  optimize_cmd->add_flag("--print-config", print_config, "Print the resolved config with all defaults");
  auto* multiplier_opt = optimize_cmd->add_option("--budget-multiplier", multiplier, "Scale the step budget");

  std::string record_path;
  std::vector<std::uint64_t> eval_seeds;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Re-run the best parameters of a run record");
  evaluate_cmd->add_option("record", record_path, "Run record (JSON)")->required();
  evaluate_cmd->add_option("--seeds", eval_seeds, "Episode seeds")->delimiter(',');

  std::string sweep_path;
  auto* robustness_cmd = app.add_subcommand("robustness", "Evaluate a run record under perturbations");
  robustness_cmd->add_option("record", record_path, "Run record (JSON)")->required();
  robustness_cmd->add_option("sweep", sweep_path, "Sweep config file")->required();

  std::string csv_dir;
  std::size_t resamples = kDefaultResamples;
  auto* metrics_cmd = app.add_subcommand("metrics", "Aggregate score CSV files");
  metrics_cmd->add_option("csv_dir", csv_dir, "Directory of score CSV files; output defaults to <csv_dir>/metrics")->required();
  metrics_cmd->add_option("--resamples", resamples, "Bootstrap resamples")->check(CLI::Range(100, 1000000));

  std::string endpoint;
  std::string env_id = "Swimmer-v4";
  double timeout = 10.0;
  auto* bridge_cmd = app.add_subcommand("bridge-check", "Handshake with a bridge endpoint");
  bridge_cmd->add_option("endpoint", endpoint, "tcp:<host>:<port> or a server command")->required();
  bridge_cmd->add_option("--env-id", env_id, "Environment id passed to the server");
  bridge_cmd->add_option("--timeout", timeout, "Seconds per request")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }
  if (*seed_opt) global.seed = seed_value;

  try {
    if (*optimize_cmd) {
      return run_optimize(global, config_path, print_config,
                          *multiplier_opt ? std::optional<double>(multiplier) : std::nullopt);
    }
    if (*evaluate_cmd) return run_evaluate(global, record_path, eval_seeds);
    if (*robustness_cmd) return run_robustness(global, record_path, sweep_path);
    if (*metrics_cmd) return run_metrics(global, csv_dir, resamples);
    if (*bridge_cmd) return run_bridge_check(endpoint, env_id, timeout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const UnsupportedOperation& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  std::cerr << app.help();
  return kExitConfig;
}
