#include "openloop/perturb.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

#include "openloop/rollout.hpp"
#include "openloop/seeding.hpp"

namespace openloop {
namespace {

std::string shortest(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

double parse_number(std::string_view text) {
  double value = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    throw std::invalid_argument("perturbation: bad number '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

PerturbationConfig PerturbationConfig::none() { return {}; }

PerturbationConfig PerturbationConfig::gaussian_noise(double sigma) {
  PerturbationConfig c;
  c.kind = PerturbationKind::kGaussianNoise;
  c.sigma = sigma;
  return c;
}

PerturbationConfig PerturbationConfig::failure_type_one() {
  PerturbationConfig c;
  c.kind = PerturbationKind::kFailureTypeI;
  return c;
}

PerturbationConfig PerturbationConfig::failure_type_two(double value) {
  PerturbationConfig c;
  c.kind = PerturbationKind::kFailureTypeII;
  c.value = value;
  return c;
}

PerturbationConfig PerturbationConfig::external_force(double magnitude, double probability) {
  PerturbationConfig c;
  c.kind = PerturbationKind::kExternalForce;
  c.magnitude = magnitude;
  c.probability = probability;
  return c;
}

void PerturbationConfig::validate() const {
  if (!(sigma >= 0.0)) throw std::invalid_argument("perturbation: sigma must be >= 0");
  if (!(probability >= 0.0 && probability <= 1.0)) {
    throw std::invalid_argument("perturbation: probability must lie in [0, 1]");
  }
  if (!(magnitude >= 0.0)) throw std::invalid_argument("perturbation: magnitude must be >= 0");
  if (!std::isfinite(value)) throw std::invalid_argument("perturbation: value must be finite");
}

std::string PerturbationConfig::label() const {
  switch (kind) {
    case PerturbationKind::kNone: return "none";
    case PerturbationKind::kGaussianNoise: return "gaussian_noise:" + shortest(sigma);
    case PerturbationKind::kFailureTypeI: return "failure_type_I";
    case PerturbationKind::kFailureTypeII: return "failure_type_II:" + shortest(value);
    case PerturbationKind::kExternalForce:
      return "external_force:" + shortest(magnitude) + ":" + shortest(probability);
  }
  return "unknown";
}

PerturbationConfig PerturbationConfig::parse(std::string_view text) {
  const auto parts = split(text, ':');
  const std::string_view head = parts[0];
  PerturbationConfig c;
  if (head == "none" && parts.size() == 1) return c;
  if (head == "gaussian_noise" && parts.size() == 2) {
    c = gaussian_noise(parse_number(parts[1]));
  } else if (head == "failure_type_I" && parts.size() == 1) {
    c = failure_type_one();
  } else if (head == "failure_type_II" && parts.size() <= 2) {
    c = failure_type_two(parts.size() == 2 ? parse_number(parts[1]) : kTypeIIValue);
  } else if (head == "external_force" && parts.size() <= 3) {
    c = external_force(parts.size() >= 2 ? parse_number(parts[1]) : kDefaultForceMagnitude,
                       parts.size() == 3 ? parse_number(parts[2]) : kDefaultForceProbability);
  } else {
    throw std::invalid_argument("unknown perturbation '" + std::string(text) + "'");
  }
  c.validate();
  return c;
}

PerturbedEnvironment::PerturbedEnvironment(std::unique_ptr<Environment> inner, PerturbationConfig config)
    : inner_(std::move(inner)), config_(config) {
  if (!inner_) throw std::invalid_argument("perturb: null environment");
  config_.validate();
  if (config_.target_index >= inner_->spec().obs_dim) {
    throw std::invalid_argument("perturb: target index " + std::to_string(config_.target_index) +
                                " out of range for obs_dim " + std::to_string(inner_->spec().obs_dim));
  }
  if (config_.kind == PerturbationKind::kExternalForce && inner_->force_dimension() == 0) {
    throw UnsupportedOperation("perturb: '" + inner_->spec().name + "' does not accept external forces");
  }
}

std::vector<double> PerturbedEnvironment::reset(std::uint64_t seed) {
  const std::uint64_t master = mix64(config_.seed ^ mix64(seed));
  noise_rng_.seed(derive_seed(master, "noise"));
  force_rng_.seed(derive_seed(master, "force"));
  impulses_ = 0;
  std::vector<double> observation = inner_->reset(seed);
  corrupt(observation);
  return observation;
}

StepResult PerturbedEnvironment::step(std::span<const double> action) {
  if (config_.kind == PerturbationKind::kExternalForce) {
    std::bernoulli_distribution fire(config_.probability);
    if (fire(force_rng_)) {
      const std::size_t dim = inner_->force_dimension();
      std::vector<double> force(dim, 0.0);
      if (config_.direction == DirectionMode::kPositive) {
        force[0] = config_.magnitude;
      } else if (dim == 1) {
        force[0] = std::bernoulli_distribution(0.5)(force_rng_) ? config_.magnitude : -config_.magnitude;
      } else {
        const double angle = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(force_rng_);
        force[0] = config_.magnitude * std::cos(angle);
        force[1] = config_.magnitude * std::sin(angle);
      }
      inner_->apply_external_force(force, 1);
      ++impulses_;
    }
  }
  StepResult result = inner_->step(action);
  corrupt(result.observation);
  return result;
}

void PerturbedEnvironment::corrupt(std::vector<double>& observation) {
  double& target = observation.at(config_.target_index);
  switch (config_.kind) {
    case PerturbationKind::kGaussianNoise:
      if (config_.sigma > 0.0) target += std::normal_distribution<double>(0.0, config_.sigma)(noise_rng_);
      break;
    case PerturbationKind::kFailureTypeI: target = 0.0; break;
    case PerturbationKind::kFailureTypeII: target = config_.value; break;
    case PerturbationKind::kNone:
    case PerturbationKind::kExternalForce: break;
  }
}

std::unique_ptr<PerturbedEnvironment> wrap(std::unique_ptr<Environment> env, PerturbationConfig config) {
  return std::make_unique<PerturbedEnvironment>(std::move(env), config);
}

SweepReport robustness_sweep(const OscillatorParams& params, PolicyVariant variant,
                             std::string_view env_name, const EnvOptions& env_options,
                             const PDGains& gains, const std::vector<PerturbationConfig>& configs,
                             const std::vector<std::uint64_t>& seeds) {
  SweepReport report;
  if (configs.empty()) return report;
  RolloutOptions rollout;
  rollout.gains = gains;
  for (const PerturbationConfig& config : configs) {
    auto env = wrap(make_environment(env_name, env_options), config);
    OpenLoopPolicy policy(params, variant, env->spec());
    for (const std::uint64_t seed : seeds) {
      const EpisodeResult episode = run_episode(*env, policy, seed, rollout);
      report.rows.push_back({config.label(), seed, episode.episodic_return});
    }
  }
  return report;
}

}  // namespace openloop
