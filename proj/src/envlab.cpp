#include "openloop/envlab.hpp"

#include <cmath>

#include "openloop/bridge.hpp"
#include "openloop/crawler.hpp"
#include "openloop/oscillator.hpp"
#include "openloop/purcell_swimmer.hpp"

namespace openloop {
namespace {

constexpr std::string_view kExternalPrefix = "external:";
constexpr double kPhysicsTick = 0.001;

}  // namespace

std::string_view to_string(ActuationMode mode) {
  return mode == ActuationMode::kTorque ? "torque" : "position";
}

std::size_t EnvSpec::episode_steps() const { return tick_count(episode_horizon, control_period); }

void EnvSpec::validate() const {
  if (joint_count == 0) throw std::invalid_argument("env spec: joint count must be >= 1");
  if (!(episode_horizon > 0.0)) throw std::invalid_argument("env spec: horizon must be positive");
  (void)substeps_per_tick(control_period, kPhysicsTick);
  if (!action_bounds.empty() && action_bounds.size() != joint_count) {
    throw std::invalid_argument("env spec: action bounds must match the joint count");
  }
}

void Environment::apply_external_force(std::span<const double> /*force*/,
                                       std::size_t /*duration_steps*/) {
  throw UnsupportedOperation("environment '" + spec().name + "' does not support external forces");
}

void check_action(const EnvSpec& spec, std::span<const double> action) {
  if (action.size() != spec.joint_count) {
    throw std::invalid_argument("action has " + std::to_string(action.size()) + " entries, expected " +
                                std::to_string(spec.joint_count));
  }
  for (double a : action) {
    if (!std::isfinite(a)) throw std::invalid_argument("action contains a non-finite value");
  }
}

bool is_known_environment(std::string_view name) {
  return name == "purcell_swimmer" || name == "crawler" ||
         (name.starts_with(kExternalPrefix) && name.size() > kExternalPrefix.size());
}

std::unique_ptr<Environment> make_environment(std::string_view name, const EnvOptions& options) {
  if (name == "purcell_swimmer") {
    SwimmerConfig config = options.swimmer;
    if (options.horizon) config.horizon = *options.horizon;
    return std::make_unique<PurcellSwimmer>(config);
  }
  if (name == "crawler") {
    CrawlerConfig config = options.crawler;
    if (options.horizon) config.horizon = *options.horizon;
    return std::make_unique<Crawler>(config);
  }
  if (name.starts_with(kExternalPrefix) && name.size() > kExternalPrefix.size()) {
    BridgeOptions bridge = options.bridge;
    bridge.env_id = std::string(name.substr(kExternalPrefix.size()));
    return std::make_unique<ExternalEnvironment>(bridge, options.horizon);
  }
  throw std::invalid_argument("unknown environment: " + std::string(name));
}

}  // namespace openloop
