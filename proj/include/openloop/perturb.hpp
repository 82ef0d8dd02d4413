#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "openloop/envlab.hpp"
#include "openloop/oscillator.hpp"
#include "openloop/pd_control.hpp"

namespace openloop {

enum class PerturbationKind {
  kNone,            // reference run, wrapper is transparent
  kGaussianNoise,   // obs[i] += N(0, sigma^2)
  kFailureTypeI,    // obs[i] = 0
  kFailureTypeII,   // obs[i] = value (5 by default)
  kExternalForce,   // random one-step impulses
};

/// kRandom: uniform direction (a sign in 1-D, a uniform angle in 2-D).
/// kPositive: always along +x.
enum class DirectionMode { kRandom, kPositive };

inline constexpr double kTypeIIValue = 5.0;
inline constexpr double kDefaultForceMagnitude = 5.0;
inline constexpr double kDefaultForceProbability = 0.05;
/// Noise intensities used by default sweeps.
inline constexpr double kNoiseGrid[] = {0.05, 0.1, 0.2, 0.5, 1.0};

struct PerturbationConfig {
  PerturbationKind kind = PerturbationKind::kNone;
  double sigma = 0.0;
  double value = kTypeIIValue;
  double magnitude = kDefaultForceMagnitude;
  double probability = kDefaultForceProbability;
  DirectionMode direction = DirectionMode::kRandom;
  std::size_t target_index = 0;
  std::uint64_t seed = 0;

  static PerturbationConfig none();
  static PerturbationConfig gaussian_noise(double sigma);
  static PerturbationConfig failure_type_one();
  static PerturbationConfig failure_type_two(double value = kTypeIIValue);
  static PerturbationConfig external_force(double magnitude = kDefaultForceMagnitude,
                                           double probability = kDefaultForceProbability);

  void validate() const;
  /// Short stable label, e.g. "gaussian_noise:0.2", "failure_type_II:5".
  [[nodiscard]] std::string label() const;
  /// Inverse of label(); also accepts "external_force:<N>:<p>".
  static PerturbationConfig parse(std::string_view text);
};

/// Environment wrapper applying, each step, the dynamics perturbation first
/// and then the observation corruption. spec() returns the wrapped EnvSpec.
///
/// Random streams are reseeded at every reset(seed) from
/// master = mix64(config.seed ^ mix64(seed)):
///   noise stream = derive_seed(master, "noise")
///   force stream = derive_seed(master, "force")
/// so they never share state with the wrapped environment.
class PerturbedEnvironment final : public Environment {
 public:
  PerturbedEnvironment(std::unique_ptr<Environment> inner, PerturbationConfig config);

  [[nodiscard]] const EnvSpec& spec() const override { return inner_->spec(); }
  std::vector<double> reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;
  [[nodiscard]] std::size_t force_dimension() const override { return inner_->force_dimension(); }
  void apply_external_force(std::span<const double> force, std::size_t duration_steps) override {
    inner_->apply_external_force(force, duration_steps);
  }
  [[nodiscard]] std::vector<double> state_vector() const override { return inner_->state_vector(); }

  /// Impulses applied since the last reset.
  [[nodiscard]] std::size_t impulse_count() const { return impulses_; }
  [[nodiscard]] const PerturbationConfig& config() const { return config_; }
  [[nodiscard]] Environment& inner() { return *inner_; }

 private:
  void corrupt(std::vector<double>& observation);

  std::unique_ptr<Environment> inner_;
  PerturbationConfig config_;
  std::mt19937_64 noise_rng_;
  std::mt19937_64 force_rng_;
  std::size_t impulses_ = 0;
};

/// Throws std::invalid_argument when target_index >= obs_dim, and
/// UnsupportedOperation when forcing is requested on an environment without
/// force support.
[[nodiscard]] std::unique_ptr<PerturbedEnvironment> wrap(std::unique_ptr<Environment> env,
                                                         PerturbationConfig config);

struct SweepRow {
  std::string label;
  std::uint64_t seed = 0;
  double episodic_return = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;  // config-major, seed-minor
};

/// Evaluates an open-loop policy under each configuration and seed, through
/// the same rollout path as any other policy.
[[nodiscard]] SweepReport robustness_sweep(const OscillatorParams& params, PolicyVariant variant,
                                           std::string_view env_name, const EnvOptions& env_options,
                                           const PDGains& gains,
                                           const std::vector<PerturbationConfig>& configs,
                                           const std::vector<std::uint64_t>& seeds);

}  // namespace openloop
