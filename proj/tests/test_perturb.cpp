#include <array>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "openloop/crawler.hpp"
#include "openloop/perturb.hpp"
#include "openloop/purcell_swimmer.hpp"
#include "openloop/rollout.hpp"

namespace openloop {
namespace {

// Observations are a fixed function of the step count; forces are recorded.
class RecordingEnv final : public Environment {
 public:
  RecordingEnv(std::size_t obs_dim, std::size_t force_dim, std::size_t horizon_steps = 1000)
      : force_dim_(force_dim) {
    spec_.name = "recording";
    spec_.joint_count = 1;
    spec_.obs_dim = obs_dim;
    spec_.control_period = 0.05;
    spec_.episode_horizon = 0.05 * static_cast<double>(horizon_steps);
  }
  const EnvSpec& spec() const override { return spec_; }
  std::vector<double> reset(std::uint64_t) override {
    steps_ = 0;
    forces.clear();
    return obs();
  }
  StepResult step(std::span<const double>) override {
    ++steps_;
    StepResult r;
    r.observation = obs();
    r.truncated = steps_ >= spec_.episode_steps();
    return r;
  }
  std::size_t force_dimension() const override { return force_dim_; }
  void apply_external_force(std::span<const double> f, std::size_t duration) override {
    if (force_dim_ == 0) Environment::apply_external_force(f, duration);
    EXPECT_EQ(duration, 1u);
    forces.emplace_back(f.begin(), f.end());
  }
  std::vector<double> state_vector() const override { return {static_cast<double>(steps_)}; }

  std::vector<std::vector<double>> forces;

 private:
  std::vector<double> obs() const {
    std::vector<double> o(spec_.obs_dim);
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::sin(0.1 * static_cast<double>(steps_ + i));
    return o;
  }
  EnvSpec spec_;
  std::size_t force_dim_;
  std::size_t steps_ = 0;
};

std::vector<std::vector<double>> observations(Environment& env, std::uint64_t seed, std::size_t steps) {
  std::vector<std::vector<double>> out{env.reset(seed)};
  const std::vector<double> u(env.spec().joint_count, 0.3);
  for (std::size_t k = 0; k < steps; ++k) out.push_back(env.step(u).observation);
  return out;
}

PerturbationConfig with_seed(PerturbationConfig c, std::uint64_t seed) {
  c.seed = seed;
  return c;
}

TEST(Wrap, ZeroSigmaNoiseIsTransparent) {
  auto plain = std::make_unique<Crawler>();
  auto wrapped = wrap(std::make_unique<Crawler>(), PerturbationConfig::gaussian_noise(0.0));
  EXPECT_EQ(observations(*plain, 3, 50), observations(*wrapped, 3, 50));
}

TEST(Wrap, TypeTwoFailurePinsTheFirstSensorToFive) {
  auto env = wrap(std::make_unique<PurcellSwimmer>(), PerturbationConfig::failure_type_two());
  for (const auto& obs : observations(*env, 0, 40)) EXPECT_EQ(obs[0], 5.0);
}

TEST(Wrap, TypeOneFailureZeroesOnlyTheTarget) {
  RecordingEnv reference(4, 0);
  PerturbationConfig c = PerturbationConfig::failure_type_one();
  c.target_index = 2;
  auto env = wrap(std::make_unique<RecordingEnv>(4, 0), c);
  const auto clean = observations(reference, 0, 20);
  const auto broken = observations(*env, 0, 20);
  for (std::size_t k = 0; k < clean.size(); ++k) {
    EXPECT_EQ(broken[k][2], 0.0);
    EXPECT_EQ(broken[k][0], clean[k][0]);
    EXPECT_EQ(broken[k][1], clean[k][1]);
    EXPECT_EQ(broken[k][3], clean[k][3]);
  }
}

TEST(Wrap, NoiseHasTheConfiguredSpread) {
  RecordingEnv reference(2, 0);
  const auto clean = observations(reference, 0, 999);
  auto env = wrap(std::make_unique<RecordingEnv>(2, 0), with_seed(PerturbationConfig::gaussian_noise(0.2), 4));
  double sum = 0.0, sum_sq = 0.0;
  std::size_t n = 0;
  for (std::uint64_t episode = 0; episode < 10; ++episode) {
    const auto noisy = observations(*env, episode, 999);
    for (std::size_t k = 0; k < noisy.size(); ++k) {
      const double d = noisy[k][0] - clean[k][0];
      sum += d;
      sum_sq += d * d;
      ++n;
      EXPECT_EQ(noisy[k][1], clean[k][1]);
    }
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum_sq / n - mean * mean);
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(sd, 0.2, 0.01);
}

TEST(Wrap, ObservationCorruptionNeverTouchesDynamics) {
  for (const PerturbationConfig& c : {PerturbationConfig::gaussian_noise(1.0), PerturbationConfig::failure_type_one(),
                                      PerturbationConfig::failure_type_two()}) {
    Crawler plain;
    auto wrapped = wrap(std::make_unique<Crawler>(), with_seed(c, 9));
    plain.reset(2);
    wrapped->reset(2);
    for (int k = 0; k < 200; ++k) {
      const double u[1] = {0.7 * std::sin(0.3 * k)};
      plain.step(u);
      wrapped->step(u);
      ASSERT_EQ(plain.state_vector(), wrapped->state_vector()) << c.label();
    }
  }
}

TEST(Wrap, NoiseStreamDependsOnlyOnSeeds) {
  // Same seeds over two different inner environments: identical noise draws.
  const PerturbationConfig c = with_seed(PerturbationConfig::gaussian_noise(0.5), 12);
  auto a = wrap(std::make_unique<RecordingEnv>(3, 0), c);
  auto b = wrap(std::make_unique<RecordingEnv>(3, 2), c);
  RecordingEnv clean(3, 0);
  const auto ref = observations(clean, 0, 30);
  const auto oa = observations(*a, 77, 30);
  const auto ob = observations(*b, 77, 30);
  for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_EQ(oa[k][0] - ref[k][0], ob[k][0] - ref[k][0]);
  const auto other = observations(*a, 78, 30);
  EXPECT_NE(other[5][0], oa[5][0]);
}

TEST(Wrap, RejectsOutOfRangeTarget) {
  PerturbationConfig c = PerturbationConfig::failure_type_one();
  c.target_index = 4;
  EXPECT_THROW((void)wrap(std::make_unique<Crawler>(), c), std::invalid_argument);
  c.target_index = 3;
  EXPECT_NO_THROW((void)wrap(std::make_unique<Crawler>(), c));
}

TEST(Wrap, ForcingNeedsAForceCapableEnvironment) {
  EXPECT_THROW((void)wrap(std::make_unique<RecordingEnv>(2, 0), PerturbationConfig::external_force()),
               UnsupportedOperation);
}

TEST(Wrap, RejectsInvalidParameters) {
  EXPECT_THROW((void)wrap(std::make_unique<Crawler>(), PerturbationConfig::gaussian_noise(-0.1)),
               std::invalid_argument);
  EXPECT_THROW((void)wrap(std::make_unique<Crawler>(), PerturbationConfig::external_force(5, 1.5)),
               std::invalid_argument);
  EXPECT_THROW((void)wrap(std::make_unique<Crawler>(), PerturbationConfig::external_force(-1, 0.5)),
               std::invalid_argument);
}

TEST(Forcing, OneDimensionalImpulsesAreSignedMagnitude) {
  auto env = wrap(std::make_unique<RecordingEnv>(2, 1), with_seed(PerturbationConfig::external_force(), 1));
  auto* inner = static_cast<RecordingEnv*>(&env->inner());
  std::size_t positive = 0, total = 0;
  for (std::uint64_t episode = 0; episode < 20; ++episode) {
    observations(*env, episode, 999);
    EXPECT_EQ(inner->forces.size(), env->impulse_count());
    for (const auto& f : inner->forces) {
      ASSERT_EQ(f.size(), 1u);
      EXPECT_EQ(std::abs(f[0]), 5.0);
      positive += f[0] > 0;
      ++total;
    }
  }
  EXPECT_NEAR(static_cast<double>(positive) / total, 0.5, 0.08);
}

TEST(Forcing, PlanarImpulsesHaveUniformDirection) {
  auto env = wrap(std::make_unique<RecordingEnv>(2, 2), with_seed(PerturbationConfig::external_force(), 2));
  auto* inner = static_cast<RecordingEnv*>(&env->inner());
  std::array<std::size_t, 4> quadrant{};
  std::size_t total = 0;
  for (std::uint64_t episode = 0; episode < 40; ++episode) {
    observations(*env, episode, 999);
    for (const auto& f : inner->forces) {
      EXPECT_NEAR(std::hypot(f[0], f[1]), 5.0, 1e-12);
      ++quadrant[(f[0] > 0 ? 0 : 1) + (f[1] > 0 ? 0 : 2)];
      ++total;
    }
  }
  for (std::size_t q : quadrant) EXPECT_NEAR(static_cast<double>(q) / total, 0.25, 0.05);
}

TEST(Forcing, ImpulseCountFollowsTheProbability) {
  auto env = wrap(std::make_unique<RecordingEnv>(2, 1), with_seed(PerturbationConfig::external_force(5, 0.05), 0));
  double total = 0.0;
  for (std::uint64_t episode = 0; episode < 100; ++episode) {
    observations(*env, episode, 999);  // 1000 steps
    total += static_cast<double>(env->impulse_count());
  }
  EXPECT_GE(total / 100, 40.0);
  EXPECT_LE(total / 100, 60.0);
}

TEST(Forcing, SameSeedsGiveSameImpulses) {
  auto a = wrap(std::make_unique<RecordingEnv>(2, 2), with_seed(PerturbationConfig::external_force(), 5));
  auto b = wrap(std::make_unique<RecordingEnv>(2, 2), with_seed(PerturbationConfig::external_force(), 5));
  observations(*a, 10, 300);
  observations(*b, 10, 300);
  EXPECT_EQ(static_cast<RecordingEnv&>(a->inner()).forces, static_cast<RecordingEnv&>(b->inner()).forces);
}

TEST(Config, LabelsRoundTrip) {
  for (const PerturbationConfig& c :
       {PerturbationConfig::none(), PerturbationConfig::gaussian_noise(0.2), PerturbationConfig::failure_type_one(),
        PerturbationConfig::failure_type_two(), PerturbationConfig::failure_type_two(-3.5),
        PerturbationConfig::external_force(), PerturbationConfig::external_force(2.5, 0.1)}) {
    const PerturbationConfig back = PerturbationConfig::parse(c.label());
    EXPECT_EQ(back.label(), c.label());
    EXPECT_EQ(back.kind, c.kind);
  }
  EXPECT_EQ(PerturbationConfig::gaussian_noise(0.2).label(), "gaussian_noise:0.2");
  EXPECT_EQ(PerturbationConfig::failure_type_two().label(), "failure_type_II:5");
  EXPECT_EQ(PerturbationConfig::external_force().label(), "external_force:5:0.05");
  EXPECT_EQ(PerturbationConfig::parse("external_force").magnitude, 5.0);
  EXPECT_THROW((void)PerturbationConfig::parse("sensor_drift"), std::invalid_argument);
  EXPECT_THROW((void)PerturbationConfig::parse("gaussian_noise:abc"), std::invalid_argument);
}

TEST(Sweep, EmptyConfigListGivesEmptyReport) {
  const OscillatorParams p{{0.8}, {0.0}, {0.0}, 6.0, 9.0};
  EXPECT_TRUE(robustness_sweep(p, PolicyVariant::kFull, "crawler", {}, {50, 2, std::nullopt}, {}, {0, 1}).rows.empty());
}

TEST(Sweep, OpenLoopReturnsIgnoreObservationCorruption) {
  const OscillatorParams p{{0.8}, {0.0}, {0.0}, 6.0, 9.0};
  std::vector<PerturbationConfig> configs{PerturbationConfig::none(), PerturbationConfig::failure_type_one(),
                                          PerturbationConfig::failure_type_two()};
  for (double sigma : kNoiseGrid) configs.push_back(PerturbationConfig::gaussian_noise(sigma));
  configs.push_back(PerturbationConfig::external_force());
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const SweepReport report = robustness_sweep(p, PolicyVariant::kFull, "crawler", {}, {50, 2, std::nullopt}, configs, seeds);
  ASSERT_EQ(report.rows.size(), configs.size() * seeds.size());
  const std::size_t forced = configs.size() - 1;
  std::size_t differing = 0;
  for (std::size_t c = 1; c < configs.size(); ++c) {
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const double base = report.rows[s].episodic_return;
      const SweepRow& row = report.rows[c * seeds.size() + s];
      EXPECT_EQ(row.label, configs[c].label());
      if (c == forced) {
        differing += row.episodic_return != base;
      } else {
        EXPECT_EQ(row.episodic_return, base) << row.label;
      }
    }
  }
  EXPECT_GE(differing, 9u);
}

}  // namespace
}  // namespace openloop
