#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "openloop/config.hpp"

namespace openloop {
namespace {

ExperimentConfig parse_config(const std::string& text) {
  return ExperimentConfig::from_file(KeyValueFile::parse(text));
}

TEST(KeyValueFile, ParsesScalarsListsAndComments) {
  const KeyValueFile f = KeyValueFile::parse(
      "# header\n"
      "name = \"a # not a comment\"  # trailing\n"
      "count = 12\n"
      "ratio = -2.5e-1\n"
      "flag = true\n"
      "\n"
      "xs = [1, 2.5, 3]\n"
      "labels = [\"gaussian_noise:0.2\", \"a,b\"]\n");
  EXPECT_EQ(f.get_string("name"), "a # not a comment");
  EXPECT_EQ(f.get_integer("count"), 12);
  EXPECT_DOUBLE_EQ(f.get_number("ratio"), -0.25);
  EXPECT_TRUE(f.get_bool("flag"));
  EXPECT_TRUE(f.is_list("xs"));
  EXPECT_FALSE(f.is_list("count"));
  EXPECT_EQ(f.get_number_list("xs"), (std::vector<double>{1, 2.5, 3}));
  EXPECT_EQ(f.get_string_list("labels"), (std::vector<std::string>{"gaussian_noise:0.2", "a,b"}));
  EXPECT_EQ(f.keys(), (std::vector<std::string>{"count", "flag", "labels", "name", "ratio", "xs"}));
}

TEST(KeyValueFile, RejectsMalformedInput) {
  EXPECT_THROW((void)KeyValueFile::parse("just a line\n"), ConfigError);
  EXPECT_THROW((void)KeyValueFile::parse("a = 1\na = 2\n"), ConfigError);
  EXPECT_THROW((void)KeyValueFile::parse("= 1\n"), ConfigError);
  EXPECT_THROW((void)KeyValueFile::parse("a =\n"), ConfigError);
  const KeyValueFile f = KeyValueFile::parse("n = 1.5\ns = bare\nb = yes\n");
  EXPECT_THROW((void)f.get_integer("n"), ConfigError);
  EXPECT_THROW((void)f.get_string("s"), ConfigError);
  EXPECT_THROW((void)f.get_bool("b"), ConfigError);
  EXPECT_THROW((void)f.get_number("missing"), ConfigError);
  EXPECT_THROW((void)f.get_number_list("n"), ConfigError);
  EXPECT_THROW((void)KeyValueFile::load("/nonexistent/openloop.cfg"), ConfigError);
}

TEST(ExperimentConfig, DefaultsAreValid) {
  ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.resolved_task_row(), "Hopper-v4");
  EXPECT_EQ(c.population, 30u);
  EXPECT_EQ(c.effective_budget(), 200000u);
}

TEST(ExperimentConfig, ReadsEveryField) {
  const ExperimentConfig c = parse_config(
      "env = \"purcell_swimmer\"\n"
      "variant = \"no_swing\"\n"
      "amplitude = [0.2, 0.9]\n"
      "offset = 0.1\n"
      "population = 12\n"
      "budget = 5000\n"
      "budget_multiplier = 0.5\n"
      "restarts = true\n"
      "seeds = [3, 4]\n"
      "horizon = 4\n");
  EXPECT_EQ(c.env, "purcell_swimmer");
  EXPECT_EQ(c.variant, PolicyVariant::kNoSwing);
  EXPECT_EQ(*c.amplitude, ParamRange::uniform(0.2, 0.9));
  EXPECT_EQ(*c.offset, ParamRange::constant(0.1));
  EXPECT_EQ(c.population, 12u);
  EXPECT_EQ(c.effective_budget(), 2500u);
  EXPECT_TRUE(c.restarts);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 4}));
  EXPECT_EQ(*c.horizon, 4.0);
  EXPECT_EQ(c.search_row().amplitude, ParamRange::uniform(0.2, 0.9));
  EXPECT_EQ(c.search_row().frequency, search_row_for_task("Swimmer-v4")->frequency);
  EXPECT_EQ(*c.env_options().horizon, 4.0);
}

TEST(ExperimentConfig, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_config("populaton = 10\n"), ConfigError);
  EXPECT_THROW(parse_config("env = \"ant\"\n"), ConfigError);
  EXPECT_THROW(parse_config("variant = \"half\"\n"), ConfigError);
  EXPECT_THROW(parse_config("population = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("population = -3\n"), ConfigError);
  EXPECT_THROW(parse_config("budget = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("budget_multiplier = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("dt_phase = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("seeds = []\n"), ConfigError);
  EXPECT_THROW(parse_config("seeds = [1.5]\n"), ConfigError);
  EXPECT_THROW(parse_config("amplitude = [1, 0]\n"), ConfigError);
  EXPECT_THROW(parse_config("amplitude = [0, 1, 2]\n"), ConfigError);
  EXPECT_THROW(parse_config("frequency = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("schema_version = 2\n"), ConfigError);
  EXPECT_THROW(parse_config("kp = -1\n"), ConfigError);
  EXPECT_THROW(parse_config("env = \"external:Ant-v4\"\n"), ConfigError);
  EXPECT_THROW(parse_config("bridge_actuation = \"velocity\"\n"), ConfigError);
}

TEST(ExperimentConfig, UnknownTaskRowsNeedExplicitRangesAndGains) {
  const std::string base = "env = \"external:Custom-v0\"\nbridge_endpoint = \"python3 server.py\"\n";
  EXPECT_THROW(parse_config(base), ConfigError);
  const std::string ranges = base + "amplitude = [-1, 1]\noffset = 0\nphase = [0, 6.283185307179586]\nfrequency = [1, 10]\n";
  EXPECT_THROW(parse_config(ranges), ConfigError);
  const ExperimentConfig c = parse_config(ranges + "kp = 4\nkd = 0.4\n");
  EXPECT_EQ(c.resolved_task_row(), "Custom-v0");
  EXPECT_EQ(c.gains().kp, 4.0);
}

TEST(ExperimentConfig, ExternalEnvUsesItsTaskRow) {
  const ExperimentConfig c =
      parse_config("env = \"external:Swimmer-v4\"\nbridge_endpoint = \"tcp:127.0.0.1:9000\"\n");
  EXPECT_EQ(c.resolved_task_row(), "Swimmer-v4");
  EXPECT_EQ(c.gains().kp, 7.0);
  EXPECT_EQ(c.gains().kd, 0.7);
  EXPECT_EQ(c.env_options().bridge.endpoint, "tcp:127.0.0.1:9000");
}

TEST(ExperimentConfig, GainDefaultsFollowTheEnvironment) {
  EXPECT_EQ(ExperimentConfig{}.gains().kp, 50.0);
  EXPECT_EQ(ExperimentConfig{}.env_options().crawler.kd, 2.0);
  const ExperimentConfig overridden = parse_config("kp = 30\n");
  EXPECT_EQ(overridden.gains().kp, 30.0);
  EXPECT_EQ(overridden.gains().kd, 2.0);
  EXPECT_EQ(overridden.env_options().crawler.kp, 30.0);
  EXPECT_EQ(default_gains_for_task("Hopper-v4")->kp, 10.0);
  EXPECT_FALSE(default_gains_for_task("Nope-v0").has_value());
}

TEST(ExperimentConfig, JointCountMismatchIsAConfigError) {
  const ExperimentConfig c = parse_config("joint_count = 3\n");
  EXPECT_THROW((void)c.search_space(1), ConfigError);
  EXPECT_EQ(c.search_space(3).free_dimension(), 7u);
}

TEST(ExperimentConfig, CanonicalTextRoundTrips) {
  const std::vector<std::string> inputs{
      "",
      "env = \"purcell_swimmer\"\nvariant = \"no_phase\"\nseeds = [0, 1, 2]\n",
      "amplitude = [-0.5, 0.5]\nphase = 0\nkp = 3\nkd = 0.1\ntorque_limit = 2\nhorizon = 2.5\n"
      "restarts = true\nbudget = 12345\nbudget_multiplier = 0.25\noutput_dir = \"out dir\"\n",
      "env = \"external:Hopper-v4\"\nbridge_endpoint = \"python3 -u s.py --x 1\"\n"
      "bridge_actuation = \"position\"\njoint_position_index = 2\njoint_velocity_index = 5\n"
      "max_episode_steps = 100\nbridge_timeout = 0.5\n"};
  for (const std::string& text : inputs) {
    const ExperimentConfig c = parse_config(text);
    const std::string canonical = c.to_text();
    const ExperimentConfig back = parse_config(canonical);
    EXPECT_EQ(back.to_text(), canonical) << text;
    EXPECT_EQ(back.env, c.env);
    EXPECT_EQ(back.variant, c.variant);
    EXPECT_EQ(back.search_row().amplitude, c.search_row().amplitude);
    EXPECT_EQ(back.gains().kp, c.gains().kp);
    EXPECT_EQ(back.effective_budget(), c.effective_budget());
    EXPECT_EQ(back.env_options().bridge.endpoint, c.env_options().bridge.endpoint);
  }
}

TEST(ExperimentConfig, LoadsFromDisk) {
  const auto path = std::filesystem::temp_directory_path() / "openloop_config_test.cfg";
  std::ofstream(path) << "env = \"purcell_swimmer\"\npopulation = 8\n";
  const ExperimentConfig c = ExperimentConfig::load(path.string());
  std::filesystem::remove(path);
  EXPECT_EQ(c.population, 8u);
  EXPECT_THROW((void)ExperimentConfig::load(path.string()), ConfigError);
}

}  // namespace
}  // namespace openloop
