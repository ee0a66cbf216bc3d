#include <gtest/gtest.h>

#include <json.hpp>

#include <algorithm>
#include <sstream>

#include "ects/config.hpp"

namespace ects::harness {
namespace {

TEST(Config, ParsesKeyValueLinesWithComments) {
    ExperimentConfig c;
    std::istringstream in(
        "# experiment\n"
        "\n"
        "scenario = pv_d   # periodic drift\n"
        "trigger=alert\n"
        "  batch_size =  8\n"
        "alert_epsilon = 0.05\n"
        "debug_hash = yes\n"
        "noisy_classes = 0,2\n"
        "pv_shape = cosine\n");
    apply_config_text(c, in);
    EXPECT_EQ(c.run.scenario, costs::Scenario::pv_d);
    EXPECT_EQ(c.run.trigger, "alert");
    EXPECT_EQ(c.run.batch_size, 8);
    EXPECT_DOUBLE_EQ(c.run.params.alert.epsilon, 0.05);
    EXPECT_TRUE(c.run.debug_hash);
    EXPECT_EQ(c.run.costs.noisy_classes, (std::vector<int>{0, 2}));
    EXPECT_EQ(c.run.costs.shape, costs::PeriodicShape::cosine);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    ExperimentConfig c;
    EXPECT_THROW(apply_setting(c, "batchsize", "4"), ConfigError);
    EXPECT_THROW(apply_setting(c, "batch_size", "four"), ConfigError);
    EXPECT_THROW(apply_setting(c, "batch_size", "4.5"), ConfigError);
    EXPECT_THROW(apply_setting(c, "noise_std", "0.1x"), ConfigError);
    EXPECT_THROW(apply_setting(c, "debug_hash", "maybe"), ConfigError);
    EXPECT_THROW(apply_setting(c, "trigger", "bogus"), ConfigError);
    EXPECT_THROW(apply_setting(c, "scenario", "AC_D"), ConfigError);
    std::istringstream no_equals("batch_size 4\n");
    EXPECT_THROW(apply_config_text(c, no_equals), ConfigError);
    EXPECT_THROW(apply_config_file(c, "/nonexistent/ects.cfg"), std::ios_base::failure);
}

TEST(Config, DataSeedDefaultsToRunSeed) {
    ExperimentConfig c;
    apply_setting(c, "seed", "7");
    EXPECT_EQ(c.resolved_data().generator.seed, 7u);
    apply_setting(c, "data_seed", "3");
    EXPECT_EQ(c.resolved_data().generator.seed, 3u);
    EXPECT_EQ(c.resolved_data().classifier.seed, 3u);
}

TEST(Config, JsonListsEveryKey) {
    ExperimentConfig c;
    apply_setting(c, "n_series", "123");
    const auto j = nlohmann::json::parse(to_json(c));
    for (const auto& k : config_keys()) EXPECT_TRUE(j.contains(k)) << k;
    EXPECT_EQ(j.at("n_series").get<int>(), 123);
    const auto keys = config_keys();
    EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
}

}  // namespace
}  // namespace ects::harness
