#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace ects::cli {
namespace {

namespace fs = std::filesystem;

int invoke(std::vector<std::string> args, std::string* out_text = nullptr) {
    args.insert(args.begin(), "ects");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    return code;
}

fs::path scratch_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("ects_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(invoke({"--help"}), kExitOk);
    EXPECT_EQ(invoke({"run", "--no-such-flag"}), kExitUsage);
    EXPECT_EQ(invoke({"run", "--trigger", "bogus"}), kExitUsage);
    EXPECT_EQ(invoke({"run", "--set", "batchsize=3"}), kExitUsage);
    EXPECT_EQ(invoke({"run", "--data-dir", "/nonexistent/ects"}), kExitIo);
    EXPECT_EQ(invoke({"run", "--config", "/nonexistent/ects.cfg"}), kExitIo);
}

TEST(Cli, GenerateThenRunWritesOutputs) {
    const auto data = scratch_dir("data");
    const auto out = scratch_dir("out");
    std::string text;
    ASSERT_EQ(invoke({"generate", "--n", "120", "--T", "20", "--out-dir", data.string()}, &text), kExitOk);
    for (const char* f : {"train_posteriors.csv", "deploy_posteriors.csv", "holdout_posteriors.csv", "config.json"}) {
        EXPECT_TRUE(fs::exists(data / f)) << f;
    }
    ASSERT_EQ(invoke({"run", "--data-dir", data.string(), "--scenario", "ac_d", "--trigger", "decay_threshold",
                      "--batch-size", "8", "--no-timing", "--out-dir", out.string()}),
              kExitOk);
    for (const char* f : {"steps.csv", "holdout.csv", "config.json"}) EXPECT_TRUE(fs::exists(out / f)) << f;
    std::ifstream steps(out / "steps.csv");
    std::string header;
    std::getline(steps, header);
    EXPECT_EQ(header, "u,trigger,scenario,seed,t_hat,y_hat,y_true,realized_total,oracle_total,regret_cum,infer_ms,update_ms");
    int rows = 0;
    for (std::string line; std::getline(steps, line);) ++rows;
    EXPECT_EQ(rows, 60);  // half of the series are deployed
    fs::remove_all(data);
    fs::remove_all(out);
}

}  // namespace
}  // namespace ects::cli
