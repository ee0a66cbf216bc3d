#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ects/costs.hpp"

namespace ects::costs {
namespace {

TEST(Scenario, NamesRoundTrip) {
    for (auto s : {Scenario::none, Scenario::ac_d, Scenario::pv_d, Scenario::ac_s, Scenario::pv_s}) {
        EXPECT_EQ(parse_scenario(to_string(s)), s);
    }
    EXPECT_THROW(parse_scenario("AC_D"), ConfigError);
}

TEST(AlphaAt, AbruptDriftIsConstant) {
    const auto s = CostSchedule::make(Scenario::ac_d, 10000, 10, 40);
    EXPECT_EQ(s.train_alpha, 0.8);
    for (std::int64_t u : {0, 1, 2500, 5000, 9999}) EXPECT_EQ(alpha_at(s, u), 0.4);
}

TEST(AlphaAt, PeriodicTriangle) {
    const auto s = CostSchedule::make(Scenario::pv_d, 10000, 10, 40);
    EXPECT_EQ(alpha_at(s, 0), 1.0);
    EXPECT_NEAR(alpha_at(s, 2500), 0.55, 1e-15);
    EXPECT_EQ(alpha_at(s, 5000), 0.1);
    EXPECT_NEAR(alpha_at(s, 7500), 0.55, 1e-15);
    EXPECT_EQ(periodic_value(PeriodicShape::triangle, 1.0, 0.1, 1.0), 1.0);
    EXPECT_EQ(periodic_value(PeriodicShape::cosine, 1.0, 0.1, 1.0), 1.0);
    EXPECT_NEAR(periodic_value(PeriodicShape::cosine, 1.0, 0.1, 0.5), 0.1, 1e-15);
}

TEST(AlphaAt, NoneKeepsTrainingAlpha) {
    const auto s = CostSchedule::make(Scenario::none, 100, 10, 40);
    for (std::int64_t u : {0, 50, 99}) EXPECT_EQ(alpha_at(s, u), 0.8);
    EXPECT_THROW(alpha_at(s, 100), ContractError);
    EXPECT_THROW(alpha_at(s, -1), ContractError);
}

TEST(SigmaAt, StochasticSchedules) {
    const auto ac = CostSchedule::make(Scenario::ac_s, 1000, 10, 40);
    EXPECT_EQ(sigma_at(ac, 0), 5.0);
    EXPECT_EQ(sigma_at(ac, 999), 5.0);
    const auto pv = CostSchedule::make(Scenario::pv_s, 1000, 10, 40);
    EXPECT_EQ(sigma_at(pv, 0), 0.25);
    EXPECT_EQ(sigma_at(pv, 500), 10.0);
    EXPECT_THROW(sigma_at(CostSchedule::make(Scenario::ac_d, 10, 10, 40), 0), ContractError);
}

TEST(Realize, DriftCostsAreZeroOne) {
    const auto s = CostSchedule::make(Scenario::pv_d, 100, 4, 10);
    Rng rng = make_rng(1);
    const Rng before = rng;
    const auto c = realize(s, 25, 2, rng);
    EXPECT_EQ(rng, before);  // drift scenarios draw nothing
    EXPECT_EQ(c.mode, Weighting::weighted);
    EXPECT_DOUBLE_EQ(c.alpha, alpha_at(s, 25));
    for (int y = 0; y < 4; ++y) {
        for (int k = 0; k < 4; ++k) EXPECT_EQ(c.misclassification(k, y), y == k ? 0.0 : 1.0);
    }
    EXPECT_DOUBLE_EQ(c.delay(5, 10), 0.5);
}

TEST(Realize, StochasticRowsShareOneDraw) {
    const auto s = CostSchedule::make(Scenario::ac_s, 100, 10, 40);
    Rng rng = make_rng(2);
    const auto c = realize(s, 3, 0, rng);
    EXPECT_EQ(c.mode, Weighting::unweighted);
    for (int k = 1; k < 10; ++k) EXPECT_EQ(c.misclassification(k, 0), 1.0);
    const double draw = c.misclassification(0, 1);
    for (int y : {1, 4, 7}) {
        for (int k = 0; k < 10; ++k) EXPECT_EQ(c.misclassification(k, y), k == y ? 0.0 : draw);
    }
    for (int y : {2, 3, 5}) EXPECT_EQ(c.misclassification((y + 1) % 10, y), 1.0);
}

TEST(Realize, DeterministicForSameStream) {
    const auto s = CostSchedule::make(Scenario::pv_s, 100, 10, 40);
    Rng a = make_rng(3, 2);
    Rng b = make_rng(3, 2);
    for (std::int64_t u = 0; u < 100; ++u) EXPECT_EQ(realize(s, u, 1, a).matrix, realize(s, u, 1, b).matrix);
}

TEST(LogNormal, ClipsLargeDraws) {
    // mu = ln 1 + 1 = 1, so z = 10 gives e^11 before clipping.
    EXPECT_EQ(lognormal_from_normal(1.0, 1.0, 10.0), 500.0);
    EXPECT_DOUBLE_EQ(lognormal_from_normal(1.0, 1.0, -1.0), 1.0);
    EXPECT_THROW(lognormal_from_normal(0.0, 1.0, 0.0), ContractError);
    EXPECT_THROW(lognormal_from_normal(1.0, 0.0, 0.0), ContractError);
}

TEST(LogNormal, DegenerateShape) {
    Rng rng = make_rng(4);
    for (int i = 0; i < 1000; ++i) EXPECT_NEAR(lognormal_mode_shape(1.0, 1e-6, rng), 1.0, 1e-4);
}

TEST(LogNormal, EmpiricalModeNearOne) {
    // Equal-width bins aligned on [0.8, 1.25); the densest bin holds the mode.
    Rng rng = make_rng(5);
    const double width = 0.45;
    const double origin = 0.8 - width;  // bin 1 is [0.8, 1.25)
    std::vector<int> hist(40, 0);
    for (int i = 0; i < 1'000'000; ++i) {
        const double x = lognormal_mode_shape(1.0, 1.0, rng);
        const double b = std::floor((x - origin) / width);
        if (b >= 0 && b < 40) ++hist[static_cast<std::size_t>(b)];
    }
    const auto mode_bin = std::max_element(hist.begin(), hist.end()) - hist.begin();
    EXPECT_EQ(mode_bin, 1);
}

TEST(LogNormal, LargeShapeSaturates) {
    Rng rng = make_rng(6);
    int clipped = 0;
    const int n = 200'000;
    for (int i = 0; i < n; ++i) clipped += lognormal_mode_shape(1.0, 5.0, rng) == 500.0 ? 1 : 0;
    EXPECT_GE(static_cast<double>(clipped) / n, 0.999);
    // Closed form: P(not clipped) = Phi((ln 500 - 25) / 5).
    const double tail = 0.5 * std::erfc(-((std::log(500.0) - 25.0) / 5.0) / std::numbers::sqrt2);
    EXPECT_LT(tail, 1e-4);
}

TEST(LogNormal, ClippedMeanMatchesMonteCarlo) {
    Rng rng = make_rng(7);
    for (double sigma : {0.25, 1.0, 2.0}) {
        double sum = 0.0;
        const int n = 400'000;
        for (int i = 0; i < n; ++i) sum += lognormal_mode_shape(1.0, sigma, rng);
        const double mc = sum / n;
        EXPECT_NEAR(clipped_lognormal_mean(1.0, sigma, 0.0, 500.0), mc, 0.02 * mc + 1e-3) << sigma;
    }
    EXPECT_NEAR(clipped_lognormal_mean(1.0, 10.0, 0.0, 500.0), 500.0, 1e-6);
}

TEST(MaxLoss, Examples) {
    EXPECT_DOUBLE_EQ(max_loss(RealizedCosts::zero_one(10, 40, 0.4)), 1.0);
    EXPECT_DOUBLE_EQ(max_loss(RealizedCosts::zero_one(10, 40, 0.8)), 1.0);
    auto s = RealizedCosts::zero_one(10, 40, 0.5, Weighting::unweighted);
    s.matrix[1 * 10 + 0] = 500.0;
    EXPECT_DOUBLE_EQ(max_loss(s), 501.0);
}

TEST(Expected, ReplacesDrawByClippedMean) {
    const auto s = CostSchedule::make(Scenario::ac_s, 10, 10, 40);
    const auto e = expected(s, 0);
    EXPECT_DOUBLE_EQ(e.misclassification(0, 4), clipped_lognormal_mean(1.0, 5.0, 0.0, 500.0));
    EXPECT_EQ(e.misclassification(1, 0), 1.0);
}

TEST(Schedule, Validation) {
    auto s = CostSchedule::make(Scenario::ac_s, 10, 10, 40);
    s.clip_lo = 600.0;
    EXPECT_THROW(s.validate(), ConfigError);
    s = CostSchedule::make(Scenario::ac_s, 10, 10, 40);
    s.noisy_classes = {12};
    EXPECT_THROW(s.validate(), ConfigError);
    EXPECT_THROW(CostSchedule::make(Scenario::none, 0, 10, 40), ConfigError);
}

TEST(Nominal, TrainingCosts) {
    EXPECT_EQ(CostSchedule::make(Scenario::ac_d, 10, 10, 40).nominal().alpha, 0.8);
    EXPECT_EQ(CostSchedule::make(Scenario::pv_d, 10, 10, 40).nominal().alpha, 1.0);
    const auto n = CostSchedule::make(Scenario::ac_s, 10, 10, 40).nominal();
    EXPECT_EQ(n.mode, Weighting::unweighted);
    EXPECT_EQ(n.misclassification(0, 4), 1.0);
}

}  // namespace
}  // namespace ects::costs
