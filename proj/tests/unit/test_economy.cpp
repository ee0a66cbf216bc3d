#include <gtest/gtest.h>

#include <functional>

#include "ects/economy.hpp"
#include "ects/registry.hpp"
#include "test_support.hpp"

namespace ects::triggers {
namespace {

TEST(EconomyFit, ConfidentClassifierFillsTopBin) {
    harness::ExperimentData d;
    for (int i = 0; i < 30; ++i) {
        d.train.push_back(test::make_trajectory(3, std::vector<double>(6, 1.0), i % 3));
        d.train_labels.push_back(i % 3);
    }
    EconomyConfig cfg;
    cfg.n_bins = 4;
    cfg.smoothing = 0.0;
    const auto s = economy_fit(test::make_cache(d, RealizedCosts::zero_one(3, 6, 0.8)), cfg);
    for (int t = 1; t <= 6; ++t) {
        EXPECT_EQ(s.bin_of(t, 1.0), 3);
        const auto& joint = s.joint(t, 3);
        for (int y = 0; y < 3; ++y) {
            for (int k = 0; k < 3; ++k) EXPECT_NEAR(joint[static_cast<std::size_t>(y * 3 + k)], y == k ? 1.0 / 3.0 : 0.0, 1e-15);
        }
        if (t < 6) {
            EXPECT_EQ(s.transition(t, 3, 3), 1.0);
        }
    }
}

TEST(EconomyFit, IndependentConfidenceGivesFlatTransitions) {
    Rng rng = make_rng(11);
    harness::ExperimentData d;
    for (int i = 0; i < 5000; ++i) {
        d.train.push_back(test::random_trajectory(4, 3, rng));
        d.train_labels.push_back(i % 3);
    }
    EconomyConfig cfg;
    cfg.n_bins = 2;
    const auto s = economy_fit(test::make_cache(d, RealizedCosts::zero_one(3, 4, 0.8)), cfg);
    for (int t = 1; t < 4; ++t) {
        for (int a = 0; a < 2; ++a) {
            EXPECT_NEAR(s.transition(t, a, 0) + s.transition(t, a, 1), 1.0, 1e-12);
            for (int b = 0; b < 2; ++b) EXPECT_NEAR(s.transition(t, a, b), 0.5, 0.05);
        }
    }
}

TEST(EconomyFit, SingleBinCostIsErrorRate) {
    const auto d = test::fixture_data(60, 1, 1, 8, 3, 12);
    EconomyConfig cfg;
    cfg.n_bins = 1;
    cfg.smoothing = 0.0;
    const auto nominal = RealizedCosts::zero_one(3, 8, 0.8);
    const auto s = economy_fit(test::make_cache(d, nominal), cfg);
    const auto c = economy_bin_costs(s, nominal);
    for (int t = 1; t <= 8; ++t) {
        double errors = 0.0;
        for (std::size_t i = 0; i < d.train.size(); ++i) errors += d.train[i].predicted(t) == d.train_labels[i] ? 0.0 : 1.0;
        EXPECT_NEAR(c[static_cast<std::size_t>(t - 1)], errors / 60.0, 1e-12);
    }
}

TEST(EconomyFit, TooFewSeriesForBins) {
    const auto d = test::fixture_data(3, 1, 1, 5, 3, 1);
    EconomyConfig cfg;
    cfg.n_bins = 4;
    EXPECT_THROW(economy_fit(test::make_cache(d, RealizedCosts::zero_one(3, 5, 0.8)), cfg), ContractError);
}

/// Two bins split at 0.5, K = 2, T = 3, with hand-chosen probabilities.
EconomyState hand_state() {
    EconomyState s;
    s.T = 3;
    s.n_classes = 2;
    s.n_bins = 2;
    s.edges = {{0.5}, {0.5}, {0.5}};
    s.transitions = {{0.7, 0.3, 0.2, 0.8}, {0.9, 0.1, 0.4, 0.6}};
    s.confusion = {
        {{0.3, 0.2, 0.2, 0.3}, {0.45, 0.05, 0.05, 0.45}},
        {{0.35, 0.15, 0.15, 0.35}, {0.48, 0.02, 0.02, 0.48}},
        {{0.4, 0.1, 0.1, 0.4}, {0.5, 0.0, 0.0, 0.5}},
    };
    return s;
}

RealizedCosts hand_spec() {
    auto c = RealizedCosts::zero_one(2, 3, 0.5, Weighting::unweighted);
    c.matrix = {0.0, 2.0, 1.0, 0.0};
    return c;
}

/// Enumerates every bin path from (t, bin) to tau and sums path probability times cost.
double brute_force_cost(const EconomyState& s, const RealizedCosts& spec, int t, int bin, int tau) {
    double total = 0.0;
    std::function<void(int, int, double)> walk = [&](int now, int g, double prob) {
        if (now == tau) {
            const auto& j = s.joint(now, g);
            double mis = 0.0;
            for (int y = 0; y < 2; ++y) {
                for (int k = 0; k < 2; ++k) mis += j[static_cast<std::size_t>(y * 2 + k)] * spec.misclassification(k, y);
            }
            total += prob * mis;
            return;
        }
        for (int next = 0; next < 2; ++next) walk(now + 1, next, prob * s.transition(now, g, next));
    };
    walk(t, bin, 1.0);
    return total + spec.delay(tau, s.T);
}

TEST(EconomyExpected, MatchesPathEnumeration) {
    const auto s = hand_state();
    const auto spec = hand_spec();
    for (int t = 1; t <= 3; ++t) {
        for (int g = 0; g < 2; ++g) {
            const auto costs = economy_expected_costs(s, t, g, spec);
            ASSERT_EQ(costs.size(), static_cast<std::size_t>(3 - t + 1));
            for (int tau = t; tau <= 3; ++tau) {
                EXPECT_NEAR(costs[static_cast<std::size_t>(tau - t)], brute_force_cost(s, spec, t, g, tau), 1e-12)
                    << t << " " << g << " " << tau;
            }
        }
    }
    // Decision: trigger iff the cost now is no larger than every later one.
    for (double p : {0.3, 0.9}) {
        const auto traj = test::make_trajectory(2, {p, p, p}, 0);
        for (int t = 1; t < 3; ++t) {
            const int g = p > 0.5 ? 1 : 0;
            double later = 1e300;
            for (int tau = t + 1; tau <= 3; ++tau) later = std::min(later, brute_force_cost(s, spec, t, g, tau));
            const auto expected = brute_force_cost(s, spec, t, g, t) <= later ? Action::trigger : Action::wait;
            EXPECT_EQ(economy_decide(s, PrefixView(traj, t), spec), expected) << p << " " << t;
        }
    }
}

TEST(EconomyDecide, NoImprovementMeansImmediateTrigger) {
    auto s = hand_state();
    s.transitions = {{1.0, 0.0, 0.0, 1.0}, {1.0, 0.0, 0.0, 1.0}};
    for (auto& per_bin : s.confusion) {
        for (auto& m : per_bin) m = {0.5, 0.0, 0.0, 0.5};
    }
    const auto traj = test::make_trajectory(2, {0.9, 0.9, 0.9}, 1);
    EXPECT_EQ(run_episode(EconomyTrigger(s, hand_spec()), traj, {}).t_hat, 1);
    // Delay-only weighting behaves the same on the original state.
    EXPECT_EQ(run_episode(EconomyTrigger(hand_state(), RealizedCosts::zero_one(2, 3, 0.0)), traj, {}).t_hat, 1);
}

TEST(EconomyTrigger, FeedbackReplacesCostSpec) {
    const auto d = test::fixture_data(60, 2, 5, 10, 3, 13);
    EconomyTrigger e(test::make_cache(d, RealizedCosts::zero_one(3, 10, 1.0)));
    EXPECT_EQ(e.required_feedback(), FeedbackKind::explicit_cost_spec);

    FeedbackPacket missing;
    EXPECT_THROW(e.feedback(missing), ContractError);
    const auto wrong_shape = RealizedCosts::zero_one(4, 10, 0.5);
    FeedbackPacket bad;
    bad.cost_spec = &wrong_shape;
    EXPECT_THROW(e.feedback(bad), ContractError);

    const auto delay_only = RealizedCosts::zero_one(3, 10, 0.0);
    FeedbackPacket p;
    p.cost_spec = &delay_only;
    e.feedback(p);
    EXPECT_EQ(e.cost_spec().alpha, 0.0);
    for (const auto& traj : d.holdout) EXPECT_EQ(run_episode(e, traj, {}).t_hat, 1);

    const auto restored = restore_trigger(e.snapshot());
    EXPECT_EQ(restored->name(), "economy");
    EXPECT_EQ(restored->state_hash(), e.state_hash());
}

}  // namespace
}  // namespace ects::triggers
