#include <gtest/gtest.h>

#include "ects/alert.hpp"
#include "ects/registry.hpp"
#include "test_support.hpp"

namespace ects::triggers {
namespace {

/// Q-network with constant outputs (q_wait, q_trigger).
nn::Mlp constant_q(double q_wait, double q_trigger) {
    nn::Mlp net(kFeatureCount, 1, 2, 0);
    net.set_parameters(std::vector<double>(net.parameter_count(), 0.0));
    net.b2()(0) = q_wait;
    net.b2()(1) = q_trigger;
    return net;
}

AlertConfig with_epsilon(double eps) {
    AlertConfig c;
    c.epsilon = eps;
    return c;
}

TEST(AlertDecide, GreedyPicksLargerQ) {
    const auto traj = test::make_trajectory(3, std::vector<double>(5, 0.5), 0);
    const AlertTrigger a(constant_q(0.2, 0.5), with_epsilon(0.0));
    Rng rng = make_rng(1);
    DecisionContext ctx;
    ctx.explore = true;
    ctx.rng = &rng;
    EXPECT_EQ(a.decide(PrefixView(traj, 1), {}, ctx), Action::trigger);
    EXPECT_EQ(AlertTrigger(constant_q(0.5, 0.2), with_epsilon(0.0)).decide(PrefixView(traj, 1), {}, ctx), Action::wait);
    const auto q = a.q_values(generate_features(PrefixView(traj, 1), 1));
    EXPECT_DOUBLE_EQ(q[0], 0.2);
    EXPECT_DOUBLE_EQ(q[1], 0.5);
}

TEST(AlertDecide, FullExplorationIsAFairCoin) {
    const auto traj = test::make_trajectory(3, std::vector<double>(5, 0.5), 0);
    const AlertTrigger a(constant_q(1.0, 0.0), with_epsilon(1.0));
    Rng rng = make_rng(2);
    DecisionContext ctx;
    ctx.explore = true;
    ctx.rng = &rng;
    int triggers = 0;
    const int n = 10'000;
    for (int i = 0; i < n; ++i) triggers += a.decide(PrefixView(traj, 2), {}, ctx) == Action::trigger ? 1 : 0;
    EXPECT_NEAR(static_cast<double>(triggers) / n, 0.5, 0.02);

    // Hold-out evaluation never explores, and exploration without a stream is an error.
    EXPECT_EQ(a.decide(PrefixView(traj, 2), {}, DecisionContext{}), Action::wait);
    DecisionContext no_rng;
    no_rng.explore = true;
    EXPECT_THROW(a.decide(PrefixView(traj, 2), {}, no_rng), ContractError);
}

TEST(AlertDecide, DeadlineAlwaysTriggers) {
    const auto traj = test::make_trajectory(3, std::vector<double>(5, 0.5), 0);
    const AlertTrigger a(constant_q(1.0, 0.0), with_epsilon(1.0));
    Rng rng = make_rng(3);
    DecisionContext ctx;
    ctx.explore = true;
    ctx.rng = &rng;
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.decide(PrefixView(traj, 5), {}, ctx), Action::trigger);
    EXPECT_EQ(run_episode(a, traj, {}).t_hat, 5);
}

std::vector<Action> waits_then_trigger(int t_hat) {
    std::vector<Action> a(static_cast<std::size_t>(t_hat), Action::wait);
    a.back() = Action::trigger;
    return a;
}

TEST(AlertTransitions, TerminalRewardIsNegativeLoss) {
    const auto traj = test::make_trajectory(3, std::vector<double>(40, 0.5), 1);
    // Wrong prediction at t = 10 under alpha = 0.4: 0.4 + 0.6 * 10 / 40.
    const double loss = compute_loss(1, 0, 10, RealizedCosts::zero_one(3, 40, 0.4)).total;
    EXPECT_NEAR(loss, 0.55, 1e-15);
    const auto tr = alert_transitions(PrefixView(traj, 10), waits_then_trigger(10), loss);
    ASSERT_EQ(tr.size(), 10u);
    EXPECT_TRUE(tr.back().terminal);
    EXPECT_EQ(tr.back().action, Action::trigger);
    EXPECT_DOUBLE_EQ(tr.back().reward, -0.55);
    for (std::size_t i = 0; i + 1 < tr.size(); ++i) {
        EXPECT_EQ(tr[i].reward, 0.0);
        EXPECT_FALSE(tr[i].terminal);
        EXPECT_EQ(tr[i].next, tr[i + 1].state);
    }
    EXPECT_THROW(alert_transitions(PrefixView(traj, 10), std::vector<Action>(10, Action::wait), loss), ContractError);
    EXPECT_THROW(alert_transitions(PrefixView(traj, 5), waits_then_trigger(10), loss), ContractError);
}

TEST(AlertTransitions, UndiscountedReturnOfForcedDeadline) {
    const int T = 8;
    const auto traj = test::make_trajectory(3, std::vector<double>(T, 0.4), 2);
    const double L = compute_loss(2, 2, T, RealizedCosts::zero_one(3, T, 0.8)).total;
    const auto tr = alert_transitions(PrefixView(traj, T), waits_then_trigger(T), L);
    double ret = 0.0;
    double discount = 1.0;  // gamma = 1
    for (const auto& step : tr) {
        ret += discount * step.reward;
        discount *= 1.0;
    }
    EXPECT_DOUBLE_EQ(ret, -L);
    EXPECT_DOUBLE_EQ(L, 0.2);
}

TEST(AlertTraining, TdLossDecreases) {
    const auto traj = test::make_trajectory(3, {0.4, 0.5, 0.6, 0.7, 0.8}, 0);
    AlertConfig cfg;
    cfg.hidden = 16;
    cfg.adam.learning_rate = 1e-2;
    AlertTrigger a(nn::Mlp(kFeatureCount, 16, 2, 4, cfg.adam), cfg);
    // Terminal-only transition: its target does not move with the network.
    const auto tr = alert_transitions(PrefixView(traj, 3), {Action::trigger}, 0.7);
    std::vector<Transition> terminal{tr.back()};
    const double first = a.train_on(terminal);
    double last = first;
    for (int i = 0; i < 50; ++i) last = a.train_on(terminal);
    EXPECT_LT(last, 0.1 * first);
    EXPECT_NEAR(a.q_values(tr.back().state)[1], -0.7, 0.05);
}

TEST(AlertTrigger, FeedbackAndSnapshot) {
    const auto data = test::fixture_data(30, 3, 3, 10, 3, 5);
    AlertConfig cfg;
    cfg.hidden = 16;
    AlertTrigger a(test::make_cache(data, RealizedCosts::zero_one(3, 10, 0.8)), cfg, 7);
    Rng rng = make_rng(8);
    DecisionContext ctx;
    ctx.explore = true;
    ctx.rng = &rng;
    const auto ep = run_episode(a, data.deploy[0], ctx);
    const auto before = a.state_hash();
    FeedbackPacket p;
    p.episode = &ep;
    p.prefix_source = &data.deploy[0];
    p.realized_loss = 0.3;
    a.feedback(p);
    EXPECT_NE(a.state_hash(), before);

    FeedbackPacket missing;
    missing.episode = &ep;
    missing.prefix_source = &data.deploy[0];
    EXPECT_THROW(a.feedback(missing), ContractError);

    const auto restored = restore_trigger(a.snapshot());
    EXPECT_EQ(restored->name(), "alert");
    EXPECT_EQ(restored->state_hash(), a.state_hash());
    for (const auto& traj : data.holdout) EXPECT_EQ(run_episode(*restored, traj, {}).t_hat, run_episode(a, traj, {}).t_hat);
}

TEST(AlertTrigger, InvalidConfiguration) {
    EXPECT_THROW(AlertTrigger(constant_q(0, 0), with_epsilon(1.5)), ConfigError);
    EXPECT_THROW(AlertTrigger(nn::Mlp(kFeatureCount, 4, 1, 0), AlertConfig{}), ContractError);
}

}  // namespace
}  // namespace ects::triggers
