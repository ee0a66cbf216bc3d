#include <gtest/gtest.h>

#include <limits>

#include "ects/core.hpp"
#include "test_support.hpp"

namespace ects {
namespace {

TEST(ComputeLoss, WeightedWrongAtMidpoint) {
    const auto costs = RealizedCosts::zero_one(10, 40, 0.8);
    const auto l = compute_loss(3, 5, 20, costs);
    EXPECT_DOUBLE_EQ(l.misclassification, 1.0);
    EXPECT_DOUBLE_EQ(l.delay, 0.5);
    EXPECT_DOUBLE_EQ(l.total, 0.8 * 1.0 + 0.2 * 0.5);
    EXPECT_NEAR(l.total, 0.90, 1e-15);
}

TEST(ComputeLoss, WeightedCorrectAtDeadline) {
    const auto costs = RealizedCosts::zero_one(10, 40, 0.8);
    const auto l = compute_loss(5, 5, 40, costs);
    EXPECT_EQ(l.misclassification, 0.0);
    EXPECT_EQ(l.delay, 1.0);
    EXPECT_NEAR(l.total, 0.20, 1e-15);
}

TEST(ComputeLoss, UnweightedStochasticDraw) {
    auto costs = RealizedCosts::zero_one(10, 40, 0.5, Weighting::unweighted);
    for (int k = 0; k < 10; ++k) {
        if (k != 1) costs.matrix[1 * 10 + k] = 500.0;
    }
    const auto l = compute_loss(0, 1, 1, costs);
    EXPECT_DOUBLE_EQ(l.total, 500.025);
}

TEST(ComputeLoss, RejectsOutOfRangeTime) {
    const auto costs = RealizedCosts::zero_one(3, 10, 0.5);
    EXPECT_THROW(compute_loss(0, 0, 0, costs), ContractError);
    EXPECT_THROW(compute_loss(0, 0, 11, costs), ContractError);
}

TEST(ComputeLoss, AlphaEndpoints) {
    for (int t = 1; t <= 8; ++t) {
        const auto wrong1 = compute_loss(0, 1, t, RealizedCosts::zero_one(2, 8, 1.0));
        EXPECT_EQ(wrong1.total, wrong1.misclassification);
        const auto wrong0 = compute_loss(0, 1, t, RealizedCosts::zero_one(2, 8, 0.0));
        EXPECT_EQ(wrong0.total, wrong0.delay);
    }
}

TEST(ComputeLoss, MonotoneInTimeForFixedPrediction) {
    const auto costs = RealizedCosts::zero_one(4, 25, 0.3);
    double prev = -1.0;
    for (int t = 1; t <= 25; ++t) {
        const double total = compute_loss(2, 1, t, costs).total;
        EXPECT_GE(total, prev);
        prev = total;
    }
}

/// Costs where prediction k at any time costs matrix[0][k] and delay is free,
/// so a trajectory predicting classes 1, 2, 3 in turn has losses row 0[1..3].
RealizedCosts scripted_losses(std::vector<double> row0) {
    RealizedCosts c;
    c.n_classes = static_cast<int>(row0.size());
    c.T = c.n_classes - 1;
    c.matrix.assign(row0.size() * row0.size(), 0.0);
    std::copy(row0.begin(), row0.end(), c.matrix.begin());
    c.delay.scale = 0.0;
    c.mode = Weighting::unweighted;
    return c;
}

TEST(Oracle, PicksArgmin) {
    const auto costs = scripted_losses({0.0, 0.9, 0.7, 0.8});
    const auto traj = test::make_trajectory(4, {0.9, 0.9, 0.9}, std::vector<ClassId>{1, 2, 3});
    const auto r = oracle_decision(traj, 0, costs);
    EXPECT_EQ(r.t_star, 2);
    EXPECT_DOUBLE_EQ(r.loss.total, 0.7);
}

TEST(Oracle, EarliestOnTies) {
    const auto costs = scripted_losses({0.0, 0.5, 0.5, 0.5});
    const auto traj = test::make_trajectory(4, {0.9, 0.9, 0.9}, std::vector<ClassId>{1, 2, 3});
    EXPECT_EQ(oracle_decision(traj, 0, costs).t_star, 1);
}

TEST(Oracle, MatchesExhaustiveScanOnRandomInstances) {
    Rng rng = make_rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const int K = 3;
        const auto traj = test::random_trajectory(10, K, rng);
        auto costs = RealizedCosts::zero_one(K, 10, uniform01(rng));
        for (double& v : costs.matrix) v *= uniform01(rng) * 3.0;
        const ClassId y = static_cast<ClassId>(uniform_int(rng, 0, K - 1));

        // Independent scan: recompute each loss from the matrix directly.
        int best_t = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int t = 1; t <= 10; ++t) {
            const auto row = traj.row(t);
            const auto y_hat = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
            const double c = costs.matrix[static_cast<std::size_t>(y) * K + y_hat];
            const double total = costs.alpha * c + (1.0 - costs.alpha) * t / 10.0;
            if (total < best) {
                best = total;
                best_t = t;
            }
        }
        const auto r = oracle_decision(traj, y, costs);
        EXPECT_EQ(r.t_star, best_t);
        EXPECT_NEAR(r.loss.total, best, 1e-15);
    }
}

TEST(PosteriorTrajectory, ValidatesRows) {
    PosteriorTrajectory traj(2, 2, {0.5, 0.5, 0.3, 0.7});
    EXPECT_NO_THROW(traj.validate());
    EXPECT_EQ(traj.predicted(2), 1);
    EXPECT_DOUBLE_EQ(traj.max_prob(1), 0.5);
    EXPECT_EQ(traj.predicted(1), 0);  // tie goes to the lowest class
    PosteriorTrajectory bad(1, 2, {0.6, 0.6});
    EXPECT_THROW(bad.validate(), ContractError);
}

TEST(LabeledSeries, Validation) {
    LabeledSeries s{{1.0, 2.0, 3.0}, 1};
    EXPECT_NO_THROW(validate(s, 3, 2));
    EXPECT_THROW(validate(s, 4, 2), ContractError);
    EXPECT_THROW(validate(s, 3, 1), ContractError);
    s.values[1] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(validate(s, 3, 2), ContractError);
}

TEST(Argmax, TiesGoToLowestIndex) {
    const std::vector<double> v{1.0, 3.0, 3.0, 2.0};
    EXPECT_EQ(argmax(v), 1u);
    const std::vector<double> w{2.0, 1.0, 1.0};
    EXPECT_EQ(argmin(w), 1u);
}

}  // namespace
}  // namespace ects
