#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ects/core.hpp"
#include "ects/harness.hpp"
#include "ects/rng.hpp"
#include "ects/triggers.hpp"

namespace ects::test {

/// Row with `p_max` on class `top` and the rest spread evenly.
inline std::vector<double> peaked_row(int K, ClassId top, double p_max) {
    std::vector<double> row(static_cast<std::size_t>(K), (1.0 - p_max) / (K - 1));
    row[static_cast<std::size_t>(top)] = p_max;
    return row;
}

/// Trajectory whose row t has maximum p_max[t-1] on class top[t-1].
inline PosteriorTrajectory make_trajectory(int K, const std::vector<double>& p_max, const std::vector<ClassId>& top) {
    const int T = static_cast<int>(p_max.size());
    PosteriorTrajectory traj(T, K);
    for (int t = 1; t <= T; ++t) {
        const auto row = peaked_row(K, top[static_cast<std::size_t>(t - 1)], p_max[static_cast<std::size_t>(t - 1)]);
        std::copy(row.begin(), row.end(), traj.mutable_row(t).begin());
    }
    return traj;
}

/// Same predicted class at every t.
inline PosteriorTrajectory make_trajectory(int K, const std::vector<double>& p_max, ClassId top) {
    return make_trajectory(K, p_max, std::vector<ClassId>(p_max.size(), top));
}

/// Dirichlet(1)-like random rows.
inline PosteriorTrajectory random_trajectory(int T, int K, Rng& rng) {
    PosteriorTrajectory traj(T, K);
    for (int t = 1; t <= T; ++t) {
        auto row = traj.mutable_row(t);
        double sum = 0.0;
        for (double& v : row) {
            v = -std::log(1.0 - uniform01(rng));
            sum += v;
        }
        for (double& v : row) v /= sum;
    }
    return traj;
}

/// Trajectories whose confidence in the true class grows with t, so later
/// decisions are more accurate: a small but realistic ECTS fixture.
struct Fixture {
    std::vector<PosteriorTrajectory> trajectories;
    std::vector<ClassId> labels;
};

inline Fixture growing_confidence(std::size_t n, int T, int K, std::uint64_t seed) {
    Rng rng = make_rng(seed, 77);
    Fixture f;
    for (std::size_t i = 0; i < n; ++i) {
        const auto y = static_cast<ClassId>(i % static_cast<std::size_t>(K));
        const int reveal = static_cast<int>(uniform_int(rng, 1, T));
        std::vector<double> p(static_cast<std::size_t>(T));
        std::vector<ClassId> top(static_cast<std::size_t>(T));
        const auto wrong = static_cast<ClassId>((y + 1 + uniform_int(rng, 0, K - 2)) % K);
        for (int t = 1; t <= T; ++t) {
            const bool known = t >= reveal;
            top[static_cast<std::size_t>(t - 1)] = known ? y : wrong;
            p[static_cast<std::size_t>(t - 1)] =
                known ? std::min(0.99, 0.5 + 0.5 * (t - reveal + 1) / T) : 0.2 + 0.3 * uniform01(rng);
        }
        f.trajectories.push_back(make_trajectory(K, p, top));
        f.labels.push_back(y);
    }
    return f;
}

/// ExperimentData built from three growing-confidence fixtures.
inline harness::ExperimentData fixture_data(std::size_t n_train, std::size_t n_deploy, std::size_t n_holdout, int T,
                                            int K, std::uint64_t seed) {
    auto a = growing_confidence(n_train, T, K, seed);
    auto b = growing_confidence(n_deploy, T, K, seed + 1);
    auto c = growing_confidence(n_holdout, T, K, seed + 2);
    harness::ExperimentData d;
    d.T = T;
    d.n_classes = K;
    d.train = std::move(a.trajectories);
    d.train_labels = std::move(a.labels);
    d.deploy = std::move(b.trajectories);
    d.deploy_labels = std::move(b.labels);
    d.holdout = std::move(c.trajectories);
    d.holdout_labels = std::move(c.labels);
    return d;
}

inline triggers::TrainingCache make_cache(const harness::ExperimentData& d, RealizedCosts nominal) {
    return {d.train, d.train_labels, std::move(nominal)};
}

}  // namespace ects::test
