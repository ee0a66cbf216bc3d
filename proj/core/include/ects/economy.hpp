#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "ects/triggers.hpp"

namespace ects::triggers {

struct EconomyConfig {
    int n_bins = 5;
    /// Pseudo-count added to every cell of each (bin, t) confusion matrix.
    double smoothing = 1.0;
};

/// Cost-agnostic model of how confidence evolves and what it implies.
///
/// Time-indexed vectors hold entry t - 1 for t = 1..T.
struct EconomyState {
    int T = 0;
    int n_classes = 0;
    int n_bins = 0;
    /// n_bins - 1 nondecreasing interior quantile edges of p_max per t.
    std::vector<std::vector<double>> edges;
    /// n_bins x n_bins row-stochastic P(bin at t+1 | bin at t), row-major, for t = 1..T-1.
    std::vector<std::vector<double>> transitions;
    /// Joint P(y, y_hat | bin, t), K x K row-major (row = true class), per t then bin.
    std::vector<std::vector<std::vector<double>>> confusion;

    int bin_of(int t, double p_max) const;
    const std::vector<double>& joint(int t, int bin) const;
    double transition(int t, int from, int to) const;
};

EconomyState economy_fit(const TrainingCache& cache, EconomyConfig config = {});

/// Expected misclassification cost per (tau, bin) under `spec`, entry (tau - 1) * n_bins + bin.
std::vector<double> economy_bin_costs(const EconomyState& state, const RealizedCosts& spec);

/// Expected cost of deciding at each tau = t..T given bin `bin` at t.
/// `bin_costs` is economy_bin_costs(state, spec).
std::vector<double> economy_expected_costs(const EconomyState& state, int t, int bin, const RealizedCosts& spec,
                                           const std::vector<double>& bin_costs);
std::vector<double> economy_expected_costs(const EconomyState& state, int t, int bin, const RealizedCosts& spec);

/// Trigger iff the expected cost at t is no larger than at any later tau.
Action economy_decide(const EconomyState& state, const PrefixView& prefix, const RealizedCosts& spec,
                      const std::vector<double>& bin_costs);
Action economy_decide(const EconomyState& state, const PrefixView& prefix, const RealizedCosts& spec);

class EconomyTrigger final : public TriggerModel {
public:
    EconomyTrigger(const TrainingCache& cache, EconomyConfig config = {});
    EconomyTrigger(EconomyState state, RealizedCosts spec);

    std::string name() const override { return "economy"; }
    UpdateRegime update_regime() const override { return UpdateRegime::none; }
    FeedbackKind required_feedback() const override { return FeedbackKind::explicit_cost_spec; }
    Action decide(const PrefixView& prefix, const EpisodePlan& plan, const DecisionContext& ctx) const override;
    /// Replaces the cost specification used by subsequent decisions.
    void feedback(const FeedbackPacket& packet) override;
    void hash(StateHasher& h) const override;
    std::string snapshot() const override;
    std::unique_ptr<TriggerModel> clone() const override { return std::make_unique<EconomyTrigger>(*this); }

    static std::unique_ptr<EconomyTrigger> restore(std::string_view json);

    const EconomyState& state() const { return state_; }
    const RealizedCosts& cost_spec() const { return spec_; }

private:
    EconomyState state_;
    RealizedCosts spec_;
    /// Derived from state_ and spec_; not part of the learned state.
    std::vector<double> bin_costs_;
};

}  // namespace ects::triggers
