#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "ects/triggers.hpp"

namespace ects::triggers {

/// Candidate thresholds with a running loss estimate for each.
struct ThresholdState {
    std::vector<double> grid;
    std::vector<double> avg_loss;
    std::vector<std::int64_t> counts;
    /// 0 for the plain running mean, otherwise the exponential decay rate.
    double decay = 0.0;

    /// Index of the lowest estimate; ties go to the lowest index.
    std::size_t active_index() const;
    double active_threshold() const { return grid.at(active_index()); }
};

/// Loss of stopping `traj` with threshold `threshold` under `costs`.
double threshold_loss(const PosteriorTrajectory& traj, ClassId y_true, double threshold, const RealizedCosts& costs);

/// Offline fit: the mean loss of every grid threshold on the training cache.
ThresholdState fit_thresholds(const TrainingCache& cache, std::vector<double> grid, double decay);

/// Counterfactual update: every candidate's loss on the completed series.
void threshold_feedback(ThresholdState& state, const PosteriorTrajectory& traj, ClassId y_true,
                        const RealizedCosts& costs);

/// Trigger iff p_max(t) > threshold or t = T.
Action threshold_decide(double threshold, const PrefixView& prefix);

/// Refits the grid from scratch on the training cache under `true_costs`.
ThresholdState silver_refit(const TrainingCache& cache, const RealizedCosts& true_costs,
                            std::vector<double> grid = default_threshold_grid());

/// Proba-Threshold with three update behaviours: frozen (no_adapt), plain
/// running mean (threshold) and exponentially decayed mean (decay_threshold).
class ThresholdTrigger final : public TriggerModel {
public:
    enum class Variant { frozen, plain, decay };

    ThresholdTrigger(Variant variant, ThresholdState state);
    ThresholdTrigger(Variant variant, const TrainingCache& cache, double decay = 0.01,
                     std::vector<double> grid = default_threshold_grid());

    std::string name() const override;
    UpdateRegime update_regime() const override {
        return variant_ == Variant::frozen ? UpdateRegime::none : UpdateRegime::delayed;
    }
    FeedbackKind required_feedback() const override {
        return variant_ == Variant::frozen ? FeedbackKind::nothing : FeedbackKind::full_series_and_costs;
    }
    Action decide(const PrefixView& prefix, const EpisodePlan& plan, const DecisionContext& ctx) const override;
    void feedback(const FeedbackPacket& packet) override;
    void hash(StateHasher& h) const override;
    std::string snapshot() const override;
    std::unique_ptr<TriggerModel> clone() const override { return std::make_unique<ThresholdTrigger>(*this); }

    static std::unique_ptr<ThresholdTrigger> restore(std::string_view json);

    const ThresholdState& state() const { return state_; }
    Variant variant() const { return variant_; }

private:
    Variant variant_;
    ThresholdState state_;
};

/// Oracle baseline: the threshold refitted on the training cache under the
/// true costs of every deployment step. Not deployable in practice.
class SilverTrigger final : public TriggerModel {
public:
    explicit SilverTrigger(const TrainingCache& cache, std::vector<double> grid = default_threshold_grid());

    std::string name() const override { return "silver"; }
    UpdateRegime update_regime() const override { return UpdateRegime::none; }
    FeedbackKind required_feedback() const override { return FeedbackKind::explicit_cost_spec; }
    bool needs_true_costs() const override { return true; }
    /// Needs ctx.true_costs; picks the grid threshold minimizing training AvgCost.
    EpisodePlan plan(const DecisionContext& ctx) const override;
    Action decide(const PrefixView& prefix, const EpisodePlan& plan, const DecisionContext& ctx) const override;
    void feedback(const FeedbackPacket&) override {}
    void hash(StateHasher& h) const override;
    std::string snapshot() const override;
    std::unique_ptr<TriggerModel> clone() const override { return std::make_unique<SilverTrigger>(*this); }

    static std::unique_ptr<SilverTrigger> restore(std::string_view json);

    /// Mean training loss of each grid threshold under `costs`.
    std::vector<double> grid_losses(const RealizedCosts& costs) const;
    const std::vector<double>& grid() const { return grid_; }

private:
    SilverTrigger() = default;

    std::vector<double> grid_;
    int n_classes_ = 0;
    int T_ = 0;
    double n_series_ = 0.0;
    /// Per threshold: K x K (true, predicted) counts and mean t_hat / T.
    std::vector<std::vector<double>> confusion_;
    std::vector<double> mean_delay_;
};

}  // namespace ects::triggers
