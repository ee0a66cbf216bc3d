#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "ects/nn.hpp"
#include "ects/triggers.hpp"

namespace ects::triggers {

/// Feature rows X'_t for t = from..to (inclusive), one row per time step.
nn::Matrix feature_matrix(const PrefixView& prefix, int from, int to);

struct CalimeraConfig {
    int hidden = 64;
    nn::AdamConfig adam;
    /// Cost of the current prediction under the true label, c(y_hat_t, y),
    /// instead of its expectation under the posterior.
    bool true_label_costs = false;
    /// Passes over the training cache before deployment.
    int pretrain_epochs = 3;
};

/// A_t for t = 1..T: misclassification cost of the argmax prediction at t
/// plus C_d(t), combined per the weighting mode.
std::vector<double> calimera_costs(const PosteriorTrajectory& traj, ClassId y_true, const RealizedCosts& costs,
                                   bool true_label_costs = false);

/// Regression targets y'_1..y'_{T-1} by backward recursion:
/// y'_{T-1} = A_T - A_{T-1}, y'_t = 1(y'_{t+1} < 0) y'_{t+1} + A_{t+1} - A_t.
std::vector<double> calimera_targets(std::span<const double> costs);

/// Deep-Calimera: a regressor of "best reachable future cost minus current
/// cost" that triggers as soon as its estimate is positive.
class CalimeraTrigger final : public TriggerModel {
public:
    CalimeraTrigger(const TrainingCache& cache, CalimeraConfig config, std::uint64_t seed);
    CalimeraTrigger(nn::Mlp net, CalimeraConfig config);

    std::string name() const override { return "deep_calimera"; }
    UpdateRegime update_regime() const override { return UpdateRegime::delayed; }
    FeedbackKind required_feedback() const override { return FeedbackKind::full_series_and_costs; }
    Action decide(const PrefixView& prefix, const EpisodePlan& plan, const DecisionContext& ctx) const override;
    void feedback(const FeedbackPacket& packet) override;
    void hash(StateHasher& h) const override;
    std::string snapshot() const override;
    std::unique_ptr<TriggerModel> clone() const override { return std::make_unique<CalimeraTrigger>(*this); }

    static std::unique_ptr<CalimeraTrigger> restore(std::string_view json);

    /// One optimizer step on the T - 1 pairs of a completed series; returns the pre-step loss.
    double train_on(const PosteriorTrajectory& traj, ClassId y_true, const RealizedCosts& costs);

    const nn::Mlp& network() const { return net_; }

private:
    nn::Mlp net_;
    CalimeraConfig config_;
};

}  // namespace ects::triggers
