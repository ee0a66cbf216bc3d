#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "ects/nn.hpp"
#include "ects/triggers.hpp"

namespace ects::triggers {

struct AlertConfig {
    int hidden = 64;
    nn::AdamConfig adam;
    double gamma = 0.99;
    /// Deployment exploration rate; hold-out evaluation always uses 0.
    double epsilon = 0.1;
    /// Offline passes over the training cache. Offline passes see whole
    /// series, so every (t, action) pair is trained, not only a rollout.
    int pretrain_epochs = 3;
};

/// One step of an episode: features, action, reward and whether it ended.
struct Transition {
    FeatureVector state{};
    Action action = Action::wait;
    double reward = 0.0;
    bool terminal = false;
    FeatureVector next{};
};

/// Episode transitions: zero reward while waiting, -loss at the trigger step.
std::vector<Transition> alert_transitions(const PrefixView& prefix, const std::vector<Action>& actions, double loss);

/// Alert: a two-output Q-network over {wait, trigger}, updated from each
/// deployment episode's own transitions.
class AlertTrigger final : public TriggerModel {
public:
    AlertTrigger(const TrainingCache& cache, AlertConfig config, std::uint64_t seed);
    AlertTrigger(nn::Mlp net, AlertConfig config);

    std::string name() const override { return "alert"; }
    UpdateRegime update_regime() const override { return UpdateRegime::instant; }
    FeedbackKind required_feedback() const override { return FeedbackKind::realized_loss_at_trigger; }
    /// Epsilon-greedy when ctx.explore is set (needs ctx.rng), greedy otherwise.
    Action decide(const PrefixView& prefix, const EpisodePlan& plan, const DecisionContext& ctx) const override;
    void feedback(const FeedbackPacket& packet) override;
    void hash(StateHasher& h) const override;
    std::string snapshot() const override;
    std::unique_ptr<TriggerModel> clone() const override { return std::make_unique<AlertTrigger>(*this); }

    static std::unique_ptr<AlertTrigger> restore(std::string_view json);

    /// One optimizer step on the squared TD error of `transitions`; returns the pre-step loss.
    double train_on(const std::vector<Transition>& transitions);

    /// Q(x, wait), Q(x, trigger).
    std::array<double, 2> q_values(const FeatureVector& x) const;
    const nn::Mlp& network() const { return net_; }
    const AlertConfig& config() const { return config_; }

private:
    void pretrain_series(const PosteriorTrajectory& traj, ClassId y_true, const RealizedCosts& costs);

    nn::Mlp net_;
    AlertConfig config_;
};

}  // namespace ects::triggers
