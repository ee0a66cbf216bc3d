#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ects/costs.hpp"
#include "ects/harness.hpp"
#include "ects/triggers.hpp"

namespace ects::test {

/// Hindsight-optimal stopping with knowledge the harness never hands out:
/// it replays the deployment order and the cost stream on its own, so it
/// stops at the per-instance oracle time. Hold-out evaluation (no explore)
/// falls back to the deadline.
class OracleTrigger final : public triggers::TriggerModel {
public:
    OracleTrigger(const harness::ExperimentData& data, const harness::RunConfig& config) {
        const auto U = static_cast<std::int64_t>(data.deploy.size());
        const auto schedule = harness::build_schedule(config, U, data.n_classes, data.T);
        const auto order = harness::deployment_order(config.seed, data.deploy.size());
        Rng cost_rng = make_rng(config.seed, 2);
        t_star_.reserve(data.deploy.size());
        for (std::int64_t u = 0; u < U; ++u) {
            const auto idx = order[static_cast<std::size_t>(u)];
            const auto c = costs::realize(schedule, u, data.deploy_labels[idx], cost_rng);
            t_star_.push_back(oracle_decision(data.deploy[idx], data.deploy_labels[idx], c).t_star);
        }
    }

    std::string name() const override { return "oracle_double"; }
    triggers::UpdateRegime update_regime() const override { return triggers::UpdateRegime::none; }
    triggers::FeedbackKind required_feedback() const override { return triggers::FeedbackKind::nothing; }
    triggers::Action decide(const triggers::PrefixView& prefix, const triggers::EpisodePlan&,
                            const triggers::DecisionContext& ctx) const override {
        if (prefix.t() >= prefix.horizon()) return triggers::Action::trigger;
        if (!ctx.explore) return triggers::Action::wait;
        return prefix.t() >= t_star_.at(static_cast<std::size_t>(ctx.u)) ? triggers::Action::trigger
                                                                          : triggers::Action::wait;
    }
    void feedback(const triggers::FeedbackPacket&) override {}
    void hash(StateHasher& h) const override { h.range(t_star_); }
    std::string snapshot() const override { return "{}"; }
    std::unique_ptr<triggers::TriggerModel> clone() const override { return std::make_unique<OracleTrigger>(*this); }

private:
    std::vector<int> t_star_;
};

/// Negative control for the debug-hash checks: every deployment decision
/// bumps a counter that is part of the hashed state.
class LeakyTrigger final : public triggers::TriggerModel {
public:
    std::string name() const override { return "leaky_double"; }
    triggers::UpdateRegime update_regime() const override { return triggers::UpdateRegime::none; }
    triggers::FeedbackKind required_feedback() const override { return triggers::FeedbackKind::nothing; }
    triggers::Action decide(const triggers::PrefixView& prefix, const triggers::EpisodePlan&,
                            const triggers::DecisionContext& ctx) const override {
        if (ctx.explore) ++calls_;
        return prefix.t() >= prefix.horizon() ? triggers::Action::trigger : triggers::Action::wait;
    }
    void feedback(const triggers::FeedbackPacket&) override {}
    void hash(StateHasher& h) const override { h.value(calls_); }
    std::string snapshot() const override { return "{}"; }
    std::unique_ptr<triggers::TriggerModel> clone() const override { return std::make_unique<LeakyTrigger>(*this); }

private:
    mutable std::int64_t calls_ = 0;
};

}  // namespace ects::test
