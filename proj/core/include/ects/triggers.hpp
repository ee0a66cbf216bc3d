#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ects/core.hpp"
#include "ects/rng.hpp"

namespace ects::triggers {

enum class UpdateRegime { delayed, instant, none };

/// What a trigger must receive after each deployment instance.
enum class FeedbackKind {
    nothing,
    full_series_and_costs,     ///< whole trajectory, label and realized costs
    realized_loss_at_trigger,  ///< only the prefix seen and the loss paid
    explicit_cost_spec,        ///< the cost matrix / delay / alpha in force
};

enum class Action { wait = 0, trigger = 1 };

std::string to_string(UpdateRegime r);
std::string to_string(FeedbackKind k);

/// Read-only view of a trajectory restricted to rows 1..t.
class PrefixView {
public:
    PrefixView(const PosteriorTrajectory& traj, int t);

    int t() const { return t_; }
    int horizon() const { return traj_->length(); }
    int n_classes() const { return traj_->n_classes(); }
    /// Row s; throws ContractError for s > t.
    std::span<const double> row(int s) const;
    double max_prob(int s) const;
    ClassId predicted(int s) const;

private:
    const PosteriorTrajectory* traj_;
    int t_;
};

/// [p_max, top1 - top2 gap, entropy / ln K, std of the posterior vector,
///  p_max(t) - p_max(t-1) (0 at t = 1), t / T].
using FeatureVector = std::array<double, 6>;
inline constexpr int kFeatureCount = 6;

FeatureVector generate_features(const PrefixView& prefix, int t);

/// Everything a decision may depend on besides the trigger's own state.
struct DecisionContext {
    std::int64_t u = 0;
    /// Deployment exploration (Alert epsilon, UCB bonus); off for hold-out.
    bool explore = false;
    /// Harness-owned randomness; required when `explore` is on.
    Rng* rng = nullptr;
    /// True cost configuration in force; only supplied to oracle baselines.
    const RealizedCosts* true_costs = nullptr;
};

/// Per-episode choices fixed before the first observation.
struct EpisodePlan {
    int arm = -1;
    double threshold = std::numeric_limits<double>::quiet_NaN();
};

struct Episode {
    int t_hat = 0;
    ClassId y_hat = 0;
    EpisodePlan plan;
    /// Action taken at t = 1..t_hat; all waits except the last.
    std::vector<Action> actions;
};

/// Feedback after one instance. The harness fills only the fields the
/// trigger's FeedbackKind entitles it to; the rest stay null / NaN.
struct FeedbackPacket {
    std::int64_t u = 0;
    const Episode* episode = nullptr;
    /// Full trajectory (delayed regime only).
    const PosteriorTrajectory* trajectory = nullptr;
    /// Prefix up to t_hat (instant regime).
    const PosteriorTrajectory* prefix_source = nullptr;
    ClassId y_true = -1;
    const RealizedCosts* costs = nullptr;
    double realized_loss = std::numeric_limits<double>::quiet_NaN();
    double max_loss = std::numeric_limits<double>::quiet_NaN();
    /// Explicit cost specification (cost-agnostic triggers).
    const RealizedCosts* cost_spec = nullptr;
};

/// Offline data every trigger may fit on: training-set trajectories,
/// labels and the nominal training costs.
struct TrainingCache {
    std::span<const PosteriorTrajectory> trajectories;
    std::span<const ClassId> labels;
    RealizedCosts nominal;

    std::size_t size() const { return trajectories.size(); }
    void validate() const;
};

/// Stateful stopping policy.
///
/// `plan` and `decide` are const: evaluation never mutates the trigger, so
/// a frozen trigger can be scored on a hold-out set. All learning happens in
/// `feedback`.
class TriggerModel {
public:
    virtual ~TriggerModel() = default;

    virtual std::string name() const = 0;
    virtual UpdateRegime update_regime() const = 0;
    virtual FeedbackKind required_feedback() const = 0;

    /// Oracle baselines receive the true cost configuration in DecisionContext.
    virtual bool needs_true_costs() const { return false; }

    virtual EpisodePlan plan(const DecisionContext&) const { return {}; }
    /// Decision at prefix.t(); implementations must trigger at the horizon.
    virtual Action decide(const PrefixView& prefix, const EpisodePlan& plan, const DecisionContext& ctx) const = 0;
    virtual void feedback(const FeedbackPacket& packet) = 0;

    virtual void hash(StateHasher& h) const = 0;
    std::uint64_t state_hash() const;

    /// JSON snapshot of the full state; see registry::restore.
    virtual std::string snapshot() const = 0;
    virtual std::unique_ptr<TriggerModel> clone() const = 0;
};

/// Steps a trigger over t = 1..T until it fires; the deadline forces a trigger.
Episode run_episode(const TriggerModel& trigger, const PosteriorTrajectory& traj, const DecisionContext& ctx);

/// Shared threshold / arm grid {0.0, 0.05, ..., 1.0}.
std::vector<double> default_threshold_grid();

/// First t with p_max(t) > threshold, else T.
int threshold_stopping_time(const PosteriorTrajectory& traj, double threshold);

}  // namespace ects::triggers
