#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <memory>
#include <string_view>
#include <utility>
#include <vector>

#include "ects/triggers.hpp"

namespace ects::triggers {

struct BanditConfig {
    double c = std::sqrt(2.0);
    /// Sliding-window length; 0 keeps the full history (HUCB1).
    std::size_t window = 0;
    /// Use the mean update exactly as printed, r += (r - reward) / (N + u),
    /// instead of the incremental mean.
    bool literal_update = false;
};

/// Threshold arms with warm-started reward statistics.
///
/// Full-memory mode: an arm's effective count is N + n_i, where N is the
/// per-arm offline history and n_i its deployment pulls.
/// Window mode: statistics come only from the last `window` (arm, reward)
/// pairs, pre-filled from the offline history.
struct BanditState {
    std::vector<double> arms;
    std::vector<double> mean_reward;
    std::vector<std::int64_t> pulls;
    std::int64_t offline_count = 0;
    BanditConfig config;

    std::deque<std::pair<int, double>> history;
    std::vector<double> window_sum;
    std::vector<std::int64_t> window_count;

    std::size_t n_arms() const { return arms.size(); }
    /// Total deployment pulls.
    std::int64_t u() const;
    bool windowed() const { return config.window > 0; }

    /// Empty statistics over `arms`, no warm start.
    static BanditState cold(std::vector<double> arms, BanditConfig config);
};

/// UCB score mean + c * sqrt(2 ln(total) / count); +inf when count is 0.
double ucb_score(double mean, double c, double log_total, double count);

/// Per-arm (full-memory) or windowed scores.
std::vector<double> bandit_scores(const BanditState& state);

/// Argmax score, ties to the lowest index.
int bandit_select(const BanditState& state);

/// Argmax of the current mean reward (no exploration bonus).
int bandit_greedy(const BanditState& state);

/// Folds one normalized reward into arm `arm`.
void bandit_update(BanditState& state, int arm, double reward);

/// Reward 1 - L / M; throws ContractError when M is 0.
double normalized_reward(double loss, double max_loss);

/// Warm start from counterfactual rewards of every arm on every training series.
BanditState bandit_warm_start(const TrainingCache& cache, std::vector<double> arms, BanditConfig config);

class BanditTrigger final : public TriggerModel {
public:
    BanditTrigger(const TrainingCache& cache, BanditConfig config, std::vector<double> arms = default_threshold_grid());
    explicit BanditTrigger(BanditState state);

    std::string name() const override { return state_.windowed() ? "sw_hucb1" : "hucb1"; }
    UpdateRegime update_regime() const override { return UpdateRegime::instant; }
    FeedbackKind required_feedback() const override { return FeedbackKind::realized_loss_at_trigger; }
    /// UCB selection when exploring, greedy otherwise.
    EpisodePlan plan(const DecisionContext& ctx) const override;
    Action decide(const PrefixView& prefix, const EpisodePlan& plan, const DecisionContext& ctx) const override;
    void feedback(const FeedbackPacket& packet) override;
    void hash(StateHasher& h) const override;
    std::string snapshot() const override;
    std::unique_ptr<TriggerModel> clone() const override { return std::make_unique<BanditTrigger>(*this); }

    static std::unique_ptr<BanditTrigger> restore(std::string_view json);

    const BanditState& state() const { return state_; }

private:
    BanditState state_;
};

}  // namespace ects::triggers
