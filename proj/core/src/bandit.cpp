#include "ects/bandit.hpp"

#include <json.hpp>

#include <limits>

#include "ects/costs.hpp"
#include "ects/threshold.hpp"

namespace ects::triggers {

namespace {

using nlohmann::json;

void check_arm(const BanditState& s, int arm) {
    if (arm < 0 || static_cast<std::size_t>(arm) >= s.n_arms()) throw ContractError("bandit arm out of range");
}

void push_window(BanditState& s, int arm, double reward) {
    const auto a = static_cast<std::size_t>(arm);
    s.history.emplace_back(arm, reward);
    s.window_sum[a] += reward;
    ++s.window_count[a];
    while (s.history.size() > s.config.window) {
        const auto [old_arm, old_reward] = s.history.front();
        s.history.pop_front();
        s.window_sum[static_cast<std::size_t>(old_arm)] -= old_reward;
        --s.window_count[static_cast<std::size_t>(old_arm)];
    }
}

double window_mean(const BanditState& s, std::size_t i) {
    return s.window_count[i] > 0 ? s.window_sum[i] / static_cast<double>(s.window_count[i])
                                 : -std::numeric_limits<double>::infinity();
}

}  // namespace

std::int64_t BanditState::u() const {
    std::int64_t total = 0;
    for (auto n : pulls) total += n;
    return total;
}

BanditState BanditState::cold(std::vector<double> arms, BanditConfig config) {
    if (arms.empty()) throw ContractError("bandit needs at least one arm");
    BanditState s;
    s.arms = std::move(arms);
    s.config = config;
    s.mean_reward.assign(s.arms.size(), 0.0);
    s.pulls.assign(s.arms.size(), 0);
    s.window_sum.assign(s.arms.size(), 0.0);
    s.window_count.assign(s.arms.size(), 0);
    return s;
}

double ucb_score(double mean, double c, double log_total, double count) {
    if (count <= 0.0) return std::numeric_limits<double>::infinity();
    return mean + c * std::sqrt(2.0 * log_total / count);
}

std::vector<double> bandit_scores(const BanditState& s) {
    std::vector<double> out(s.n_arms());
    if (s.windowed()) {
        const double log_total = s.history.empty() ? 0.0 : std::log(static_cast<double>(s.history.size()));
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = ucb_score(window_mean(s, i), s.config.c, log_total, static_cast<double>(s.window_count[i]));
        }
    } else {
        const double total = static_cast<double>(s.offline_count + s.u());
        const double log_total = total > 0.0 ? std::log(total) : 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = ucb_score(s.mean_reward[i], s.config.c, log_total,
                               static_cast<double>(s.offline_count + s.pulls[i]));
        }
    }
    return out;
}

int bandit_select(const BanditState& s) {
    const auto scores = bandit_scores(s);
    return static_cast<int>(argmax(scores));
}

int bandit_greedy(const BanditState& s) {
    std::vector<double> means(s.n_arms());
    for (std::size_t i = 0; i < means.size(); ++i) means[i] = s.windowed() ? window_mean(s, i) : s.mean_reward[i];
    return static_cast<int>(argmax(means));
}

void bandit_update(BanditState& s, int arm, double reward) {
    check_arm(s, arm);
    if (!std::isfinite(reward)) throw ContractError("bandit reward must be finite");
    const auto a = static_cast<std::size_t>(arm);
    if (s.config.literal_update) {
        const double denom = static_cast<double>(s.offline_count + s.u() + 1);
        s.mean_reward[a] += (s.mean_reward[a] - reward) / denom;
    }
    ++s.pulls[a];
    if (!s.config.literal_update) {
        s.mean_reward[a] += (reward - s.mean_reward[a]) / static_cast<double>(s.offline_count + s.pulls[a]);
    }
    if (s.windowed()) push_window(s, arm, reward);
}

double normalized_reward(double loss, double max_loss) {
    if (max_loss == 0.0) throw ContractError("maximum loss is zero; reward is undefined");
    return 1.0 - loss / max_loss;
}

BanditState bandit_warm_start(const TrainingCache& cache, std::vector<double> arms, BanditConfig config) {
    cache.validate();
    BanditState s = BanditState::cold(std::move(arms), config);
    const double m = costs::max_loss(cache.nominal);
    const std::size_t I = s.n_arms();
    const std::size_t n = cache.size();
    std::vector<std::vector<double>> rewards(I, std::vector<double>(n));
    for (std::size_t i = 0; i < I; ++i) {
        double sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            rewards[i][k] =
                normalized_reward(threshold_loss(cache.trajectories[k], cache.labels[k], s.arms[i], cache.nominal), m);
            sum += rewards[i][k];
        }
        s.mean_reward[i] = sum / static_cast<double>(n);
    }
    s.offline_count = static_cast<std::int64_t>(n);
    if (s.windowed()) {
        // Round-robin over arms, walking the training series in order.
        for (std::size_t j = 0; j < config.window; ++j) {
            const std::size_t arm = j % I;
            const std::size_t series = (j / I) % n;
            push_window(s, static_cast<int>(arm), rewards[arm][series]);
        }
    }
    return s;
}

// ---------------------------------------------------------------------------

BanditTrigger::BanditTrigger(const TrainingCache& cache, BanditConfig config, std::vector<double> arms)
    : state_(bandit_warm_start(cache, std::move(arms), config)) {}

BanditTrigger::BanditTrigger(BanditState state) : state_(std::move(state)) {
    if (state_.arms.empty()) throw ContractError("bandit needs at least one arm");
}

EpisodePlan BanditTrigger::plan(const DecisionContext& ctx) const {
    EpisodePlan p;
    p.arm = ctx.explore ? bandit_select(state_) : bandit_greedy(state_);
    p.threshold = state_.arms[static_cast<std::size_t>(p.arm)];
    return p;
}

Action BanditTrigger::decide(const PrefixView& prefix, const EpisodePlan& plan, const DecisionContext&) const {
    if (plan.arm < 0) throw ContractError("bandit decide called without a plan");
    return threshold_decide(plan.threshold, prefix);
}

void BanditTrigger::feedback(const FeedbackPacket& packet) {
    if (packet.episode == nullptr || std::isnan(packet.realized_loss) || std::isnan(packet.max_loss)) {
        throw ContractError(name() + " needs the chosen arm, realized loss and maximum loss");
    }
    bandit_update(state_, packet.episode->plan.arm, normalized_reward(packet.realized_loss, packet.max_loss));
}

void BanditTrigger::hash(StateHasher& h) const {
    h.range(state_.arms);
    h.range(state_.mean_reward);
    h.range(state_.pulls);
    h.value(state_.offline_count);
    h.value(state_.config.c);
    h.value(state_.config.window);
    h.value(state_.config.literal_update);
    for (const auto& [arm, reward] : state_.history) {
        h.value(arm);
        h.value(reward);
    }
    h.range(state_.window_sum);
    h.range(state_.window_count);
}

std::string BanditTrigger::snapshot() const {
    json hist = json::array();
    for (const auto& [arm, reward] : state_.history) hist.push_back({arm, reward});
    json j = {{"trigger", name()},
              {"arms", state_.arms},
              {"mean_reward", state_.mean_reward},
              {"pulls", state_.pulls},
              {"offline_count", state_.offline_count},
              {"c", state_.config.c},
              {"window", state_.config.window},
              {"literal_update", state_.config.literal_update},
              {"history", hist},
              {"window_sum", state_.window_sum},
              {"window_count", state_.window_count}};
    return j.dump();
}

std::unique_ptr<BanditTrigger> BanditTrigger::restore(std::string_view text) {
    const json j = json::parse(text);
    BanditConfig config;
    config.c = j.at("c").get<double>();
    config.window = j.at("window").get<std::size_t>();
    config.literal_update = j.at("literal_update").get<bool>();
    BanditState s = BanditState::cold(j.at("arms").get<std::vector<double>>(), config);
    s.mean_reward = j.at("mean_reward").get<std::vector<double>>();
    s.pulls = j.at("pulls").get<std::vector<std::int64_t>>();
    s.offline_count = j.at("offline_count").get<std::int64_t>();
    for (const auto& e : j.at("history")) s.history.emplace_back(e.at(0).get<int>(), e.at(1).get<double>());
    s.window_sum = j.at("window_sum").get<std::vector<double>>();
    s.window_count = j.at("window_count").get<std::vector<std::int64_t>>();
    return std::make_unique<BanditTrigger>(std::move(s));
}

}  // namespace ects::triggers
