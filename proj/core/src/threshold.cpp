#include "ects/threshold.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ects::triggers {

namespace {

using nlohmann::json;

void check_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw ContractError("threshold grid is empty");
}

std::string variant_name(ThresholdTrigger::Variant v) {
    switch (v) {
        case ThresholdTrigger::Variant::frozen: return "no_adapt";
        case ThresholdTrigger::Variant::plain: return "threshold";
        case ThresholdTrigger::Variant::decay: return "decay_threshold";
    }
    return "threshold";
}

ThresholdTrigger::Variant parse_variant(const std::string& s) {
    if (s == "no_adapt") return ThresholdTrigger::Variant::frozen;
    if (s == "threshold") return ThresholdTrigger::Variant::plain;
    if (s == "decay_threshold") return ThresholdTrigger::Variant::decay;
    throw std::runtime_error("unknown threshold variant in snapshot: " + s);
}

json state_to_json(const ThresholdState& s) {
    return {{"grid", s.grid}, {"avg_loss", s.avg_loss}, {"counts", s.counts}, {"decay", s.decay}};
}

ThresholdState state_from_json(const json& j) {
    ThresholdState s;
    s.grid = j.at("grid").get<std::vector<double>>();
    s.avg_loss = j.at("avg_loss").get<std::vector<double>>();
    s.counts = j.at("counts").get<std::vector<std::int64_t>>();
    s.decay = j.at("decay").get<double>();
    return s;
}

}  // namespace

std::size_t ThresholdState::active_index() const {
    check_grid(grid);
    if (avg_loss.size() != grid.size()) throw ContractError("threshold estimates do not match the grid");
    return argmin(avg_loss);
}

double threshold_loss(const PosteriorTrajectory& traj, ClassId y_true, double threshold, const RealizedCosts& costs) {
    const int t = threshold_stopping_time(traj, threshold);
    return compute_loss(traj.predicted(t), y_true, t, costs).total;
}

ThresholdState fit_thresholds(const TrainingCache& cache, std::vector<double> grid, double decay) {
    cache.validate();
    check_grid(grid);
    ThresholdState state;
    state.grid = std::move(grid);
    state.decay = decay;
    state.avg_loss.assign(state.grid.size(), 0.0);
    state.counts.assign(state.grid.size(), static_cast<std::int64_t>(cache.size()));
    for (std::size_t i = 0; i < state.grid.size(); ++i) {
        double sum = 0.0;
        for (std::size_t n = 0; n < cache.size(); ++n) {
            sum += threshold_loss(cache.trajectories[n], cache.labels[n], state.grid[i], cache.nominal);
        }
        state.avg_loss[i] = sum / static_cast<double>(cache.size());
    }
    return state;
}

void threshold_feedback(ThresholdState& state, const PosteriorTrajectory& traj, ClassId y_true,
                        const RealizedCosts& costs) {
    check_grid(state.grid);
    for (std::size_t i = 0; i < state.grid.size(); ++i) {
        const double loss = threshold_loss(traj, y_true, state.grid[i], costs);
        ++state.counts[i];
        if (state.decay > 0.0) {
            state.avg_loss[i] = (1.0 - state.decay) * state.avg_loss[i] + state.decay * loss;
        } else {
            state.avg_loss[i] += (loss - state.avg_loss[i]) / static_cast<double>(state.counts[i]);
        }
    }
}

Action threshold_decide(double threshold, const PrefixView& prefix) {
    const int t = prefix.t();
    if (t >= prefix.horizon() || prefix.max_prob(t) > threshold) return Action::trigger;
    return Action::wait;
}

ThresholdState silver_refit(const TrainingCache& cache, const RealizedCosts& true_costs, std::vector<double> grid) {
    TrainingCache refit = cache;
    refit.nominal = true_costs;
    return fit_thresholds(refit, std::move(grid), 0.0);
}

// ---------------------------------------------------------------------------

ThresholdTrigger::ThresholdTrigger(Variant variant, ThresholdState state)
    : variant_(variant), state_(std::move(state)) {
    check_grid(state_.grid);
    if (state_.avg_loss.size() != state_.grid.size() || state_.counts.size() != state_.grid.size()) {
        throw ContractError("threshold state vectors must match the grid");
    }
    if (variant_ == Variant::decay && !(state_.decay > 0.0 && state_.decay <= 1.0)) {
        throw ConfigError("decay rate must be in (0, 1]");
    }
    if (variant_ != Variant::decay) state_.decay = 0.0;
}

ThresholdTrigger::ThresholdTrigger(Variant variant, const TrainingCache& cache, double decay, std::vector<double> grid)
    : ThresholdTrigger(variant, fit_thresholds(cache, std::move(grid), variant == Variant::decay ? decay : 0.0)) {}

std::string ThresholdTrigger::name() const { return variant_name(variant_); }

Action ThresholdTrigger::decide(const PrefixView& prefix, const EpisodePlan&, const DecisionContext&) const {
    return threshold_decide(state_.active_threshold(), prefix);
}

void ThresholdTrigger::feedback(const FeedbackPacket& packet) {
    if (variant_ == Variant::frozen) return;
    if (packet.trajectory == nullptr || packet.costs == nullptr || packet.y_true < 0) {
        throw ContractError(name() + " needs the full series, label and realized costs");
    }
    threshold_feedback(state_, *packet.trajectory, packet.y_true, *packet.costs);
}

void ThresholdTrigger::hash(StateHasher& h) const {
    h.value(static_cast<int>(variant_));
    h.range(state_.grid);
    h.range(state_.avg_loss);
    h.range(state_.counts);
    h.value(state_.decay);
}

std::string ThresholdTrigger::snapshot() const {
    json j = state_to_json(state_);
    j["trigger"] = name();
    return j.dump();
}

std::unique_ptr<ThresholdTrigger> ThresholdTrigger::restore(std::string_view text) {
    const json j = json::parse(text);
    return std::make_unique<ThresholdTrigger>(parse_variant(j.at("trigger").get<std::string>()), state_from_json(j));
}

// ---------------------------------------------------------------------------

SilverTrigger::SilverTrigger(const TrainingCache& cache, std::vector<double> grid) : grid_(std::move(grid)) {
    cache.validate();
    check_grid(grid_);
    n_classes_ = cache.nominal.n_classes;
    T_ = cache.nominal.T;
    n_series_ = static_cast<double>(cache.size());
    const auto K = static_cast<std::size_t>(n_classes_);
    confusion_.assign(grid_.size(), std::vector<double>(K * K, 0.0));
    mean_delay_.assign(grid_.size(), 0.0);
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        for (std::size_t n = 0; n < cache.size(); ++n) {
            const auto& traj = cache.trajectories[n];
            const int t = threshold_stopping_time(traj, grid_[i]);
            confusion_[i][static_cast<std::size_t>(cache.labels[n]) * K + static_cast<std::size_t>(traj.predicted(t))] +=
                1.0;
            mean_delay_[i] += static_cast<double>(t) / T_;
        }
        mean_delay_[i] /= n_series_;
    }
}

std::vector<double> SilverTrigger::grid_losses(const RealizedCosts& costs) const {
    if (costs.n_classes != n_classes_ || costs.T != T_) throw ContractError("silver costs do not match the cache");
    std::vector<double> out(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        double mis = 0.0;
        for (std::size_t c = 0; c < confusion_[i].size(); ++c) mis += confusion_[i][c] * costs.matrix[c];
        out[i] = costs.combine(mis / n_series_, costs.delay.scale * mean_delay_[i]);
    }
    return out;
}

EpisodePlan SilverTrigger::plan(const DecisionContext& ctx) const {
    if (ctx.true_costs == nullptr) throw ContractError("silver requires the true cost configuration");
    const auto losses = grid_losses(*ctx.true_costs);
    EpisodePlan p;
    p.arm = static_cast<int>(argmin(losses));
    p.threshold = grid_[static_cast<std::size_t>(p.arm)];
    return p;
}

Action SilverTrigger::decide(const PrefixView& prefix, const EpisodePlan& plan, const DecisionContext&) const {
    if (std::isnan(plan.threshold)) throw ContractError("silver decide called without a plan");
    return threshold_decide(plan.threshold, prefix);
}

void SilverTrigger::hash(StateHasher& h) const {
    h.range(grid_);
    h.value(n_classes_);
    h.value(T_);
    h.value(n_series_);
    for (const auto& c : confusion_) h.range(c);
    h.range(mean_delay_);
}

std::string SilverTrigger::snapshot() const {
    json j = {{"trigger", "silver"},     {"grid", grid_},         {"n_classes", n_classes_},
              {"T", T_},                 {"n_series", n_series_}, {"confusion", confusion_},
              {"mean_delay", mean_delay_}};
    return j.dump();
}

std::unique_ptr<SilverTrigger> SilverTrigger::restore(std::string_view text) {
    const json j = json::parse(text);
    std::unique_ptr<SilverTrigger> s(new SilverTrigger());
    s->grid_ = j.at("grid").get<std::vector<double>>();
    s->n_classes_ = j.at("n_classes").get<int>();
    s->T_ = j.at("T").get<int>();
    s->n_series_ = j.at("n_series").get<double>();
    s->confusion_ = j.at("confusion").get<std::vector<std::vector<double>>>();
    s->mean_delay_ = j.at("mean_delay").get<std::vector<double>>();
    return s;
}

}  // namespace ects::triggers
