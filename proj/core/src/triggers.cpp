#include "ects/triggers.hpp"

#include <algorithm>
#include <cmath>

namespace ects::triggers {

std::string to_string(UpdateRegime r) {
    switch (r) {
        case UpdateRegime::delayed: return "delayed";
        case UpdateRegime::instant: return "instant";
        case UpdateRegime::none: return "none";
    }
    return "none";
}

std::string to_string(FeedbackKind k) {
    switch (k) {
        case FeedbackKind::nothing: return "nothing";
        case FeedbackKind::full_series_and_costs: return "full_series_and_costs";
        case FeedbackKind::realized_loss_at_trigger: return "realized_loss_at_trigger";
        case FeedbackKind::explicit_cost_spec: return "explicit_cost_spec";
    }
    return "nothing";
}

PrefixView::PrefixView(const PosteriorTrajectory& traj, int t) : traj_(&traj), t_(t) {
    if (t < 1 || t > traj.length()) throw ContractError("prefix length outside [1, T]");
}

std::span<const double> PrefixView::row(int s) const {
    if (s > t_) throw ContractError("prefix view accessed beyond its current time");
    return traj_->row(s);
}

double PrefixView::max_prob(int s) const {
    auto r = row(s);
    return *std::max_element(r.begin(), r.end());
}

ClassId PrefixView::predicted(int s) const { return static_cast<ClassId>(argmax(row(s))); }

FeatureVector generate_features(const PrefixView& prefix, int t) {
    const auto p = prefix.row(t);
    const auto K = static_cast<double>(p.size());
    double top1 = -1.0;
    double top2 = -1.0;
    double entropy = 0.0;
    double mean = 0.0;
    for (double v : p) {
        if (v > top1) {
            top2 = top1;
            top1 = v;
        } else if (v > top2) {
            top2 = v;
        }
        if (v > 0.0) entropy -= v * std::log(v);
        mean += v;
    }
    mean /= K;
    double var = 0.0;
    for (double v : p) var += (v - mean) * (v - mean);
    var /= K;
    const double gap = p.size() > 1 ? top1 - top2 : top1;
    const double norm_entropy = p.size() > 1 ? entropy / std::log(K) : 0.0;
    const double delta = t > 1 ? top1 - prefix.max_prob(t - 1) : 0.0;
    return {top1, gap, std::clamp(norm_entropy, 0.0, 1.0), std::sqrt(var), delta,
            static_cast<double>(t) / prefix.horizon()};
}

void TrainingCache::validate() const {
    if (trajectories.empty()) throw ContractError("training cache is empty");
    if (trajectories.size() != labels.size()) throw ContractError("training cache labels do not match trajectories");
    if (trajectories.front().length() != nominal.T || trajectories.front().n_classes() != nominal.n_classes) {
        throw ContractError("training cache dimensions do not match nominal costs");
    }
}

std::uint64_t TriggerModel::state_hash() const {
    StateHasher h;
    hash(h);
    return h.digest();
}

Episode run_episode(const TriggerModel& trigger, const PosteriorTrajectory& traj, const DecisionContext& ctx) {
    Episode ep;
    ep.plan = trigger.plan(ctx);
    const int T = traj.length();
    for (int t = 1; t <= T; ++t) {
        const PrefixView view(traj, t);
        Action a = trigger.decide(view, ep.plan, ctx);
        if (t == T) a = Action::trigger;
        ep.actions.push_back(a);
        if (a == Action::trigger) {
            ep.t_hat = t;
            ep.y_hat = traj.predicted(t);
            break;
        }
    }
    return ep;
}

std::vector<double> default_threshold_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
    return grid;
}

int threshold_stopping_time(const PosteriorTrajectory& traj, double threshold) {
    for (int t = 1; t < traj.length(); ++t) {
        if (traj.max_prob(t) > threshold) return t;
    }
    return traj.length();
}

}  // namespace ects::triggers
