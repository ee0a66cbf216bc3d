#include "ects/economy.hpp"

#include <json.hpp>

#include <algorithm>

namespace ects::triggers {

namespace {

using nlohmann::json;

json costs_to_json(const RealizedCosts& c) {
    return {{"n_classes", c.n_classes}, {"T", c.T},         {"u", c.u},
            {"matrix", c.matrix},       {"delay_scale", c.delay.scale}, {"alpha", c.alpha},
            {"weighted", c.mode == Weighting::weighted}};
}

RealizedCosts costs_from_json(const json& j) {
    RealizedCosts c;
    c.n_classes = j.at("n_classes").get<int>();
    c.T = j.at("T").get<int>();
    c.u = j.at("u").get<std::int64_t>();
    c.matrix = j.at("matrix").get<std::vector<double>>();
    c.delay.scale = j.at("delay_scale").get<double>();
    c.alpha = j.at("alpha").get<double>();
    c.mode = j.at("weighted").get<bool>() ? Weighting::weighted : Weighting::unweighted;
    return c;
}

void check_spec(const EconomyState& state, const RealizedCosts& spec) {
    if (spec.n_classes != state.n_classes || spec.T != state.T ||
        spec.matrix.size() != static_cast<std::size_t>(spec.n_classes) * static_cast<std::size_t>(spec.n_classes)) {
        throw ContractError("economy cost specification is missing or has the wrong shape");
    }
}

}  // namespace

int EconomyState::bin_of(int t, double p_max) const {
    const auto& e = edges.at(static_cast<std::size_t>(t - 1));
    return static_cast<int>(std::upper_bound(e.begin(), e.end(), p_max) - e.begin());
}

const std::vector<double>& EconomyState::joint(int t, int bin) const {
    return confusion.at(static_cast<std::size_t>(t - 1)).at(static_cast<std::size_t>(bin));
}

double EconomyState::transition(int t, int from, int to) const {
    return transitions.at(static_cast<std::size_t>(t - 1))[static_cast<std::size_t>(from * n_bins + to)];
}

EconomyState economy_fit(const TrainingCache& cache, EconomyConfig config) {
    cache.validate();
    if (config.n_bins < 1) throw ConfigError("economy needs at least one bin");
    if (config.smoothing < 0.0) throw ConfigError("economy smoothing must be nonnegative");
    if (cache.size() < static_cast<std::size_t>(config.n_bins)) {
        throw ContractError("economy needs at least as many training series as bins");
    }
    EconomyState s;
    s.T = cache.nominal.T;
    s.n_classes = cache.nominal.n_classes;
    s.n_bins = config.n_bins;
    const auto n = cache.size();
    const auto B = static_cast<std::size_t>(s.n_bins);
    const auto K = static_cast<std::size_t>(s.n_classes);

    s.edges.resize(static_cast<std::size_t>(s.T));
    std::vector<double> p(n);
    for (int t = 1; t <= s.T; ++t) {
        for (std::size_t i = 0; i < n; ++i) p[i] = cache.trajectories[i].max_prob(t);
        std::sort(p.begin(), p.end());
        auto& e = s.edges[static_cast<std::size_t>(t - 1)];
        for (std::size_t j = 1; j < B; ++j) e.push_back(p[std::min(n - 1, j * n / B)]);
    }

    std::vector<std::vector<int>> bins(n, std::vector<int>(static_cast<std::size_t>(s.T)));
    for (std::size_t i = 0; i < n; ++i) {
        for (int t = 1; t <= s.T; ++t) bins[i][static_cast<std::size_t>(t - 1)] = s.bin_of(t, cache.trajectories[i].max_prob(t));
    }

    s.transitions.assign(static_cast<std::size_t>(std::max(0, s.T - 1)), std::vector<double>(B * B, 0.0));
    for (int t = 1; t < s.T; ++t) {
        auto& m = s.transitions[static_cast<std::size_t>(t - 1)];
        for (std::size_t i = 0; i < n; ++i) {
            const auto from = static_cast<std::size_t>(bins[i][static_cast<std::size_t>(t - 1)]);
            const auto to = static_cast<std::size_t>(bins[i][static_cast<std::size_t>(t)]);
            m[from * B + to] += 1.0;
        }
        for (std::size_t r = 0; r < B; ++r) {
            double sum = 0.0;
            for (std::size_t c = 0; c < B; ++c) sum += m[r * B + c];
            for (std::size_t c = 0; c < B; ++c) m[r * B + c] = sum > 0.0 ? m[r * B + c] / sum : 1.0 / static_cast<double>(B);
        }
    }

    s.confusion.assign(static_cast<std::size_t>(s.T), std::vector<std::vector<double>>(B, std::vector<double>(K * K, config.smoothing)));
    for (int t = 1; t <= s.T; ++t) {
        auto& per_bin = s.confusion[static_cast<std::size_t>(t - 1)];
        for (std::size_t i = 0; i < n; ++i) {
            const auto g = static_cast<std::size_t>(bins[i][static_cast<std::size_t>(t - 1)]);
            const auto y = static_cast<std::size_t>(cache.labels[i]);
            const auto y_hat = static_cast<std::size_t>(cache.trajectories[i].predicted(t));
            per_bin[g][y * K + y_hat] += 1.0;
        }
        for (auto& m : per_bin) {
            double sum = 0.0;
            for (double v : m) sum += v;
            for (double& v : m) v = sum > 0.0 ? v / sum : 1.0 / static_cast<double>(K * K);
        }
    }
    return s;
}

std::vector<double> economy_bin_costs(const EconomyState& state, const RealizedCosts& spec) {
    check_spec(state, spec);
    std::vector<double> out(static_cast<std::size_t>(state.T * state.n_bins), 0.0);
    for (int t = 1; t <= state.T; ++t) {
        for (int g = 0; g < state.n_bins; ++g) {
            const auto& joint = state.joint(t, g);
            double c = 0.0;
            for (std::size_t k = 0; k < joint.size(); ++k) c += joint[k] * spec.matrix[k];
            out[static_cast<std::size_t>((t - 1) * state.n_bins + g)] = c;
        }
    }
    return out;
}

std::vector<double> economy_expected_costs(const EconomyState& state, int t, int bin, const RealizedCosts& spec,
                                           const std::vector<double>& bin_costs) {
    check_spec(state, spec);
    if (t < 1 || t > state.T) throw ContractError("economy time outside [1, T]");
    if (bin < 0 || bin >= state.n_bins) throw ContractError("economy bin out of range");
    const auto B = static_cast<std::size_t>(state.n_bins);
    std::vector<double> dist(B, 0.0);
    std::vector<double> next(B);
    dist[static_cast<std::size_t>(bin)] = 1.0;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(state.T - t + 1));
    for (int tau = t; tau <= state.T; ++tau) {
        double mis = 0.0;
        for (std::size_t g = 0; g < B; ++g) mis += dist[g] * bin_costs[static_cast<std::size_t>(tau - 1) * B + g];
        out.push_back(spec.combine(mis, spec.delay(tau, state.T)));
        if (tau == state.T) break;
        const auto& P = state.transitions[static_cast<std::size_t>(tau - 1)];
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t a = 0; a < B; ++a) {
            if (dist[a] == 0.0) continue;
            for (std::size_t b = 0; b < B; ++b) next[b] += dist[a] * P[a * B + b];
        }
        dist.swap(next);
    }
    return out;
}

std::vector<double> economy_expected_costs(const EconomyState& state, int t, int bin, const RealizedCosts& spec) {
    return economy_expected_costs(state, t, bin, spec, economy_bin_costs(state, spec));
}

Action economy_decide(const EconomyState& state, const PrefixView& prefix, const RealizedCosts& spec,
                      const std::vector<double>& bin_costs) {
    const int t = prefix.t();
    if (t >= prefix.horizon()) return Action::trigger;
    const auto costs = economy_expected_costs(state, t, state.bin_of(t, prefix.max_prob(t)), spec, bin_costs);
    const double later = *std::min_element(costs.begin() + 1, costs.end());
    return costs.front() <= later ? Action::trigger : Action::wait;
}

Action economy_decide(const EconomyState& state, const PrefixView& prefix, const RealizedCosts& spec) {
    return economy_decide(state, prefix, spec, economy_bin_costs(state, spec));
}

// ---------------------------------------------------------------------------

EconomyTrigger::EconomyTrigger(const TrainingCache& cache, EconomyConfig config)
    : EconomyTrigger(economy_fit(cache, config), cache.nominal) {}

EconomyTrigger::EconomyTrigger(EconomyState state, RealizedCosts spec) : state_(std::move(state)), spec_(std::move(spec)) {
    bin_costs_ = economy_bin_costs(state_, spec_);
}

Action EconomyTrigger::decide(const PrefixView& prefix, const EpisodePlan&, const DecisionContext&) const {
    return economy_decide(state_, prefix, spec_, bin_costs_);
}

void EconomyTrigger::feedback(const FeedbackPacket& packet) {
    if (packet.cost_spec == nullptr) throw ContractError("economy needs an explicit cost specification");
    check_spec(state_, *packet.cost_spec);
    spec_ = *packet.cost_spec;
    bin_costs_ = economy_bin_costs(state_, spec_);
}

void EconomyTrigger::hash(StateHasher& h) const {
    h.value(state_.T);
    h.value(state_.n_classes);
    h.value(state_.n_bins);
    for (const auto& e : state_.edges) h.range(e);
    for (const auto& m : state_.transitions) h.range(m);
    for (const auto& per_bin : state_.confusion) {
        for (const auto& m : per_bin) h.range(m);
    }
    h.range(spec_.matrix);
    h.value(spec_.delay.scale);
    h.value(spec_.alpha);
    h.value(static_cast<int>(spec_.mode));
    h.value(spec_.u);
}

std::string EconomyTrigger::snapshot() const {
    json j = {{"trigger", "economy"},
              {"T", state_.T},
              {"n_classes", state_.n_classes},
              {"n_bins", state_.n_bins},
              {"edges", state_.edges},
              {"transitions", state_.transitions},
              {"confusion", state_.confusion},
              {"cost_spec", costs_to_json(spec_)}};
    return j.dump();
}

std::unique_ptr<EconomyTrigger> EconomyTrigger::restore(std::string_view text) {
    const json j = json::parse(text);
    EconomyState s;
    s.T = j.at("T").get<int>();
    s.n_classes = j.at("n_classes").get<int>();
    s.n_bins = j.at("n_bins").get<int>();
    s.edges = j.at("edges").get<std::vector<std::vector<double>>>();
    s.transitions = j.at("transitions").get<std::vector<std::vector<double>>>();
    s.confusion = j.at("confusion").get<std::vector<std::vector<std::vector<double>>>>();
    return std::make_unique<EconomyTrigger>(std::move(s), costs_from_json(j.at("cost_spec")));
}

}  // namespace ects::triggers
