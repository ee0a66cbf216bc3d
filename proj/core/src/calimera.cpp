#include "ects/calimera.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ects::triggers {

nn::Matrix feature_matrix(const PrefixView& prefix, int from, int to) {
    if (from < 1 || to > prefix.t() || from > to) throw ContractError("feature range outside the visible prefix");
    nn::Matrix out(to - from + 1, kFeatureCount);
    for (int t = from; t <= to; ++t) {
        const auto f = generate_features(prefix, t);
        for (int c = 0; c < kFeatureCount; ++c) out(t - from, c) = f[static_cast<std::size_t>(c)];
    }
    return out;
}

std::vector<double> calimera_costs(const PosteriorTrajectory& traj, ClassId y_true, const RealizedCosts& costs,
                                   bool true_label_costs) {
    const int T = traj.length();
    std::vector<double> A(static_cast<std::size_t>(T));
    for (int t = 1; t <= T; ++t) {
        const ClassId y_hat = traj.predicted(t);
        double mis = 0.0;
        if (true_label_costs) {
            mis = costs.misclassification(y_hat, y_true);
        } else {
            const auto p = traj.row(t);
            for (int k = 0; k < traj.n_classes(); ++k) mis += p[static_cast<std::size_t>(k)] * costs.misclassification(y_hat, k);
        }
        A[static_cast<std::size_t>(t - 1)] = costs.combine(mis, costs.delay(t, T));
    }
    return A;
}

std::vector<double> calimera_targets(std::span<const double> A) {
    if (A.size() < 2) return {};
    const std::size_t T = A.size();
    std::vector<double> y(T - 1);
    double next = 0.0;  // y'_T does not exist; its indicator term vanishes
    for (std::size_t i = T - 1; i-- > 0;) {
        y[i] = (next < 0.0 ? next : 0.0) + A[i + 1] - A[i];
        next = y[i];
    }
    return y;
}

CalimeraTrigger::CalimeraTrigger(nn::Mlp net, CalimeraConfig config) : net_(std::move(net)), config_(config) {
    if (net_.input_dim() != kFeatureCount || net_.output_dim() != 1) {
        throw ContractError("calimera regressor must map the feature vector to one output");
    }
}

CalimeraTrigger::CalimeraTrigger(const TrainingCache& cache, CalimeraConfig config, std::uint64_t seed)
    : CalimeraTrigger(nn::Mlp(kFeatureCount, config.hidden, 1, seed, config.adam), config) {
    cache.validate();
    std::vector<std::size_t> order(cache.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = make_rng(seed, 0xCA11);
    for (int epoch = 0; epoch < config_.pretrain_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (auto n : order) train_on(cache.trajectories[n], cache.labels[n], cache.nominal);
    }
}

double CalimeraTrigger::train_on(const PosteriorTrajectory& traj, ClassId y_true, const RealizedCosts& costs) {
    const int T = traj.length();
    if (T < 2) return 0.0;
    const auto A = calimera_costs(traj, y_true, costs, config_.true_label_costs);
    const auto y = calimera_targets(A);
    nn::Matrix targets(T - 1, 1);
    for (int i = 0; i < T - 1; ++i) targets(i, 0) = y[static_cast<std::size_t>(i)];
    if (!targets.allFinite()) throw nn::NumericError("non-finite calimera targets");
    const PrefixView full(traj, T);
    return net_.sgd_step(feature_matrix(full, 1, T - 1), targets);
}

Action CalimeraTrigger::decide(const PrefixView& prefix, const EpisodePlan&, const DecisionContext&) const {
    const int t = prefix.t();
    if (t >= prefix.horizon()) return Action::trigger;
    const nn::Matrix x = feature_matrix(prefix, t, t);
    return net_.forward(x)(0, 0) > 0.0 ? Action::trigger : Action::wait;
}

void CalimeraTrigger::feedback(const FeedbackPacket& packet) {
    if (packet.trajectory == nullptr || packet.costs == nullptr || packet.y_true < 0) {
        throw ContractError("deep_calimera needs the full series, label and realized costs");
    }
    train_on(*packet.trajectory, packet.y_true, *packet.costs);
}

void CalimeraTrigger::hash(StateHasher& h) const {
    net_.hash(h);
    h.value(config_.true_label_costs);
}

std::string CalimeraTrigger::snapshot() const {
    nlohmann::json j = {{"trigger", "deep_calimera"},
                        {"true_label_costs", config_.true_label_costs},
                        {"pretrain_epochs", config_.pretrain_epochs},
                        {"network", nlohmann::json::parse(net_.to_json())}};
    return j.dump();
}

std::unique_ptr<CalimeraTrigger> CalimeraTrigger::restore(std::string_view text) {
    const auto j = nlohmann::json::parse(text);
    nn::Mlp net = nn::Mlp::from_json(j.at("network").dump());
    CalimeraConfig config;
    config.hidden = net.hidden_dim();
    config.adam = net.adam();
    config.true_label_costs = j.at("true_label_costs").get<bool>();
    config.pretrain_epochs = j.at("pretrain_epochs").get<int>();
    return std::make_unique<CalimeraTrigger>(std::move(net), config);
}

}  // namespace ects::triggers
