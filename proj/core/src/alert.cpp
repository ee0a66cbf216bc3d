#include "ects/alert.hpp"

#include <json.hpp>

#include <algorithm>
#include <numeric>

#include "ects/calimera.hpp"

namespace ects::triggers {

namespace {

nn::Matrix rows_of(const std::vector<FeatureVector>& xs) {
    nn::Matrix m(static_cast<Eigen::Index>(xs.size()), kFeatureCount);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (int c = 0; c < kFeatureCount; ++c) m(static_cast<Eigen::Index>(i), c) = xs[i][static_cast<std::size_t>(c)];
    }
    return m;
}

}  // namespace

std::vector<Transition> alert_transitions(const PrefixView& prefix, const std::vector<Action>& actions, double loss) {
    const int t_hat = static_cast<int>(actions.size());
    if (t_hat < 1 || t_hat > prefix.t()) throw ContractError("episode longer than the visible prefix");
    if (actions.back() != Action::trigger) throw ContractError("episode must end with a trigger");
    std::vector<Transition> out;
    out.reserve(actions.size());
    for (int t = 1; t <= t_hat; ++t) {
        Transition tr;
        tr.state = generate_features(prefix, t);
        tr.action = actions[static_cast<std::size_t>(t - 1)];
        tr.terminal = t == t_hat;
        tr.reward = tr.terminal ? -loss : 0.0;
        if (!tr.terminal) tr.next = generate_features(prefix, t + 1);
        out.push_back(tr);
    }
    return out;
}

AlertTrigger::AlertTrigger(nn::Mlp net, AlertConfig config) : net_(std::move(net)), config_(config) {
    if (net_.input_dim() != kFeatureCount || net_.output_dim() != 2) {
        throw ContractError("alert Q-network must map the feature vector to two action values");
    }
    if (!(config_.epsilon >= 0.0 && config_.epsilon <= 1.0)) throw ConfigError("alert epsilon must be in [0, 1]");
    if (!(config_.gamma >= 0.0 && config_.gamma <= 1.0)) throw ConfigError("alert gamma must be in [0, 1]");
}

AlertTrigger::AlertTrigger(const TrainingCache& cache, AlertConfig config, std::uint64_t seed)
    : AlertTrigger(nn::Mlp(kFeatureCount, config.hidden, 2, seed, config.adam), config) {
    cache.validate();
    std::vector<std::size_t> order(cache.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = make_rng(seed, 0xA1E7);
    for (int epoch = 0; epoch < config_.pretrain_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (auto n : order) pretrain_series(cache.trajectories[n], cache.labels[n], cache.nominal);
    }
}

std::array<double, 2> AlertTrigger::q_values(const FeatureVector& x) const {
    nn::Matrix m(1, kFeatureCount);
    for (int c = 0; c < kFeatureCount; ++c) m(0, c) = x[static_cast<std::size_t>(c)];
    const nn::Matrix q = net_.forward(m);
    return {q(0, 0), q(0, 1)};
}

void AlertTrigger::pretrain_series(const PosteriorTrajectory& traj, ClassId y_true, const RealizedCosts& costs) {
    const int T = traj.length();
    const PrefixView full(traj, T);
    const nn::Matrix x = feature_matrix(full, 1, T);
    const nn::Matrix q = net_.forward(x);
    nn::Matrix targets(T, 2);
    nn::Matrix mask = nn::Matrix::Ones(T, 2);
    for (int t = 1; t <= T; ++t) {
        const Eigen::Index r = t - 1;
        targets(r, 1) = -compute_loss(traj.predicted(t), y_true, t, costs).total;
        if (t < T) {
            targets(r, 0) = config_.gamma * q.row(r + 1).maxCoeff();
        } else {
            targets(r, 0) = 0.0;
            mask(r, 0) = 0.0;
        }
    }
    net_.sgd_step(x, targets, mask);
}

double AlertTrigger::train_on(const std::vector<Transition>& transitions) {
    if (transitions.empty()) return 0.0;
    std::vector<FeatureVector> states;
    std::vector<FeatureVector> nexts;
    for (const auto& tr : transitions) {
        states.push_back(tr.state);
        nexts.push_back(tr.next);
    }
    const nn::Matrix x = rows_of(states);
    const nn::Matrix q_next = net_.forward(rows_of(nexts));
    const auto n = static_cast<Eigen::Index>(transitions.size());
    nn::Matrix targets = nn::Matrix::Zero(n, 2);
    nn::Matrix mask = nn::Matrix::Zero(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& tr = transitions[static_cast<std::size_t>(i)];
        const int a = static_cast<int>(tr.action);
        targets(i, a) = tr.reward + (tr.terminal ? 0.0 : config_.gamma * q_next.row(i).maxCoeff());
        mask(i, a) = 1.0;
    }
    return net_.sgd_step(x, targets, mask);
}

Action AlertTrigger::decide(const PrefixView& prefix, const EpisodePlan&, const DecisionContext& ctx) const {
    const int t = prefix.t();
    if (t >= prefix.horizon()) return Action::trigger;
    if (ctx.explore && config_.epsilon > 0.0) {
        if (ctx.rng == nullptr) throw ContractError("alert exploration needs a random stream");
        if (uniform01(*ctx.rng) < config_.epsilon) return uniform01(*ctx.rng) < 0.5 ? Action::trigger : Action::wait;
    }
    const auto q = q_values(generate_features(prefix, t));
    return q[1] > q[0] ? Action::trigger : Action::wait;
}

void AlertTrigger::feedback(const FeedbackPacket& packet) {
    if (packet.episode == nullptr || packet.prefix_source == nullptr || std::isnan(packet.realized_loss)) {
        throw ContractError("alert needs its episode, the observed prefix and the realized loss");
    }
    const PrefixView seen(*packet.prefix_source, packet.episode->t_hat);
    train_on(alert_transitions(seen, packet.episode->actions, packet.realized_loss));
}

void AlertTrigger::hash(StateHasher& h) const {
    net_.hash(h);
    h.value(config_.gamma);
    h.value(config_.epsilon);
}

std::string AlertTrigger::snapshot() const {
    nlohmann::json j = {{"trigger", "alert"},
                        {"gamma", config_.gamma},
                        {"epsilon", config_.epsilon},
                        {"pretrain_epochs", config_.pretrain_epochs},
                        {"network", nlohmann::json::parse(net_.to_json())}};
    return j.dump();
}

std::unique_ptr<AlertTrigger> AlertTrigger::restore(std::string_view text) {
    const auto j = nlohmann::json::parse(text);
    nn::Mlp net = nn::Mlp::from_json(j.at("network").dump());
    AlertConfig config;
    config.hidden = net.hidden_dim();
    config.adam = net.adam();
    config.gamma = j.at("gamma").get<double>();
    config.epsilon = j.at("epsilon").get<double>();
    config.pretrain_epochs = j.at("pretrain_epochs").get<int>();
    return std::make_unique<AlertTrigger>(std::move(net), config);
}

}  // namespace ects::triggers
