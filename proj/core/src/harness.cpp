#include "ects/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace ects::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<ClassId> labels_of(const std::vector<LabeledSeries>& data) {
    std::vector<ClassId> out;
    out.reserve(data.size());
    for (const auto& s : data) out.push_back(s.label);
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

void expect_header(std::istream& in, const std::string& expected) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty CSV, expected header: " + expected);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected) throw std::runtime_error("unexpected CSV header '" + line + "', expected '" + expected + "'");
}

constexpr const char* kStepsHeader =
    "u,trigger,scenario,seed,t_hat,y_hat,y_true,realized_total,oracle_total,regret_cum,infer_ms,update_ms";
constexpr const char* kHoldoutHeader = "u,avgcost,earliness,error_rate,alpha_at_u";

std::uint64_t trigger_seed(std::uint64_t seed) { return mix_seed(seed ^ 0x7416'6765'7253ULL); }

}  // namespace

// ---------------------------------------------------------------------------

void ExperimentData::validate() const {
    if (T < 1 || n_classes < 2) throw ContractError("experiment data has invalid dimensions");
    auto check = [&](const std::vector<PosteriorTrajectory>& trajs, const std::vector<ClassId>& labels,
                     const char* what) {
        if (trajs.size() != labels.size()) throw ContractError(std::string(what) + " labels do not match posteriors");
        for (const auto& p : trajs) {
            if (p.length() != T || p.n_classes() != n_classes) {
                throw ContractError(std::string(what) + " posterior has the wrong shape");
            }
        }
        for (ClassId y : labels) {
            if (y < 0 || y >= n_classes) throw ContractError(std::string(what) + " label out of range");
        }
    };
    check(train, train_labels, "train");
    check(deploy, deploy_labels, "deploy");
    check(holdout, holdout_labels, "holdout");
    if (train.empty() || deploy.empty() || holdout.empty()) throw ContractError("every split must be nonempty");
}

ExperimentData prepare_experiment(const DataConfig& config) {
    return prepare_experiment(datagen::generate(config.generator), config);
}

ExperimentData prepare_experiment(std::vector<LabeledSeries> series, const DataConfig& config) {
    if (series.empty()) throw ContractError("no series to prepare");
    const int T = series.front().length();
    int K = 0;
    for (const auto& s : series) K = std::max(K, s.label + 1);
    K = std::max(K, config.generator.n_classes);
    auto splits = datagen::split(std::move(series), config.fractions, config.generator.seed);
    auto clf_config = config.classifier;
    const auto ensemble = classifier::train(splits.train, K, clf_config);

    ExperimentData d;
    d.T = T;
    d.n_classes = K;
    d.train = classifier::posteriors(ensemble, splits.train);
    d.deploy = classifier::posteriors(ensemble, splits.deploy);
    d.holdout = classifier::posteriors(ensemble, splits.holdout);
    d.train_labels = labels_of(splits.train);
    d.deploy_labels = labels_of(splits.deploy);
    d.holdout_labels = labels_of(splits.holdout);
    d.holdout_accuracy_half = classifier::accuracy_at(d.holdout, splits.holdout, std::max(1, T / 2));
    d.holdout_accuracy_full = classifier::accuracy_at(d.holdout, splits.holdout, T);
    d.validate();
    return d;
}

// ---------------------------------------------------------------------------

void RunConfig::validate() const {
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (holdout_every < 1) throw ConfigError("holdout_every must be at least 1");
    if (!triggers::is_trigger_name(trigger)) throw ConfigError("unknown trigger: " + trigger);
    if (train_alpha && (*train_alpha < 0.0 || *train_alpha > 1.0)) throw ConfigError("train_alpha must be in [0, 1]");
}

costs::CostSchedule build_schedule(const RunConfig& config, std::int64_t horizon, int n_classes, int T) {
    costs::CostSchedule s = config.costs;
    s.scenario = config.scenario;
    s.horizon = horizon;
    s.n_classes = n_classes;
    s.T = T;
    s.train_alpha = config.train_alpha ? *config.train_alpha : costs::default_train_alpha(s);
    s.validate();
    return s;
}

std::vector<std::size_t> deployment_order(std::uint64_t seed, std::size_t n) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = make_rng(seed, 1);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

// ---------------------------------------------------------------------------

AvgCost avg_cost(const std::vector<Outcome>& outcomes, int T, double alpha) {
    if (outcomes.empty()) throw ContractError("average cost of an empty set");
    double errors = 0.0;
    double delay = 0.0;
    for (const auto& o : outcomes) {
        if (o.t_hat < 1 || o.t_hat > T) throw ContractError("outcome trigger time outside [1, T]");
        errors += o.y_hat != o.y_true ? 1.0 : 0.0;
        delay += static_cast<double>(o.t_hat) / T;
    }
    const double n = static_cast<double>(outcomes.size());
    AvgCost c;
    c.error_rate = errors / n;
    c.earliness = delay / n;
    double total = 0.0;
    for (const auto& o : outcomes) {
        total += alpha * (o.y_hat != o.y_true ? 1.0 : 0.0) + (1.0 - alpha) * static_cast<double>(o.t_hat) / T;
    }
    c.avg_cost = total / n;
    return c;
}

AvgCost avg_cost(const std::vector<DecisionRecord>& records, int T, double alpha) {
    std::vector<Outcome> outcomes;
    outcomes.reserve(records.size());
    for (const auto& r : records) outcomes.push_back({r.t_hat, r.y_hat, r.y_true});
    return avg_cost(outcomes, T, alpha);
}

std::vector<double> cumulative_regret(const std::vector<DecisionRecord>& records) {
    std::vector<double> out;
    out.reserve(records.size());
    double sum = 0.0;
    for (const auto& r : records) {
        sum += r.regret();
        out.push_back(sum);
    }
    return out;
}

// ---------------------------------------------------------------------------

HoldoutSnapshot evaluate_holdout(const triggers::TriggerModel& trigger, const ExperimentData& data,
                                 const costs::CostSchedule& schedule, std::int64_t u) {
    const std::int64_t cost_step = std::clamp<std::int64_t>(u, 0, schedule.horizon - 1);
    const RealizedCosts truth = costs::expected(schedule, cost_step);
    HoldoutSnapshot snap;
    snap.u = u;
    snap.alpha = costs::alpha_at(schedule, cost_step);
    snap.hash_before = trigger.state_hash();
    triggers::DecisionContext ctx;
    ctx.u = u;
    ctx.explore = false;
    ctx.true_costs = trigger.needs_true_costs() ? &truth : nullptr;
    snap.outcomes.reserve(data.holdout.size());
    for (std::size_t i = 0; i < data.holdout.size(); ++i) {
        const auto ep = triggers::run_episode(trigger, data.holdout[i], ctx);
        snap.outcomes.push_back({ep.t_hat, ep.y_hat, data.holdout_labels[i]});
    }
    snap.hash_after = trigger.state_hash();
    snap.metrics = avg_cost(snap.outcomes, data.T, snap.alpha);
    return snap;
}

MetricsLog run(const RunConfig& config, const ExperimentData& data) {
    config.validate();
    data.validate();
    const auto schedule =
        build_schedule(config, static_cast<std::int64_t>(data.deploy.size()), data.n_classes, data.T);
    const triggers::TrainingCache cache{data.train, data.train_labels, schedule.nominal()};
    auto trigger = triggers::make_trigger(config.trigger, config.params, cache, trigger_seed(config.seed));
    return run(config, data, *trigger);
}

MetricsLog run(const RunConfig& config, const ExperimentData& data, triggers::TriggerModel& trigger) {
    using triggers::FeedbackKind;
    if (config.batch_size < 1 || config.holdout_every < 1) throw ConfigError("batch_size and holdout_every must be >= 1");
    data.validate();
    const FeedbackKind needed = trigger.required_feedback();
    if (!config.available_feedback.contains(needed)) {
        throw ConfigError("trigger " + trigger.name() + " needs feedback '" + triggers::to_string(needed) +
                          "' which this deployment does not provide");
    }
    const auto U = static_cast<std::int64_t>(data.deploy.size());
    const auto schedule = build_schedule(config, U, data.n_classes, data.T);
    const auto order = deployment_order(config.seed, data.deploy.size());
    Rng cost_rng = make_rng(config.seed, 2);
    Rng explore_rng = make_rng(config.seed, 4);

    MetricsLog log;
    log.trigger = trigger.name();
    log.scenario = config.scenario;
    log.seed = config.seed;
    log.T = data.T;
    log.records.reserve(data.deploy.size());
    if (config.debug_hash) log.update_hashes.push_back(trigger.state_hash());

    auto snapshot = [&](std::int64_t u) {
        auto snap = evaluate_holdout(trigger, data, schedule, u);
        if (snap.hash_before != snap.hash_after) {
            throw IntegrityError("hold-out evaluation changed the state of " + trigger.name());
        }
        log.holdout.push_back(std::move(snap));
    };
    snapshot(0);

    const std::int64_t B = config.batch_size;
    std::vector<RealizedCosts> batch_costs;
    std::vector<triggers::Episode> batch_episodes;
    std::int64_t batch_index = 0;
    for (std::int64_t start = 0; start < U; start += B, ++batch_index) {
        const std::int64_t end = std::min(U, start + B);
        batch_costs.clear();
        batch_episodes.clear();
        const std::uint64_t eval_hash = config.debug_hash ? trigger.state_hash() : 0;
        if (config.debug_hash && eval_hash != log.update_hashes.back()) {
            throw IntegrityError("state changed between update and evaluation at u=" + std::to_string(start));
        }

        // Evaluate every instance of the batch against the same frozen state.
        const auto infer_start = Clock::now();
        for (std::int64_t u = start; u < end; ++u) {
            const std::size_t idx = order[static_cast<std::size_t>(u)];
            const auto& traj = data.deploy[idx];
            const ClassId y = data.deploy_labels[idx];
            batch_costs.push_back(costs::realize(schedule, u, y, cost_rng));
            const RealizedCosts truth =
                trigger.needs_true_costs() ? costs::expected(schedule, u) : RealizedCosts{};
            triggers::DecisionContext ctx;
            ctx.u = u;
            ctx.explore = true;
            ctx.rng = &explore_rng;
            ctx.true_costs = trigger.needs_true_costs() ? &truth : nullptr;

            const auto t0 = Clock::now();
            batch_episodes.push_back(triggers::run_episode(trigger, traj, ctx));
            const double infer = seconds_since(t0);

            const auto& ep = batch_episodes.back();
            const auto& costs_u = batch_costs.back();
            DecisionRecord rec;
            rec.u = u;
            rec.t_hat = ep.t_hat;
            rec.y_hat = ep.y_hat;
            rec.y_true = y;
            rec.realized = compute_loss(ep.y_hat, y, ep.t_hat, costs_u);
            const auto oracle = oracle_decision(traj, y, costs_u);
            rec.oracle = oracle.loss;
            rec.t_star = oracle.t_star;
            rec.wall_time_infer = config.record_timing ? infer : 0.0;
            log.records.push_back(rec);
            if (config.debug_hash) log.eval_hashes.push_back(eval_hash);
        }
        log.batch_infer_seconds.push_back(config.record_timing ? seconds_since(infer_start) : 0.0);
        if (config.debug_hash && trigger.state_hash() != eval_hash) {
            throw IntegrityError("evaluation changed the state of " + trigger.name() + " at u=" + std::to_string(start));
        }

        // Update once the whole batch has been scored.
        const auto update_start = Clock::now();
        const auto first = log.records.size() - static_cast<std::size_t>(end - start);
        for (std::int64_t u = start; u < end; ++u) {
            const auto i = static_cast<std::size_t>(u - start);
            const std::size_t idx = order[static_cast<std::size_t>(u)];
            auto& rec = log.records[first + i];
            triggers::FeedbackPacket packet;
            packet.u = u;
            packet.episode = &batch_episodes[i];
            switch (needed) {
                case FeedbackKind::nothing: continue;
                case FeedbackKind::full_series_and_costs:
                    packet.trajectory = &data.deploy[idx];
                    packet.y_true = rec.y_true;
                    packet.costs = &batch_costs[i];
                    break;
                case FeedbackKind::realized_loss_at_trigger:
                    packet.prefix_source = &data.deploy[idx];
                    packet.realized_loss = rec.realized.total;
                    packet.max_loss = costs::max_loss(batch_costs[i]);
                    break;
                case FeedbackKind::explicit_cost_spec:
                    // The explicit cost spec is refreshed once per batch, below.
                    continue;
            }
            const auto t0 = Clock::now();
            trigger.feedback(packet);
            if (config.record_timing) rec.wall_time_update = seconds_since(t0);
        }
        if (needed == FeedbackKind::explicit_cost_spec) {
            triggers::FeedbackPacket packet;
            packet.u = end - 1;
            packet.cost_spec = &batch_costs.back();
            const auto t0 = Clock::now();
            trigger.feedback(packet);
            if (config.record_timing) {
                const double share = seconds_since(t0) / static_cast<double>(end - start);
                for (std::size_t i = first; i < log.records.size(); ++i) log.records[i].wall_time_update = share;
            }
        }
        log.batch_update_seconds.push_back(config.record_timing ? seconds_since(update_start) : 0.0);
        if (config.debug_hash) log.update_hashes.push_back(trigger.state_hash());

        const bool last = end == U;
        if ((batch_index + 1) % config.holdout_every == 0 || last) snapshot(end);
    }
    log.regret_cum = cumulative_regret(log.records);
    if (config.debug_hash) verify_integrity(log, config.batch_size);
    return log;
}

void verify_integrity(const MetricsLog& log, int batch_size) {
    if (batch_size < 1) throw ContractError("batch size must be positive");
    if (log.eval_hashes.size() != log.records.size()) throw IntegrityError("missing evaluation hashes");
    const std::size_t batches = (log.records.size() + static_cast<std::size_t>(batch_size) - 1) /
                                static_cast<std::size_t>(batch_size);
    if (log.update_hashes.size() != batches + 1) throw IntegrityError("missing update hashes");
    for (std::size_t i = 0; i < log.records.size(); ++i) {
        const std::size_t b = i / static_cast<std::size_t>(batch_size);
        if (log.eval_hashes[i] != log.update_hashes[b]) {
            throw IntegrityError("record u=" + std::to_string(log.records[i].u) +
                                 " was not evaluated with the state left by the previous update");
        }
    }
    for (const auto& s : log.holdout) {
        if (s.hash_before != s.hash_after) throw IntegrityError("hold-out evaluation changed trigger state");
    }
}

// ---------------------------------------------------------------------------

void write_steps_csv(std::ostream& out, const MetricsLog& log, bool header) {
    if (header) out << kStepsHeader << '\n';
    const std::string scenario(costs::to_string(log.scenario));
    for (std::size_t i = 0; i < log.records.size(); ++i) {
        const auto& r = log.records[i];
        out << r.u << ',' << log.trigger << ',' << scenario << ',' << log.seed << ',' << r.t_hat << ',' << r.y_hat
            << ',' << r.y_true << ',' << fmt(r.realized.total) << ',' << fmt(r.oracle.total) << ','
            << fmt(log.regret_cum.at(i)) << ',' << fmt(r.wall_time_infer * 1e3) << ',' << fmt(r.wall_time_update * 1e3)
            << '\n';
    }
}

void write_holdout_csv(std::ostream& out, const MetricsLog& log, bool header) {
    if (header) out << kHoldoutHeader << '\n';
    for (const auto& s : log.holdout) {
        out << s.u << ',' << fmt(s.metrics.avg_cost) << ',' << fmt(s.metrics.earliness) << ','
            << fmt(s.metrics.error_rate) << ',' << fmt(s.alpha) << '\n';
    }
}

std::vector<StepRow> read_steps_csv(std::istream& in) {
    expect_header(in, kStepsHeader);
    std::vector<StepRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 12) throw std::runtime_error("steps.csv row has " + std::to_string(f.size()) + " fields");
        StepRow r;
        r.u = std::stoll(f[0]);
        r.trigger = f[1];
        r.scenario = f[2];
        r.seed = std::stoull(f[3]);
        r.t_hat = std::stoi(f[4]);
        r.y_hat = std::stoi(f[5]);
        r.y_true = std::stoi(f[6]);
        r.realized_total = std::stod(f[7]);
        r.oracle_total = std::stod(f[8]);
        r.regret_cum = std::stod(f[9]);
        r.infer_ms = std::stod(f[10]);
        r.update_ms = std::stod(f[11]);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<HoldoutRow> read_holdout_csv(std::istream& in) {
    expect_header(in, kHoldoutHeader);
    std::vector<HoldoutRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 5) throw std::runtime_error("holdout.csv row has " + std::to_string(f.size()) + " fields");
        rows.push_back({std::stoll(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4])});
    }
    return rows;
}

}  // namespace ects::harness
