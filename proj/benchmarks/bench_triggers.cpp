#include <benchmark/benchmark.h>

#include <memory>
#include <string>

#include "ects/costs.hpp"
#include "ects/harness.hpp"
#include "ects/nn.hpp"
#include "ects/registry.hpp"

namespace {

using namespace ects;

/// Small real dataset shared by every benchmark: 2,000 series, T = 40.
const harness::ExperimentData& bench_data() {
    static const harness::ExperimentData data = [] {
        harness::DataConfig cfg;
        cfg.generator.n_series = 2000;
        return harness::prepare_experiment(cfg);
    }();
    return data;
}

std::unique_ptr<triggers::TriggerModel> build(const std::string& name) {
    const auto& d = bench_data();
    const triggers::TrainingCache cache{d.train, d.train_labels, RealizedCosts::zero_one(d.n_classes, d.T, 0.8)};
    return triggers::make_trigger(name, triggers::TriggerParams{}, cache, 1);
}

/// One deployment episode (plan plus per-step decisions) with exploration on.
void BM_Decide(benchmark::State& state, std::string name) {
    const auto& d = bench_data();
    auto trigger = build(name);
    const auto truth = RealizedCosts::zero_one(d.n_classes, d.T, 0.4);
    Rng rng = make_rng(2);
    triggers::DecisionContext ctx;
    ctx.explore = true;
    ctx.rng = &rng;
    ctx.true_costs = trigger->needs_true_costs() ? &truth : nullptr;
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(triggers::run_episode(*trigger, d.deploy[i], ctx));
        i = (i + 1) % d.deploy.size();
    }
}

/// One feedback call as the harness would issue it after an episode.
void BM_Feedback(benchmark::State& state, std::string name) {
    const auto& d = bench_data();
    auto trigger = build(name);
    const auto costs = RealizedCosts::zero_one(d.n_classes, d.T, 0.4);
    Rng rng = make_rng(3);
    triggers::DecisionContext ctx;
    ctx.explore = true;
    ctx.rng = &rng;
    ctx.true_costs = &costs;
    std::size_t i = 0;
    for (auto _ : state) {
        state.PauseTiming();
        const auto ep = triggers::run_episode(*trigger, d.deploy[i], ctx);
        triggers::FeedbackPacket p;
        p.episode = &ep;
        switch (trigger->required_feedback()) {
            case triggers::FeedbackKind::nothing: break;
            case triggers::FeedbackKind::full_series_and_costs:
                p.trajectory = &d.deploy[i];
                p.y_true = d.deploy_labels[i];
                p.costs = &costs;
                break;
            case triggers::FeedbackKind::realized_loss_at_trigger:
                p.prefix_source = &d.deploy[i];
                p.realized_loss = compute_loss(ep.y_hat, d.deploy_labels[i], ep.t_hat, costs).total;
                p.max_loss = costs::max_loss(costs);
                break;
            case triggers::FeedbackKind::explicit_cost_spec: p.cost_spec = &costs; break;
        }
        state.ResumeTiming();
        trigger->feedback(p);
        i = (i + 1) % d.deploy.size();
    }
}

void BM_MlpForward(benchmark::State& state) {
    const nn::Mlp net(6, 64, 2, 1);
    const nn::Matrix x = nn::Matrix::Random(state.range(0), 6);
    for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
}

void BM_MlpStep(benchmark::State& state) {
    nn::Mlp net(6, 64, 1, 1);
    const nn::Matrix x = nn::Matrix::Random(state.range(0), 6);
    const nn::Matrix y = nn::Matrix::Random(state.range(0), 1);
    for (auto _ : state) benchmark::DoNotOptimize(net.sgd_step(x, y));
}

/// A complete prequential run over the 1,000 deploy series.
void BM_PrequentialRun(benchmark::State& state, std::string name) {
    const auto& d = bench_data();
    harness::RunConfig rc;
    rc.scenario = costs::Scenario::ac_d;
    rc.trigger = name;
    rc.record_timing = false;
    for (auto _ : state) benchmark::DoNotOptimize(harness::run(rc, d));
}

const int registered = [] {
    for (const auto& name : triggers::trigger_names()) {
        benchmark::RegisterBenchmark(("Decide/" + name).c_str(), BM_Decide, name);
        benchmark::RegisterBenchmark(("Feedback/" + name).c_str(), BM_Feedback, name);
        benchmark::RegisterBenchmark(("PrequentialRun/" + name).c_str(), BM_PrequentialRun, name)
            ->Unit(benchmark::kMillisecond)
            ->Iterations(3);
    }
    return 0;
}();

}  // namespace

BENCHMARK(BM_MlpForward)->Arg(1)->Arg(40);
BENCHMARK(BM_MlpStep)->Arg(39);

BENCHMARK_MAIN();
