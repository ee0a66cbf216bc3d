#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ects/classifier.hpp"
#include "ects/costs.hpp"
#include "ects/datagen.hpp"
#include "ects/registry.hpp"

namespace ects::harness {

/// Dataset, split and classifier settings.
struct DataConfig {
    datagen::GeneratorConfig generator;
    classifier::TrainConfig classifier;
    std::array<double, 3> fractions{0.25, 0.50, 0.25};
};

/// Posterior caches for the three splits, plus reference accuracies.
struct ExperimentData {
    int T = 0;
    int n_classes = 0;
    std::vector<PosteriorTrajectory> train;
    std::vector<ClassId> train_labels;
    std::vector<PosteriorTrajectory> deploy;
    std::vector<ClassId> deploy_labels;
    std::vector<PosteriorTrajectory> holdout;
    std::vector<ClassId> holdout_labels;
    /// Hold-out accuracy of the argmax prediction at t = T/2 and t = T.
    double holdout_accuracy_half = 0.0;
    double holdout_accuracy_full = 0.0;

    void validate() const;
};

/// Generate, split, train the classifier and cache all posteriors.
ExperimentData prepare_experiment(const DataConfig& config);
/// Same, from already generated series.
ExperimentData prepare_experiment(std::vector<LabeledSeries> series, const DataConfig& config);

struct RunConfig {
    costs::Scenario scenario = costs::Scenario::none;
    std::string trigger = "no_adapt";
    triggers::TriggerParams params;
    /// Scenario parameters; scenario, horizon, n_classes and T are filled in per run.
    costs::CostSchedule costs;
    /// Overrides the scenario's default training alpha when set.
    std::optional<double> train_alpha;
    int batch_size = 16;
    int holdout_every = 50;
    std::uint64_t seed = 0;
    /// Record state hashes around every evaluation and update and verify them.
    bool debug_hash = false;
    /// Write measured wall times; off writes zeros so outputs are byte-stable.
    bool record_timing = true;
    /// Feedback the deployment can provide; triggers needing anything else are rejected.
    std::set<triggers::FeedbackKind> available_feedback{
        triggers::FeedbackKind::nothing, triggers::FeedbackKind::full_series_and_costs,
        triggers::FeedbackKind::realized_loss_at_trigger, triggers::FeedbackKind::explicit_cost_spec};

    void validate() const;
};

/// The schedule a run uses over `horizon` deployment steps.
costs::CostSchedule build_schedule(const RunConfig& config, std::int64_t horizon, int n_classes, int T);

/// Order in which deploy series are processed.
std::vector<std::size_t> deployment_order(std::uint64_t seed, std::size_t n);

struct Outcome {
    int t_hat = 1;
    ClassId y_hat = 0;
    ClassId y_true = 0;
};

struct AvgCost {
    double avg_cost = 0.0;
    double earliness = 0.0;
    double error_rate = 0.0;
};

/// Weighted average cost under 0/1 costs and delay t/T; throws on empty input.
AvgCost avg_cost(const std::vector<Outcome>& outcomes, int T, double alpha);
AvgCost avg_cost(const std::vector<DecisionRecord>& records, int T, double alpha);

/// Prefix sums of per-step regret.
std::vector<double> cumulative_regret(const std::vector<DecisionRecord>& records);

struct HoldoutSnapshot {
    std::int64_t u = 0;
    double alpha = 0.0;
    AvgCost metrics;
    std::vector<Outcome> outcomes;
    std::uint64_t hash_before = 0;
    std::uint64_t hash_after = 0;
};

struct MetricsLog {
    std::string trigger;
    costs::Scenario scenario = costs::Scenario::none;
    std::uint64_t seed = 0;
    int T = 0;
    std::vector<DecisionRecord> records;
    std::vector<double> regret_cum;
    std::vector<HoldoutSnapshot> holdout;
    /// Debug mode: hash of the state each record was evaluated with, and the
    /// hash after each batch's update (entry 0 is the initial state).
    std::vector<std::uint64_t> eval_hashes;
    std::vector<std::uint64_t> update_hashes;
    /// Per-batch wall times in seconds.
    std::vector<double> batch_infer_seconds;
    std::vector<double> batch_update_seconds;

    double final_regret() const { return regret_cum.empty() ? 0.0 : regret_cum.back(); }
    double normalized_regret() const {
        return records.empty() ? 0.0 : final_regret() / static_cast<double>(records.size());
    }
};

/// Thrown when a debug state-hash check fails.
class IntegrityError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Prequential run with the trigger built from config.trigger.
MetricsLog run(const RunConfig& config, const ExperimentData& data);
/// Prequential run with a caller-provided trigger (mutated in place).
MetricsLog run(const RunConfig& config, const ExperimentData& data, triggers::TriggerModel& trigger);

/// Hold-out evaluation of a frozen trigger at deployment step u.
HoldoutSnapshot evaluate_holdout(const triggers::TriggerModel& trigger, const ExperimentData& data,
                                 const costs::CostSchedule& schedule, std::int64_t u);

/// Re-checks the debug hashes of a log: every record of batch b was
/// evaluated with the state left by batch b - 1's update, and hold-out
/// evaluation left the state unchanged. Throws IntegrityError.
void verify_integrity(const MetricsLog& log, int batch_size);

void write_steps_csv(std::ostream& out, const MetricsLog& log, bool header = true);
void write_holdout_csv(std::ostream& out, const MetricsLog& log, bool header = true);

struct StepRow {
    std::int64_t u = 0;
    std::string trigger;
    std::string scenario;
    std::uint64_t seed = 0;
    int t_hat = 0;
    ClassId y_hat = 0;
    ClassId y_true = 0;
    double realized_total = 0.0;
    double oracle_total = 0.0;
    double regret_cum = 0.0;
    double infer_ms = 0.0;
    double update_ms = 0.0;
};
std::vector<StepRow> read_steps_csv(std::istream& in);

struct HoldoutRow {
    std::int64_t u = 0;
    double avgcost = 0.0;
    double earliness = 0.0;
    double error_rate = 0.0;
    double alpha_at_u = 0.0;
};
std::vector<HoldoutRow> read_holdout_csv(std::istream& in);

}  // namespace ects::harness
