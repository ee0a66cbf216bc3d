#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "ects/core.hpp"

namespace ects::classifier {

/// Nondecreasing piecewise-constant map fitted by pool-adjacent-violators.
///
/// Inputs at or below `upper_bounds[i]` (and above the previous bound) map
/// to `values[i]`; inputs beyond the last bound take the last value.
class IsotonicMap {
public:
    IsotonicMap() = default;

    /// Least-squares nondecreasing fit of y on x.
    static IsotonicMap fit(std::span<const double> x, std::span<const double> y);

    double operator()(double x) const;

    const std::vector<double>& upper_bounds() const { return upper_bounds_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> upper_bounds_;
    std::vector<double> values_;
};

/// Pool-adjacent-violators on an already x-sorted sequence with weights.
/// Returns the fitted value for each input position.
std::vector<double> pool_adjacent_violators(std::span<const double> y, std::span<const double> w);

struct TrainConfig {
    int n_checkpoints = 20;
    int iterations = 500;
    double learning_rate = 0.1;
    double l2 = 1e-3;
    double calibration_fraction = 0.2;
    bool calibrate = true;
    std::uint64_t seed = 0;
};

/// Multiclass logistic regression over the fixed feature map of one prefix length.
struct CheckpointClassifier {
    int checkpoint_t = 0;
    int n_features = 0;
    std::vector<double> feature_mean;
    std::vector<double> feature_scale;
    /// K rows of (n_features + 1) coefficients, bias last.
    std::vector<double> weights;
};

/// Fixed feature map of a length-`len` prefix: raw values, mean, std, min,
/// max and normalized position of the max.
std::vector<double> prefix_features(std::span<const double> values, int len);

class ClassifierEnsemble {
public:
    int length() const { return T_; }
    int n_classes() const { return K_; }
    const std::vector<CheckpointClassifier>& checkpoints() const { return checkpoints_; }

    /// Index of the checkpoint serving time t, or -1 before the first one.
    int checkpoint_index(int t) const;

    /// Uncalibrated softmax output of checkpoint `index` on the series prefix.
    std::vector<double> raw_probabilities(int index, std::span<const double> values) const;

    /// Calibrated and renormalized output of checkpoint `index`.
    std::vector<double> probabilities(int index, std::span<const double> values) const;

    PosteriorTrajectory posteriors(const LabeledSeries& series) const;

    friend ClassifierEnsemble train(const std::vector<LabeledSeries>& train_set, int n_classes,
                                    const TrainConfig& config);

private:
    int T_ = 0;
    int K_ = 0;
    std::vector<double> class_prior_;
    std::vector<CheckpointClassifier> checkpoints_;
    /// calibrators_[checkpoint][class]; empty when calibration is disabled.
    std::vector<std::vector<IsotonicMap>> calibrators_;
};

/// Fits one checkpoint model per prefix length T/H, 2T/H, ..., T and the
/// per-class isotonic calibrators on a held-back slice of `train_set`.
ClassifierEnsemble train(const std::vector<LabeledSeries>& train_set, int n_classes, const TrainConfig& config);

/// Posterior trajectories of a whole set, in input order.
std::vector<PosteriorTrajectory> posteriors(const ClassifierEnsemble& ensemble,
                                            const std::vector<LabeledSeries>& data);

/// Fraction of series whose argmax posterior at time t matches the label.
double accuracy_at(const std::vector<PosteriorTrajectory>& trajectories, const std::vector<LabeledSeries>& data,
                   int t);

/// Trajectory cache CSV: series_id, t, p_0..p_{K-1}.
void write_posterior_csv(std::ostream& out, const std::vector<PosteriorTrajectory>& trajectories);
std::vector<PosteriorTrajectory> read_posterior_csv(std::istream& in);

}  // namespace ects::classifier
