#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ects {

using ClassId = int;

/// Raised when a caller violates an operation's precondition.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised for invalid user-supplied configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A complete univariate series with its class label.
struct LabeledSeries {
    std::vector<double> values;
    ClassId label = 0;

    int length() const { return static_cast<int>(values.size()); }
};

/// Checks length, label range and finiteness; throws ContractError.
void validate(const LabeledSeries& series, int T, int n_classes);

/// Per-prefix class posteriors p(k | x_t) for t = 1..T, stored row-major.
///
/// Time indices are 1-based throughout the library to match the usual
/// notation t in [1, T]; class indices are 0-based.
class PosteriorTrajectory {
public:
    PosteriorTrajectory() = default;
    PosteriorTrajectory(int T, int n_classes);
    PosteriorTrajectory(int T, int n_classes, std::vector<double> probs);

    int length() const { return T_; }
    int n_classes() const { return K_; }

    std::span<const double> row(int t) const;
    std::span<double> mutable_row(int t);

    /// Largest posterior at t.
    double max_prob(int t) const;
    /// Argmax class at t; ties go to the lowest class index.
    ClassId predicted(int t) const;

    std::span<const double> data() const { return probs_; }

    /// Throws ContractError unless every row is a probability vector (1e-9).
    void validate() const;

private:
    int T_ = 0;
    int K_ = 0;
    std::vector<double> probs_;
};

/// Index of the largest element; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);
/// Index of the smallest element; ties go to the lowest index.
std::size_t argmin(std::span<const double> values);

enum class Weighting {
    weighted,    ///< total = alpha * C_m + (1 - alpha) * C_d
    unweighted,  ///< total = C_m + C_d
};

struct LossBreakdown {
    double misclassification = 0.0;
    double delay = 0.0;
    double total = 0.0;
    double alpha = 1.0;
    Weighting mode = Weighting::weighted;
};

/// Delay cost C_d(t) = scale * t / T.
struct DelayCost {
    double scale = 1.0;

    double operator()(int t, int T) const { return scale * static_cast<double>(t) / static_cast<double>(T); }
};

/// Costs in force for one deployment instance.
///
/// `matrix` is K x K, row = true class, column = predicted class.
struct RealizedCosts {
    int n_classes = 0;
    int T = 0;
    std::int64_t u = 0;
    std::vector<double> matrix;
    DelayCost delay;
    double alpha = 1.0;
    Weighting mode = Weighting::weighted;

    double misclassification(ClassId y_hat, ClassId y_true) const {
        return matrix[static_cast<std::size_t>(y_true) * n_classes + y_hat];
    }
    double max_misclassification() const;

    /// Combines raw cost components according to the weighting mode.
    double combine(double misclassification, double delay) const {
        return mode == Weighting::weighted ? alpha * misclassification + (1.0 - alpha) * delay
                                           : misclassification + delay;
    }

    /// Standard 0/1 misclassification costs with delay t/T.
    static RealizedCosts zero_one(int n_classes, int T, double alpha, Weighting mode = Weighting::weighted);
};

LossBreakdown compute_loss(ClassId y_hat, ClassId y_true, int t, const RealizedCosts& costs);

struct OracleResult {
    int t_star = 1;
    LossBreakdown loss;
};

/// Hindsight-optimal decision time over the full trajectory (earliest on ties).
OracleResult oracle_decision(const PosteriorTrajectory& traj, ClassId y_true, const RealizedCosts& costs);

/// One deployment outcome.
struct DecisionRecord {
    std::int64_t u = 0;
    int t_hat = 1;
    ClassId y_hat = 0;
    ClassId y_true = 0;
    LossBreakdown realized;
    LossBreakdown oracle;
    int t_star = 1;
    double wall_time_infer = 0.0;
    double wall_time_update = 0.0;

    double regret() const { return realized.total - oracle.total; }
};

}  // namespace ects
