#include "ects/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ects {

void validate(const LabeledSeries& series, int T, int n_classes) {
    if (series.length() != T) {
        throw ContractError("series length " + std::to_string(series.length()) + " != T=" + std::to_string(T));
    }
    if (series.label < 0 || series.label >= n_classes) {
        throw ContractError("label " + std::to_string(series.label) + " outside [0, " + std::to_string(n_classes) + ")");
    }
    for (double v : series.values) {
        if (!std::isfinite(v)) throw ContractError("series contains a non-finite value");
    }
}

PosteriorTrajectory::PosteriorTrajectory(int T, int n_classes)
    : T_(T), K_(n_classes), probs_(static_cast<std::size_t>(T) * n_classes, 0.0) {
    if (T <= 0 || n_classes <= 0) throw ContractError("trajectory dimensions must be positive");
}

PosteriorTrajectory::PosteriorTrajectory(int T, int n_classes, std::vector<double> probs)
    : T_(T), K_(n_classes), probs_(std::move(probs)) {
    if (T <= 0 || n_classes <= 0) throw ContractError("trajectory dimensions must be positive");
    if (probs_.size() != static_cast<std::size_t>(T) * n_classes) {
        throw ContractError("trajectory buffer size does not match T x K");
    }
}

std::span<const double> PosteriorTrajectory::row(int t) const {
    if (t < 1 || t > T_) throw ContractError("time index " + std::to_string(t) + " outside [1, T]");
    return {probs_.data() + static_cast<std::size_t>(t - 1) * K_, static_cast<std::size_t>(K_)};
}

std::span<double> PosteriorTrajectory::mutable_row(int t) {
    if (t < 1 || t > T_) throw ContractError("time index " + std::to_string(t) + " outside [1, T]");
    return {probs_.data() + static_cast<std::size_t>(t - 1) * K_, static_cast<std::size_t>(K_)};
}

double PosteriorTrajectory::max_prob(int t) const {
    auto r = row(t);
    return *std::max_element(r.begin(), r.end());
}

ClassId PosteriorTrajectory::predicted(int t) const { return static_cast<ClassId>(argmax(row(t))); }

void PosteriorTrajectory::validate() const {
    for (int t = 1; t <= T_; ++t) {
        double sum = 0.0;
        for (double p : row(t)) {
            if (!(p >= 0.0 && p <= 1.0)) throw ContractError("posterior entry outside [0,1] at t=" + std::to_string(t));
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw ContractError("posterior row does not sum to 1 at t=" + std::to_string(t));
    }
}

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

std::size_t argmin(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] < values[best]) best = i;
    }
    return best;
}

double RealizedCosts::max_misclassification() const {
    return matrix.empty() ? 0.0 : *std::max_element(matrix.begin(), matrix.end());
}

RealizedCosts RealizedCosts::zero_one(int n_classes, int T, double alpha, Weighting mode) {
    RealizedCosts c;
    c.n_classes = n_classes;
    c.T = T;
    c.alpha = alpha;
    c.mode = mode;
    c.matrix.assign(static_cast<std::size_t>(n_classes) * n_classes, 1.0);
    for (int k = 0; k < n_classes; ++k) c.matrix[static_cast<std::size_t>(k) * n_classes + k] = 0.0;
    return c;
}

LossBreakdown compute_loss(ClassId y_hat, ClassId y_true, int t, const RealizedCosts& costs) {
    if (t < 1 || t > costs.T) {
        throw ContractError("decision time " + std::to_string(t) + " outside [1, " + std::to_string(costs.T) + "]");
    }
    if (y_hat < 0 || y_hat >= costs.n_classes || y_true < 0 || y_true >= costs.n_classes) {
        throw ContractError("class index outside cost matrix");
    }
    LossBreakdown out;
    out.misclassification = costs.misclassification(y_hat, y_true);
    out.delay = costs.delay(t, costs.T);
    out.alpha = costs.alpha;
    out.mode = costs.mode;
    out.total = costs.combine(out.misclassification, out.delay);
    return out;
}

OracleResult oracle_decision(const PosteriorTrajectory& traj, ClassId y_true, const RealizedCosts& costs) {
    if (traj.length() != costs.T) throw ContractError("trajectory length does not match cost horizon");
    OracleResult best;
    best.loss.total = std::numeric_limits<double>::infinity();
    for (int t = 1; t <= traj.length(); ++t) {
        LossBreakdown l = compute_loss(traj.predicted(t), y_true, t, costs);
        if (l.total < best.loss.total) {
            best.t_star = t;
            best.loss = l;
        }
    }
    return best;
}

}  // namespace ects
