#include "ects/classifier.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ects/rng.hpp"

namespace ects::classifier {

std::vector<double> pool_adjacent_violators(std::span<const double> y, std::span<const double> w) {
    if (y.size() != w.size()) throw ContractError("PAV: value and weight sizes differ");
    struct Block {
        double sum_wy;
        double sum_w;
        std::size_t count;
        double mean() const { return sum_wy / sum_w; }
    };
    std::vector<Block> blocks;
    blocks.reserve(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        blocks.push_back({w[i] * y[i], w[i], 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
            Block b = blocks.back();
            blocks.pop_back();
            blocks.back().sum_wy += b.sum_wy;
            blocks.back().sum_w += b.sum_w;
            blocks.back().count += b.count;
        }
    }
    std::vector<double> fitted;
    fitted.reserve(y.size());
    for (const Block& b : blocks) fitted.insert(fitted.end(), b.count, b.mean());
    return fitted;
}

IsotonicMap IsotonicMap::fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.empty()) throw ContractError("isotonic fit needs equal-length nonempty inputs");
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

    // Collapse duplicate x so the map is a function of x.
    std::vector<double> xs, ys, ws;
    for (std::size_t idx : order) {
        if (!xs.empty() && xs.back() == x[idx]) {
            ys.back() += y[idx];
            ws.back() += 1.0;
        } else {
            xs.push_back(x[idx]);
            ys.push_back(y[idx]);
            ws.push_back(1.0);
        }
    }
    for (std::size_t i = 0; i < ys.size(); ++i) ys[i] /= ws[i];
    const std::vector<double> fitted = pool_adjacent_violators(ys, ws);

    IsotonicMap m;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!m.values_.empty() && m.values_.back() == fitted[i]) {
            m.upper_bounds_.back() = xs[i];
        } else {
            m.upper_bounds_.push_back(xs[i]);
            m.values_.push_back(fitted[i]);
        }
    }
    return m;
}

double IsotonicMap::operator()(double x) const {
    if (values_.empty()) return x;
    auto it = std::lower_bound(upper_bounds_.begin(), upper_bounds_.end(), x);
    if (it == upper_bounds_.end()) return values_.back();
    return values_[static_cast<std::size_t>(it - upper_bounds_.begin())];
}

std::vector<double> prefix_features(std::span<const double> values, int len) {
    if (len < 1 || static_cast<std::size_t>(len) > values.size()) throw ContractError("prefix length out of range");
    std::vector<double> f(values.begin(), values.begin() + len);
    double mean = 0.0;
    for (int i = 0; i < len; ++i) mean += values[static_cast<std::size_t>(i)];
    mean /= len;
    double var = 0.0;
    for (int i = 0; i < len; ++i) var += (values[static_cast<std::size_t>(i)] - mean) * (values[static_cast<std::size_t>(i)] - mean);
    var /= len;
    const auto first = values.begin();
    const auto last = values.begin() + len;
    const auto max_it = std::max_element(first, last);
    f.push_back(mean);
    f.push_back(std::sqrt(var));
    f.push_back(*std::min_element(first, last));
    f.push_back(*max_it);
    f.push_back(static_cast<double>(max_it - first) / len);
    return f;
}

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void softmax_rows(Matrix& logits) {
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        auto row = logits.row(r);
        row.array() -= row.maxCoeff();
        row = row.array().exp().matrix();
        row /= row.sum();
    }
}

std::vector<int> checkpoint_lengths(int T, int H) {
    if (H < 1) throw ConfigError("n_checkpoints must be positive");
    std::vector<int> out;
    for (int h = 1; h <= H; ++h) {
        int t = static_cast<int>(std::lround(static_cast<double>(T) * h / H));
        t = std::clamp(t, 1, T);
        if (out.empty() || out.back() != t) out.push_back(t);
    }
    return out;
}

CheckpointClassifier fit_checkpoint(const std::vector<const LabeledSeries*>& data, int n_classes, int len,
                                    const TrainConfig& config) {
    CheckpointClassifier model;
    model.checkpoint_t = len;
    const auto n = static_cast<Eigen::Index>(data.size());
    model.n_features = len + 5;
    const Eigen::Index d = model.n_features;

    Matrix X(n, d + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto f = prefix_features(data[static_cast<std::size_t>(i)]->values, len);
        for (Eigen::Index j = 0; j < d; ++j) X(i, j) = f[static_cast<std::size_t>(j)];
        X(i, d) = 1.0;
    }
    model.feature_mean.assign(static_cast<std::size_t>(d), 0.0);
    model.feature_scale.assign(static_cast<std::size_t>(d), 1.0);
    for (Eigen::Index j = 0; j < d; ++j) {
        const double mean = X.col(j).mean();
        const double sd = std::sqrt((X.col(j).array() - mean).square().mean());
        model.feature_mean[static_cast<std::size_t>(j)] = mean;
        model.feature_scale[static_cast<std::size_t>(j)] = sd > 1e-12 ? sd : 1.0;
        X.col(j) = (X.col(j).array() - mean) / model.feature_scale[static_cast<std::size_t>(j)];
    }

    Matrix Y = Matrix::Zero(n, n_classes);
    for (Eigen::Index i = 0; i < n; ++i) Y(i, data[static_cast<std::size_t>(i)]->label) = 1.0;

    Matrix W = Matrix::Zero(n_classes, d + 1);
    Matrix reg_mask = Matrix::Ones(n_classes, d + 1);
    reg_mask.col(d).setZero();
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int it = 0; it < config.iterations; ++it) {
        Matrix P = X * W.transpose();
        softmax_rows(P);
        Matrix grad = (P - Y).transpose() * X * inv_n;
        grad.array() += config.l2 * (W.array() * reg_mask.array());
        W -= config.learning_rate * grad;
    }
    model.weights.assign(W.data(), W.data() + W.size());
    return model;
}

}  // namespace

int ClassifierEnsemble::checkpoint_index(int t) const {
    if (t < 1 || t > T_) throw ContractError("time index outside [1, T]");
    int idx = -1;
    for (std::size_t i = 0; i < checkpoints_.size(); ++i) {
        if (checkpoints_[i].checkpoint_t <= t) idx = static_cast<int>(i);
    }
    return idx;
}

std::vector<double> ClassifierEnsemble::raw_probabilities(int index, std::span<const double> values) const {
    const CheckpointClassifier& m = checkpoints_.at(static_cast<std::size_t>(index));
    const auto f = prefix_features(values, m.checkpoint_t);
    const auto stride = static_cast<std::size_t>(m.n_features + 1);
    std::vector<double> logits(static_cast<std::size_t>(K_));
    for (int k = 0; k < K_; ++k) {
        const double* w = m.weights.data() + static_cast<std::size_t>(k) * stride;
        double z = w[m.n_features];
        for (int j = 0; j < m.n_features; ++j) {
            const auto js = static_cast<std::size_t>(j);
            z += w[j] * (f[js] - m.feature_mean[js]) / m.feature_scale[js];
        }
        logits[static_cast<std::size_t>(k)] = z;
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& z : logits) {
        z = std::exp(z - mx);
        sum += z;
    }
    for (double& z : logits) z /= sum;
    return logits;
}

std::vector<double> ClassifierEnsemble::probabilities(int index, std::span<const double> values) const {
    std::vector<double> p = raw_probabilities(index, values);
    if (calibrators_.empty()) return p;
    std::vector<double> cal(p.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        cal[k] = std::clamp(calibrators_[static_cast<std::size_t>(index)][k](p[k]), 0.0, 1.0);
        sum += cal[k];
    }
    if (sum <= 0.0) return p;
    for (double& c : cal) c /= sum;
    return cal;
}

PosteriorTrajectory ClassifierEnsemble::posteriors(const LabeledSeries& series) const {
    if (series.length() != T_) throw ContractError("series length does not match the ensemble");
    PosteriorTrajectory traj(T_, K_);
    int cached_index = -2;
    std::vector<double> cached;
    for (int t = 1; t <= T_; ++t) {
        const int idx = checkpoint_index(t);
        if (idx != cached_index) {
            cached = idx < 0 ? class_prior_ : probabilities(idx, series.values);
            cached_index = idx;
        }
        std::copy(cached.begin(), cached.end(), traj.mutable_row(t).begin());
    }
    return traj;
}

ClassifierEnsemble train(const std::vector<LabeledSeries>& train_set, int n_classes, const TrainConfig& config) {
    if (train_set.empty()) throw ContractError("empty training set");
    if (n_classes < 2) throw ContractError("need at least two classes");
    const int T = train_set.front().length();
    for (const auto& s : train_set) validate(s, T, n_classes);

    std::vector<const LabeledSeries*> shuffled;
    for (const auto& s : train_set) shuffled.push_back(&s);
    Rng rng = make_rng(config.seed, 0xC1A55ULL);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);

    const auto n_cal = config.calibrate
                           ? static_cast<std::size_t>(std::floor(config.calibration_fraction * shuffled.size()))
                           : std::size_t{0};
    std::vector<const LabeledSeries*> fit_part(shuffled.begin() + static_cast<std::ptrdiff_t>(n_cal), shuffled.end());
    std::vector<const LabeledSeries*> cal_part(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_cal));

    std::vector<int> class_counts(static_cast<std::size_t>(n_classes), 0);
    for (const auto* s : fit_part) ++class_counts[static_cast<std::size_t>(s->label)];
    for (int k = 0; k < n_classes; ++k) {
        if (class_counts[static_cast<std::size_t>(k)] == 0) {
            throw ContractError("class " + std::to_string(k) + " has no training series");
        }
    }

    ClassifierEnsemble ens;
    ens.T_ = T;
    ens.K_ = n_classes;
    ens.class_prior_.resize(static_cast<std::size_t>(n_classes));
    for (int k = 0; k < n_classes; ++k) {
        ens.class_prior_[static_cast<std::size_t>(k)] =
            static_cast<double>(class_counts[static_cast<std::size_t>(k)]) / static_cast<double>(fit_part.size());
    }
    for (int len : checkpoint_lengths(T, config.n_checkpoints)) {
        ens.checkpoints_.push_back(fit_checkpoint(fit_part, n_classes, len, config));
    }

    if (config.calibrate && !cal_part.empty()) {
        for (std::size_t c = 0; c < ens.checkpoints_.size(); ++c) {
            std::vector<std::vector<double>> scores(static_cast<std::size_t>(n_classes));
            std::vector<std::vector<double>> hits(static_cast<std::size_t>(n_classes));
            for (const auto* s : cal_part) {
                const auto p = ens.raw_probabilities(static_cast<int>(c), s->values);
                for (int k = 0; k < n_classes; ++k) {
                    scores[static_cast<std::size_t>(k)].push_back(p[static_cast<std::size_t>(k)]);
                    hits[static_cast<std::size_t>(k)].push_back(s->label == k ? 1.0 : 0.0);
                }
            }
            std::vector<IsotonicMap> maps;
            for (int k = 0; k < n_classes; ++k) {
                maps.push_back(IsotonicMap::fit(scores[static_cast<std::size_t>(k)], hits[static_cast<std::size_t>(k)]));
            }
            ens.calibrators_.push_back(std::move(maps));
        }
    }
    return ens;
}

std::vector<PosteriorTrajectory> posteriors(const ClassifierEnsemble& ensemble, const std::vector<LabeledSeries>& data) {
    std::vector<PosteriorTrajectory> out;
    out.reserve(data.size());
    for (const auto& s : data) out.push_back(ensemble.posteriors(s));
    return out;
}

double accuracy_at(const std::vector<PosteriorTrajectory>& trajectories, const std::vector<LabeledSeries>& data,
                   int t) {
    if (trajectories.size() != data.size() || data.empty()) throw ContractError("accuracy needs matching nonempty sets");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.size(); ++i) hits += trajectories[i].predicted(t) == data[i].label ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

void write_posterior_csv(std::ostream& out, const std::vector<PosteriorTrajectory>& trajectories) {
    out.precision(17);
    for (std::size_t id = 0; id < trajectories.size(); ++id) {
        const auto& traj = trajectories[id];
        for (int t = 1; t <= traj.length(); ++t) {
            out << id << ',' << t;
            for (double p : traj.row(t)) out << ',' << p;
            out << '\n';
        }
    }
}

std::vector<PosteriorTrajectory> read_posterior_csv(std::istream& in) {
    struct Row {
        std::size_t id;
        int t;
        std::vector<double> p;
    };
    std::vector<Row> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        Row r{};
        try {
            std::getline(ss, cell, ',');
            r.id = std::stoul(cell);
            std::getline(ss, cell, ',');
            r.t = std::stoi(cell);
            while (std::getline(ss, cell, ',')) r.p.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw ConfigError("malformed posterior CSV at line " + std::to_string(line_no));
        }
        if (r.p.empty() || (!rows.empty() && r.p.size() != rows.front().p.size())) {
            throw ConfigError("inconsistent class count at line " + std::to_string(line_no));
        }
        rows.push_back(std::move(r));
    }
    std::vector<PosteriorTrajectory> out;
    std::size_t i = 0;
    while (i < rows.size()) {
        const std::size_t id = rows[i].id;
        if (id != out.size()) throw ConfigError("posterior CSV series ids must be consecutive from 0");
        std::size_t j = i;
        std::vector<double> flat;
        while (j < rows.size() && rows[j].id == id) {
            if (rows[j].t != static_cast<int>(j - i) + 1) throw ConfigError("posterior CSV time steps must run 1..T");
            flat.insert(flat.end(), rows[j].p.begin(), rows[j].p.end());
            ++j;
        }
        const int T = static_cast<int>(j - i);
        const int K = static_cast<int>(rows[i].p.size());
        if (!out.empty() && out.front().length() != T) throw ConfigError("posterior CSV series lengths differ");
        out.emplace_back(T, K, std::move(flat));
        i = j;
    }
    return out;
}

}  // namespace ects::classifier
