#include "ects/nn.hpp"

#include <json.hpp>

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace ects::nn {

namespace {

Matrix leaky(const Matrix& z) { return z.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; }); }
Matrix leaky_grad(const Matrix& z) { return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : kLeakySlope; }); }

Gradients zeros_like(const Matrix& w1, const Vector& b1, const Matrix& w2, const Vector& b2) {
    return {Matrix::Zero(w1.rows(), w1.cols()), Vector::Zero(b1.size()), Matrix::Zero(w2.rows(), w2.cols()),
            Vector::Zero(b2.size())};
}

void append(std::vector<double>& out, const Matrix& m) { out.insert(out.end(), m.data(), m.data() + m.size()); }

std::size_t take(const std::vector<double>& flat, std::size_t pos, Matrix& m) {
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(pos),
              flat.begin() + static_cast<std::ptrdiff_t>(pos + static_cast<std::size_t>(m.size())), m.data());
    return pos + static_cast<std::size_t>(m.size());
}

void write_doubles(std::ostream& out, const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_doubles(std::istream& in, std::size_t n) {
    std::vector<double> v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw std::runtime_error("truncated network checkpoint");
    return v;
}

}  // namespace

Mlp::Mlp(int in, int hidden, int out, std::uint64_t seed, AdamConfig adam) : seed_(seed), adam_(adam) {
    if (in < 1 || hidden < 1 || out < 1) throw std::invalid_argument("network dimensions must be positive");
    Rng rng = make_rng(seed, 0x4E4E);
    auto glorot = [&](int fan_out, int fan_in) {
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        Matrix w(fan_out, fan_in);
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = (2.0 * uniform01(rng) - 1.0) * limit;
        }
        return w;
    };
    w1_ = glorot(hidden, in);
    b1_ = Vector::Zero(hidden);
    w2_ = glorot(out, hidden);
    b2_ = Vector::Zero(out);
    m_ = zeros_like(w1_, b1_, w2_, b2_);
    v_ = zeros_like(w1_, b1_, w2_, b2_);
}

Matrix Mlp::forward(const Matrix& batch) const {
    if (batch.cols() != w1_.cols()) {
        throw std::invalid_argument("input width " + std::to_string(batch.cols()) + " != " +
                                    std::to_string(w1_.cols()));
    }
    const Matrix z1 = (batch * w1_.transpose()).rowwise() + b1_.transpose();
    return (leaky(z1) * w2_.transpose()).rowwise() + b2_.transpose();
}

double Mlp::loss(const Matrix& batch, const Matrix& targets, const Matrix& mask) const {
    const Matrix out = forward(batch);
    if (targets.rows() != out.rows() || targets.cols() != out.cols() || mask.rows() != out.rows() ||
        mask.cols() != out.cols()) {
        throw std::invalid_argument("target or mask shape does not match network output");
    }
    const double count = (mask.array() != 0.0).cast<double>().sum();
    if (count == 0.0) return 0.0;
    return ((out - targets).array().square() * (mask.array() != 0.0).cast<double>()).sum() / count;
}

Gradients Mlp::gradients(const Matrix& batch, const Matrix& targets, const Matrix& mask) const {
    if (batch.cols() != w1_.cols()) throw std::invalid_argument("input width does not match network");
    const Matrix z1 = (batch * w1_.transpose()).rowwise() + b1_.transpose();
    const Matrix h = leaky(z1);
    const Matrix out = (h * w2_.transpose()).rowwise() + b2_.transpose();
    if (targets.rows() != out.rows() || targets.cols() != out.cols() || mask.rows() != out.rows() ||
        mask.cols() != out.cols()) {
        throw std::invalid_argument("target or mask shape does not match network output");
    }
    const Matrix active = (mask.array() != 0.0).cast<double>().matrix();
    const double count = active.sum();
    Gradients g = zeros_like(w1_, b1_, w2_, b2_);
    if (count == 0.0) return g;

    const Matrix d_out = (2.0 / count) * (out - targets).cwiseProduct(active);
    g.w2 = d_out.transpose() * h;
    g.b2 = d_out.colwise().sum().transpose();
    const Matrix d_z1 = (d_out * w2_).cwiseProduct(leaky_grad(z1));
    g.w1 = d_z1.transpose() * batch;
    g.b1 = d_z1.colwise().sum().transpose();
    return g;
}

double Mlp::sgd_step(const Matrix& batch, const Matrix& targets, const Matrix& mask) {
    if (!targets.allFinite()) throw NumericError("non-finite training targets");
    const double before = loss(batch, targets, mask);
    if (!std::isfinite(before)) {
        std::ostringstream msg;
        msg << "non-finite loss at step " << step_ << " (batch " << batch.rows() << "x" << batch.cols()
            << ", max |w1| " << w1_.cwiseAbs().maxCoeff() << ", max |w2| " << w2_.cwiseAbs().maxCoeff() << ")";
        throw NumericError(msg.str());
    }
    const Gradients g = gradients(batch, targets, mask);
    ++step_;
    const double bc1 = 1.0 - std::pow(adam_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(adam_.beta2, static_cast<double>(step_));
    auto update = [&](auto& param, auto& m, auto& v, const auto& grad) {
        m = adam_.beta1 * m + (1.0 - adam_.beta1) * grad;
        v = adam_.beta2 * v + (1.0 - adam_.beta2) * grad.cwiseProduct(grad);
        param.array() -= adam_.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + adam_.epsilon);
    };
    update(w1_, m_.w1, v_.w1, g.w1);
    update(b1_, m_.b1, v_.b1, g.b1);
    update(w2_, m_.w2, v_.w2, g.w2);
    update(b2_, m_.b2, v_.b2, g.b2);
    return before;
}

double Mlp::sgd_step(const Matrix& batch, const Matrix& targets) {
    return sgd_step(batch, targets, Matrix::Ones(targets.rows(), targets.cols()));
}

std::vector<double> Mlp::parameters() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    append(out, w1_);
    append(out, b1_);
    append(out, w2_);
    append(out, b2_);
    return out;
}

void Mlp::set_parameters(const std::vector<double>& flat) {
    if (flat.size() != parameter_count()) throw std::invalid_argument("parameter vector has the wrong size");
    std::size_t pos = 0;
    pos = take(flat, pos, w1_);
    Matrix b1 = b1_;
    pos = take(flat, pos, b1);
    b1_ = b1;
    pos = take(flat, pos, w2_);
    Matrix b2 = b2_;
    take(flat, pos, b2);
    b2_ = b2;
}

std::vector<double> Mlp::flatten(const Gradients& g) {
    std::vector<double> out;
    append(out, g.w1);
    append(out, g.b1);
    append(out, g.w2);
    append(out, g.b2);
    return out;
}

std::size_t Mlp::parameter_count() const {
    return static_cast<std::size_t>(w1_.size() + b1_.size() + w2_.size() + b2_.size());
}

void Mlp::hash(StateHasher& h) const {
    h.range(parameters());
    h.range(flatten(m_));
    h.range(flatten(v_));
    h.value(step_);
}

void Mlp::save(std::ostream& out) const {
    nlohmann::json header = {
        {"format", "ects-mlp"},
        {"dims", {input_dim(), hidden_dim(), output_dim()}},
        {"seed", seed_},
        {"step", step_},
        {"adam", {{"lr", adam_.learning_rate}, {"beta1", adam_.beta1}, {"beta2", adam_.beta2}, {"eps", adam_.epsilon}}},
        {"count", parameter_count()},
    };
    out << header.dump() << '\n';
    write_doubles(out, parameters());
    write_doubles(out, flatten(m_));
    write_doubles(out, flatten(v_));
}

Mlp Mlp::load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("missing network checkpoint header");
    const auto header = nlohmann::json::parse(line);
    if (header.at("format") != "ects-mlp") throw std::runtime_error("not a network checkpoint");
    const auto dims = header.at("dims").get<std::vector<int>>();
    if (dims.size() != 3) throw std::runtime_error("checkpoint must have three layer dims");
    AdamConfig adam{header["adam"]["lr"], header["adam"]["beta1"], header["adam"]["beta2"], header["adam"]["eps"]};
    Mlp net(dims[0], dims[1], dims[2], header.at("seed").get<std::uint64_t>(), adam);
    const auto count = header.at("count").get<std::size_t>();
    if (count != net.parameter_count()) throw std::runtime_error("checkpoint parameter count mismatch");
    net.set_parameters(read_doubles(in, count));
    auto unflatten = [&](Gradients& g) {
        Mlp tmp = net;
        tmp.set_parameters(read_doubles(in, count));
        g = {tmp.w1_, tmp.b1_, tmp.w2_, tmp.b2_};
    };
    unflatten(net.m_);
    unflatten(net.v_);
    net.step_ = header.at("step").get<std::int64_t>();
    return net;
}

std::string Mlp::to_json() const {
    nlohmann::json j = {
        {"dims", {input_dim(), hidden_dim(), output_dim()}},
        {"seed", seed_},
        {"step", step_},
        {"adam", {{"lr", adam_.learning_rate}, {"beta1", adam_.beta1}, {"beta2", adam_.beta2}, {"eps", adam_.epsilon}}},
        {"params", parameters()},
        {"m", flatten(m_)},
        {"v", flatten(v_)},
    };
    return j.dump();
}

Mlp Mlp::from_json(std::string_view text) {
    const auto j = nlohmann::json::parse(text);
    const auto dims = j.at("dims").get<std::vector<int>>();
    if (dims.size() != 3) throw std::runtime_error("network state must have three layer dims");
    AdamConfig adam{j["adam"]["lr"], j["adam"]["beta1"], j["adam"]["beta2"], j["adam"]["eps"]};
    Mlp net(dims[0], dims[1], dims[2], j.at("seed").get<std::uint64_t>(), adam);
    net.set_parameters(j.at("params").get<std::vector<double>>());
    auto unflatten = [&](Gradients& g, const char* key) {
        Mlp tmp = net;
        tmp.set_parameters(j.at(key).get<std::vector<double>>());
        g = {tmp.w1_, tmp.b1_, tmp.w2_, tmp.b2_};
    };
    unflatten(net.m_, "m");
    unflatten(net.v_, "v");
    net.step_ = j.at("step").get<std::int64_t>();
    return net;
}

}  // namespace ects::nn
