#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <stdexcept>
#include <vector>

#include "ects/rng.hpp"

namespace ects::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown when a training step produces a non-finite loss.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

inline constexpr double kLeakySlope = 0.01;

/// Parameter gradients, laid out like the parameters they belong to.
struct Gradients {
    Matrix w1;
    Vector b1;
    Matrix w2;
    Vector b2;
};

/// Two-layer perceptron: affine -> leaky ReLU -> affine, trained with Adam
/// on a masked mean squared error.
///
/// Parameters are also exposed as one flat vector (w1, b1, w2, b2, each
/// column-major) for finite-difference checks and checkpoints.
class Mlp {
public:
    Mlp() = default;
    Mlp(int in, int hidden, int out, std::uint64_t seed, AdamConfig adam = {});

    int input_dim() const { return static_cast<int>(w1_.cols()); }
    int hidden_dim() const { return static_cast<int>(w1_.rows()); }
    int output_dim() const { return static_cast<int>(w2_.rows()); }
    std::uint64_t seed() const { return seed_; }
    const AdamConfig& adam() const { return adam_; }
    std::int64_t step_count() const { return step_; }

    /// B x in -> B x out.
    Matrix forward(const Matrix& batch) const;

    /// Mean of (f(x) - target)^2 over entries where mask != 0.
    double loss(const Matrix& batch, const Matrix& targets, const Matrix& mask) const;
    Gradients gradients(const Matrix& batch, const Matrix& targets, const Matrix& mask) const;

    /// One Adam step on the masked loss; returns the loss before the step.
    double sgd_step(const Matrix& batch, const Matrix& targets, const Matrix& mask);
    /// Unmasked convenience overload.
    double sgd_step(const Matrix& batch, const Matrix& targets);

    std::vector<double> parameters() const;
    void set_parameters(const std::vector<double>& flat);
    static std::vector<double> flatten(const Gradients& g);
    std::size_t parameter_count() const;

    void hash(StateHasher& h) const;

    /// JSON header line followed by raw little-endian doubles: parameters,
    /// then both Adam moments.
    void save(std::ostream& out) const;
    static Mlp load(std::istream& in);

    /// Full state (dims, seed, optimizer, parameters, moments) as JSON text.
    std::string to_json() const;
    static Mlp from_json(std::string_view text);

    /// Direct access for tests that construct known networks.
    Matrix& w1() { return w1_; }
    Vector& b1() { return b1_; }
    Matrix& w2() { return w2_; }
    Vector& b2() { return b2_; }

private:
    Matrix w1_;
    Vector b1_;
    Matrix w2_;
    Vector b2_;
    Gradients m_;
    Gradients v_;
    std::int64_t step_ = 0;
    std::uint64_t seed_ = 0;
    AdamConfig adam_;
};

}  // namespace ects::nn
