#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ects/core.hpp"

namespace ects::datagen {

/// Parameters of the synthetic pattern-in-noise generator.
///
/// Each series is Gaussian noise with one class template added at a
/// uniformly random offset, so short prefixes often miss the pattern.
struct GeneratorConfig {
    int n_series = 20000;
    int T = 40;
    int n_classes = 10;
    int pattern_len = 12;
    double noise_std = 0.25;
    double jitter_std = 0.1;
    double scale_lo = 0.8;
    double scale_hi = 1.2;
    std::uint64_t seed = 0;
    /// Test hook: place every pattern at this offset instead of a random one.
    std::optional<int> fixed_offset;

    void validate() const;
};

/// Number of built-in templates; also the largest supported class count.
inline constexpr int kTemplateCount = 10;

/// The class template for `label`, resampled to `pattern_len` points.
std::vector<double> class_template(int label, int pattern_len);

std::vector<LabeledSeries> generate(const GeneratorConfig& config);

struct Splits {
    std::vector<LabeledSeries> train;
    std::vector<LabeledSeries> deploy;
    std::vector<LabeledSeries> holdout;
};

/// Shuffled three-way partition. Train and hold-out sizes are rounded down
/// and the remainder goes to deploy.
Splits split(std::vector<LabeledSeries> data, std::array<double, 3> fractions, std::uint64_t seed);

/// CSV with one row per series: label, v_1..v_T.
void write_csv(std::ostream& out, const std::vector<LabeledSeries>& data);
std::vector<LabeledSeries> read_csv(std::istream& in);

}  // namespace ects::datagen
