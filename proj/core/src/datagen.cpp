#include "ects/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "ects/rng.hpp"

namespace ects::datagen {

namespace {

// Shapes are defined on u in [0, 1] and sampled at pattern_len points.
double template_value(int label, double u) {
    constexpr double pi = std::numbers::pi;
    switch (label) {
        case 0:  // ramp
            return 3.0 * u;
        case 1:  // low triangle
            return 1.5 * (1.0 - std::abs(2.0 * u - 1.0));
        case 2:  // wide square pulse
            return (u > 0.15 && u < 0.85) ? 2.0 : 0.0;
        case 3:  // two narrow bumps
            return 2.5 * (std::exp(-std::pow((u - 0.2) / 0.08, 2)) + std::exp(-std::pow((u - 0.8) / 0.08, 2)));
        case 4:  // damped oscillation
            return 2.0 * std::exp(-2.5 * u) * std::cos(3.0 * pi * u);
        case 5:  // step down
            return u < 0.5 ? 1.5 : -1.5;
        case 6:  // skewed V with its low point at u = 0.3
            return u < 0.3 ? 2.5 * (1.0 - u / 0.3) : 2.5 * (u - 0.3) / 0.7;
        case 7:  // negative plateau over the second half
            return (u > 0.45 && u < 0.95) ? -1.2 : 0.0;
        case 8:  // spike pair, one up one down
            return 2.5 * std::exp(-std::pow((u - 0.3) / 0.06, 2)) - 2.5 * std::exp(-std::pow((u - 0.7) / 0.06, 2));
        case 9:  // sawtooth with two teeth
            return 2.0 * (2.0 * u - std::floor(2.0 * u)) - 1.0;
        default:
            throw ContractError("no template for label " + std::to_string(label));
    }
}

}  // namespace

void GeneratorConfig::validate() const {
    if (n_series < 0) throw ConfigError("n_series must be nonnegative");
    if (T <= 0) throw ConfigError("T must be positive");
    if (n_classes < 2 || n_classes > kTemplateCount) {
        throw ConfigError("n_classes must lie in [2, " + std::to_string(kTemplateCount) + "]");
    }
    if (pattern_len < 1 || pattern_len >= T) throw ConfigError("pattern_len must satisfy 1 <= pattern_len < T");
    if (noise_std < 0.0 || jitter_std < 0.0) throw ConfigError("noise and jitter must be nonnegative");
    if (scale_lo > scale_hi) throw ConfigError("scale range is empty");
    if (fixed_offset && (*fixed_offset < 0 || *fixed_offset > T - pattern_len)) {
        throw ConfigError("fixed_offset outside [0, T - pattern_len]");
    }
}

std::vector<double> class_template(int label, int pattern_len) {
    std::vector<double> out(static_cast<std::size_t>(pattern_len));
    for (int i = 0; i < pattern_len; ++i) {
        const double u = pattern_len == 1 ? 0.5 : static_cast<double>(i) / (pattern_len - 1);
        out[static_cast<std::size_t>(i)] = template_value(label, u);
    }
    return out;
}

std::vector<LabeledSeries> generate(const GeneratorConfig& config) {
    config.validate();
    std::vector<std::vector<double>> templates;
    for (int k = 0; k < config.n_classes; ++k) templates.push_back(class_template(k, config.pattern_len));

    std::vector<LabeledSeries> out(static_cast<std::size_t>(config.n_series));
    for (int i = 0; i < config.n_series; ++i) {
        // One stream per series index keeps generation order-independent.
        Rng rng = make_rng(config.seed, static_cast<std::uint64_t>(i));
        LabeledSeries& s = out[static_cast<std::size_t>(i)];
        s.label = i % config.n_classes;
        s.values.resize(static_cast<std::size_t>(config.T));
        for (double& v : s.values) v = config.noise_std * standard_normal(rng);

        const double scale =
            config.scale_lo == config.scale_hi
                ? config.scale_lo
                : std::uniform_real_distribution<double>(config.scale_lo, config.scale_hi)(rng);
        const int offset = config.fixed_offset ? *config.fixed_offset
                                               : static_cast<int>(uniform_int(rng, 0, config.T - config.pattern_len));
        const auto& tpl = templates[static_cast<std::size_t>(s.label)];
        for (int j = 0; j < config.pattern_len; ++j) {
            const double jitter = config.jitter_std > 0.0 ? config.jitter_std * standard_normal(rng) : 0.0;
            s.values[static_cast<std::size_t>(offset + j)] += scale * tpl[static_cast<std::size_t>(j)] + jitter;
        }
    }
    return out;
}

Splits split(std::vector<LabeledSeries> data, std::array<double, 3> fractions, std::uint64_t seed) {
    const double sum = fractions[0] + fractions[1] + fractions[2];
    if (std::abs(sum - 1.0) > 1e-9 || fractions[0] < 0 || fractions[1] < 0 || fractions[2] < 0) {
        throw ContractError("split fractions must be nonnegative and sum to 1");
    }
    Rng rng = make_rng(seed, 0x5B117ULL);
    std::shuffle(data.begin(), data.end(), rng);

    const auto n = static_cast<double>(data.size());
    // Small epsilon so exact products like 0.25 * 20000 do not round down.
    const auto n_train = static_cast<std::size_t>(std::floor(fractions[0] * n + 1e-9));
    const auto n_hold = static_cast<std::size_t>(std::floor(fractions[2] * n + 1e-9));
    const std::size_t n_deploy = data.size() - n_train - n_hold;

    Splits s;
    auto it = std::make_move_iterator(data.begin());
    s.train.assign(it, it + static_cast<std::ptrdiff_t>(n_train));
    it += static_cast<std::ptrdiff_t>(n_train);
    s.deploy.assign(it, it + static_cast<std::ptrdiff_t>(n_deploy));
    it += static_cast<std::ptrdiff_t>(n_deploy);
    s.holdout.assign(it, std::make_move_iterator(data.end()));
    return s;
}

void write_csv(std::ostream& out, const std::vector<LabeledSeries>& data) {
    out.precision(17);
    for (const auto& s : data) {
        out << s.label;
        for (double v : s.values) out << ',' << v;
        out << '\n';
    }
}

std::vector<LabeledSeries> read_csv(std::istream& in) {
    std::vector<LabeledSeries> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        LabeledSeries s;
        if (!std::getline(ss, cell, ',')) continue;
        try {
            s.label = std::stoi(cell);
            while (std::getline(ss, cell, ',')) s.values.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw ConfigError("malformed series CSV at line " + std::to_string(line_no));
        }
        if (!out.empty() && s.length() != out.front().length()) {
            throw ConfigError("inconsistent series length at line " + std::to_string(line_no));
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace ects::datagen
