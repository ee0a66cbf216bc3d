#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "ects/datagen.hpp"

namespace ects::datagen {
namespace {

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i] / n;
        mb += b[i] / n;
    }
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

TEST(Templates, PairwiseCorrelationBelowLimit) {
    for (int a = 0; a < kTemplateCount; ++a) {
        for (int b = a + 1; b < kTemplateCount; ++b) {
            const double r = correlation(class_template(a, 12), class_template(b, 12));
            EXPECT_LT(std::abs(r), 0.9) << "templates " << a << " and " << b;
        }
    }
}

TEST(Generate, NoiseFreePrefixEqualsTemplate) {
    GeneratorConfig c;
    c.n_series = 20;
    c.noise_std = 0.0;
    c.jitter_std = 0.0;
    c.scale_lo = c.scale_hi = 1.0;
    c.fixed_offset = 0;
    for (const auto& s : generate(c)) {
        const auto tpl = class_template(s.label, c.pattern_len);
        for (int j = 0; j < c.pattern_len; ++j) EXPECT_EQ(s.values[static_cast<std::size_t>(j)], tpl[static_cast<std::size_t>(j)]);
        for (int j = c.pattern_len; j < c.T; ++j) EXPECT_EQ(s.values[static_cast<std::size_t>(j)], 0.0);
    }
}

TEST(Generate, DefaultsAreBalanced) {
    GeneratorConfig c;
    const auto data = generate(c);
    ASSERT_EQ(data.size(), 20000u);
    std::vector<int> hist(10, 0);
    for (const auto& s : data) {
        ASSERT_EQ(s.length(), 40);
        ++hist[static_cast<std::size_t>(s.label)];
    }
    for (int h : hist) EXPECT_NEAR(h, 2000, 1);
}

TEST(Generate, Deterministic) {
    GeneratorConfig c;
    c.n_series = 50;
    c.seed = 9;
    const auto a = generate(c);
    const auto b = generate(c);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].label, b[i].label);
        EXPECT_EQ(a[i].values, b[i].values);
    }
    c.seed = 10;
    EXPECT_NE(generate(c)[0].values, a[0].values);
}

TEST(Generate, RejectsPatternAsLongAsSeries) {
    GeneratorConfig c;
    c.pattern_len = c.T;
    EXPECT_THROW(generate(c), ConfigError);
    c.pattern_len = 12;
    c.n_classes = 1;
    EXPECT_THROW(generate(c), ConfigError);
}

std::vector<LabeledSeries> numbered(int n) {
    std::vector<LabeledSeries> out;
    for (int i = 0; i < n; ++i) out.push_back({{static_cast<double>(i)}, i % 2});
    return out;
}

TEST(Split, DefaultProportions) {
    const auto s = split(numbered(20000), {0.25, 0.50, 0.25}, 0);
    EXPECT_EQ(s.train.size(), 5000u);
    EXPECT_EQ(s.deploy.size(), 10000u);
    EXPECT_EQ(s.holdout.size(), 5000u);
}

TEST(Split, RoundsDownWithRemainderToDeploy) {
    const auto s = split(numbered(7), {0.25, 0.50, 0.25}, 3);
    EXPECT_EQ(s.train.size(), 1u);
    EXPECT_EQ(s.deploy.size(), 5u);
    EXPECT_EQ(s.holdout.size(), 1u);
}

TEST(Split, DisjointCoveringAndDeterministic) {
    const auto a = split(numbered(101), {0.25, 0.50, 0.25}, 5);
    const auto b = split(numbered(101), {0.25, 0.50, 0.25}, 5);
    std::multiset<double> ids;
    for (const auto* part : {&a.train, &a.deploy, &a.holdout}) {
        for (const auto& s : *part) ids.insert(s.values[0]);
    }
    ASSERT_EQ(ids.size(), 101u);
    EXPECT_EQ(std::set<double>(ids.begin(), ids.end()).size(), 101u);
    ASSERT_EQ(a.train.size(), b.train.size());
    for (std::size_t i = 0; i < a.train.size(); ++i) EXPECT_EQ(a.train[i].values, b.train[i].values);
    for (std::size_t i = 0; i < a.deploy.size(); ++i) EXPECT_EQ(a.deploy[i].values, b.deploy[i].values);
}

TEST(Split, RejectsBadFractions) {
    EXPECT_THROW(split(numbered(10), {0.5, 0.5, 0.5}, 0), ContractError);
}

TEST(Csv, RoundTripIsExact) {
    GeneratorConfig c;
    c.n_series = 30;
    const auto data = generate(c);
    std::stringstream ss;
    write_csv(ss, data);
    const auto back = read_csv(ss);
    ASSERT_EQ(back.size(), data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        EXPECT_EQ(back[i].label, data[i].label);
        EXPECT_EQ(back[i].values, data[i].values);
    }
}

}  // namespace
}  // namespace ects::datagen
