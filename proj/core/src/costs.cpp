#include "ects/costs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ects::costs {

std::string_view to_string(Scenario s) {
    switch (s) {
        case Scenario::none: return "none";
        case Scenario::ac_d: return "ac_d";
        case Scenario::pv_d: return "pv_d";
        case Scenario::ac_s: return "ac_s";
        case Scenario::pv_s: return "pv_s";
    }
    return "none";
}

Scenario parse_scenario(std::string_view name) {
    for (Scenario s : {Scenario::none, Scenario::ac_d, Scenario::pv_d, Scenario::ac_s, Scenario::pv_s}) {
        if (to_string(s) == name) return s;
    }
    throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

bool is_stochastic(Scenario s) { return s == Scenario::ac_s || s == Scenario::pv_s; }
bool is_drift(Scenario s) { return s == Scenario::ac_d || s == Scenario::pv_d; }

CostSchedule CostSchedule::make(Scenario scenario, std::int64_t horizon, int n_classes, int T) {
    CostSchedule s;
    s.scenario = scenario;
    s.horizon = horizon;
    s.n_classes = n_classes;
    s.T = T;
    s.train_alpha = default_train_alpha(s);
    s.validate();
    return s;
}

double default_train_alpha(const CostSchedule& s) {
    // PV_D returns to its training regime, so training uses the starting alpha.
    if (s.scenario == Scenario::pv_d) return s.pv_alpha_start;
    // Stochastic scenarios use C_m + C_d, i.e. twice the alpha = 0.5 weighted loss.
    if (is_stochastic(s.scenario)) return 0.5;
    return 0.8;
}

void CostSchedule::validate() const {
    if (horizon < 1) throw ConfigError("cost horizon must be positive");
    if (n_classes < 2 || T < 1) throw ConfigError("cost schedule needs n_classes >= 2 and T >= 1");
    for (double a : {train_alpha, ac_alpha, pv_alpha_start, pv_alpha_mid}) {
        if (a < 0.0 || a > 1.0) throw ConfigError("alpha values must lie in [0, 1]");
    }
    if (!(clip_lo >= 0.0 && clip_lo < clip_hi)) throw ConfigError("clip bounds must satisfy 0 <= lo < hi");
    if (lognormal_mode <= 0.0 || ac_sigma <= 0.0 || pv_sigma_start <= 0.0 || pv_sigma_mid <= 0.0) {
        throw ConfigError("log-normal mode and shape must be positive");
    }
    // Noisy rows only matter for the stochastic scenarios.
    if (!is_stochastic(scenario)) return;
    for (ClassId k : noisy_classes) {
        if (k < 0 || k >= n_classes) throw ConfigError("noisy class id outside [0, n_classes)");
    }
}

RealizedCosts CostSchedule::nominal() const {
    RealizedCosts c = RealizedCosts::zero_one(n_classes, T, train_alpha, weighting());
    c.u = -1;
    return c;
}

double periodic_value(PeriodicShape shape, double start, double mid, double x) {
    x = std::clamp(x, 0.0, 1.0);
    const double w = shape == PeriodicShape::triangle ? 1.0 - std::abs(2.0 * x - 1.0)
                                                      : 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * x));
    return std::lerp(start, mid, w);  // exact at both endpoints
}

namespace {

void check_step(const CostSchedule& schedule, std::int64_t u) {
    if (u < 0 || u >= schedule.horizon) {
        throw ContractError("deployment step " + std::to_string(u) + " outside [0, " +
                            std::to_string(schedule.horizon) + ")");
    }
}

double fraction(const CostSchedule& schedule, std::int64_t u) {
    return static_cast<double>(u) / static_cast<double>(schedule.horizon);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

double alpha_at(const CostSchedule& schedule, std::int64_t u) {
    check_step(schedule, u);
    switch (schedule.scenario) {
        case Scenario::ac_d: return schedule.ac_alpha;
        case Scenario::pv_d:
            return periodic_value(schedule.shape, schedule.pv_alpha_start, schedule.pv_alpha_mid, fraction(schedule, u));
        default: return schedule.train_alpha;
    }
}

double sigma_at(const CostSchedule& schedule, std::int64_t u) {
    check_step(schedule, u);
    switch (schedule.scenario) {
        case Scenario::ac_s: return schedule.ac_sigma;
        case Scenario::pv_s:
            return periodic_value(schedule.shape, schedule.pv_sigma_start, schedule.pv_sigma_mid, fraction(schedule, u));
        default: throw ContractError("sigma_at is only defined for stochastic scenarios");
    }
}

double lognormal_from_normal(double mode, double sigma, double z, double clip_lo, double clip_hi) {
    if (mode <= 0.0 || sigma <= 0.0) throw ContractError("log-normal mode and shape must be positive");
    const double mu = std::log(mode) + sigma * sigma;
    const double log_value = mu + sigma * z;
    // Compare in log space so huge exponents clip instead of overflowing.
    if (log_value >= std::log(clip_hi)) return clip_hi;
    return std::clamp(std::exp(log_value), clip_lo, clip_hi);
}

double lognormal_mode_shape(double mode, double sigma, Rng& rng, double clip_lo, double clip_hi) {
    return lognormal_from_normal(mode, sigma, standard_normal(rng), clip_lo, clip_hi);
}

double clipped_lognormal_mean(double mode, double sigma, double clip_lo, double clip_hi) {
    if (mode <= 0.0 || sigma <= 0.0) throw ContractError("log-normal mode and shape must be positive");
    const double mu = std::log(mode) + sigma * sigma;
    const double b = (std::log(clip_hi) - mu) / sigma;
    const double a = clip_lo > 0.0 ? (std::log(clip_lo) - mu) / sigma : -std::numeric_limits<double>::infinity();
    // E[X; a < Z < b] for X = exp(mu + sigma Z) is exp(mu + sigma^2 / 2) (Phi(b - sigma) - Phi(a - sigma)).
    const double body_log = mu + 0.5 * sigma * sigma;
    const double mass = normal_cdf(b - sigma) - normal_cdf(a - sigma);
    const double body = mass > 0.0 ? std::exp(body_log + std::log(mass)) : 0.0;
    return clip_lo * normal_cdf(a) + body + clip_hi * (1.0 - normal_cdf(b));
}

namespace {

RealizedCosts with_noisy_rows(const CostSchedule& schedule, std::int64_t u, double value) {
    RealizedCosts c = RealizedCosts::zero_one(schedule.n_classes, schedule.T, schedule.train_alpha, Weighting::unweighted);
    c.u = u;
    for (ClassId y : schedule.noisy_classes) {
        for (int k = 0; k < schedule.n_classes; ++k) {
            if (k != y) c.matrix[static_cast<std::size_t>(y) * schedule.n_classes + k] = value;
        }
    }
    return c;
}

}  // namespace

RealizedCosts realize(const CostSchedule& schedule, std::int64_t u, ClassId y_true, Rng& rng) {
    check_step(schedule, u);
    if (y_true < 0 || y_true >= schedule.n_classes) throw ContractError("true class outside [0, n_classes)");
    if (is_stochastic(schedule.scenario)) {
        const double draw = lognormal_mode_shape(schedule.lognormal_mode, sigma_at(schedule, u), rng,
                                                 schedule.clip_lo, schedule.clip_hi);
        return with_noisy_rows(schedule, u, draw);
    }
    RealizedCosts c = RealizedCosts::zero_one(schedule.n_classes, schedule.T, alpha_at(schedule, u), Weighting::weighted);
    c.u = u;
    return c;
}

RealizedCosts expected(const CostSchedule& schedule, std::int64_t u) {
    check_step(schedule, u);
    if (is_stochastic(schedule.scenario)) {
        return with_noisy_rows(schedule, u,
                               clipped_lognormal_mean(schedule.lognormal_mode, sigma_at(schedule, u), schedule.clip_lo,
                                                      schedule.clip_hi));
    }
    RealizedCosts c = RealizedCosts::zero_one(schedule.n_classes, schedule.T, alpha_at(schedule, u), Weighting::weighted);
    c.u = u;
    return c;
}

double max_loss(const RealizedCosts& costs) {
    return costs.combine(costs.max_misclassification(), costs.delay(costs.T, costs.T));
}

}  // namespace ects::costs
