#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ects/core.hpp"
#include "ects/rng.hpp"

namespace ects::costs {

enum class Scenario { none, ac_d, pv_d, ac_s, pv_s };

/// Registry name ("none", "ac_d", ...); parse throws ConfigError on unknown names.
std::string_view to_string(Scenario s);
Scenario parse_scenario(std::string_view name);

bool is_stochastic(Scenario s);
bool is_drift(Scenario s);

enum class PeriodicShape { triangle, cosine };

/// Deployment-time cost schedule, indexed by deployment step u in [0, horizon).
///
/// Drift scenarios move alpha with u under 0/1 costs and delay t/T.
/// Stochastic scenarios keep the unweighted loss and replace the
/// misclassification costs of `noisy_classes` by a clipped log-normal draw
/// whose shape parameter is fixed (AC_S) or follows a periodic path (PV_S).
struct CostSchedule {
    Scenario scenario = Scenario::none;
    std::int64_t horizon = 1;
    int n_classes = 10;
    int T = 40;

    double train_alpha = 0.8;
    double ac_alpha = 0.4;
    double pv_alpha_start = 1.0;
    double pv_alpha_mid = 0.1;
    PeriodicShape shape = PeriodicShape::triangle;

    std::vector<ClassId> noisy_classes{1, 4, 7};
    double lognormal_mode = 1.0;
    double ac_sigma = 5.0;
    double pv_sigma_start = 0.25;
    double pv_sigma_mid = 10.0;
    double clip_lo = 0.0;
    double clip_hi = 500.0;

    /// Defaults for a scenario over `horizon` deployment steps.
    static CostSchedule make(Scenario scenario, std::int64_t horizon, int n_classes, int T);

    void validate() const;

    Weighting weighting() const { return is_stochastic(scenario) ? Weighting::unweighted : Weighting::weighted; }

    /// Costs assumed while training triggers offline.
    RealizedCosts nominal() const;
};

/// Training alpha a scenario implies: the PV_D start value, 0.5 for the
/// stochastic scenarios, 0.8 otherwise.
double default_train_alpha(const CostSchedule& s);

/// Value at fraction `x` in [0, 1] of a periodic path start -> mid (at 0.5) -> start.
double periodic_value(PeriodicShape shape, double start, double mid, double x);

double alpha_at(const CostSchedule& schedule, std::int64_t u);

/// Log-normal shape parameter in force at u (stochastic scenarios only).
double sigma_at(const CostSchedule& schedule, std::int64_t u);

/// exp(mu + sigma z) with mu = ln(mode) + sigma^2, clipped to [clip_lo, clip_hi].
double lognormal_from_normal(double mode, double sigma, double z, double clip_lo = 0.0, double clip_hi = 500.0);
double lognormal_mode_shape(double mode, double sigma, Rng& rng, double clip_lo = 0.0, double clip_hi = 500.0);

/// Mean of the clipped log-normal, in closed form.
double clipped_lognormal_mean(double mode, double sigma, double clip_lo, double clip_hi);

/// Costs for one deployment instance. Drift scenarios draw nothing from `rng`.
RealizedCosts realize(const CostSchedule& schedule, std::int64_t u, ClassId y_true, Rng& rng);

/// Expected cost configuration at u (the clipped log-normal draw replaced by its mean).
RealizedCosts expected(const CostSchedule& schedule, std::int64_t u);

/// Largest loss achievable under `costs`: max matrix entry and C_d(T), combined.
double max_loss(const RealizedCosts& costs);

}  // namespace ects::costs
