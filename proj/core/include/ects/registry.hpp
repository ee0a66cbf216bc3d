#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ects/alert.hpp"
#include "ects/bandit.hpp"
#include "ects/calimera.hpp"
#include "ects/economy.hpp"
#include "ects/threshold.hpp"

namespace ects::triggers {

/// Hyperparameters for every registered trigger.
struct TriggerParams {
    std::vector<double> grid = default_threshold_grid();
    double decay = 0.01;
    BanditConfig bandit;
    std::size_t sw_window = 1000;
    CalimeraConfig calimera;
    AlertConfig alert;
    EconomyConfig economy;
};

/// no_adapt, silver, threshold, decay_threshold, hucb1, sw_hucb1, deep_calimera, alert, economy.
const std::vector<std::string>& trigger_names();
bool is_trigger_name(std::string_view name);

/// Builds and offline-fits a trigger; throws ConfigError for unknown names.
std::unique_ptr<TriggerModel> make_trigger(std::string_view name, const TriggerParams& params,
                                           const TrainingCache& cache, std::uint64_t seed);

/// Rebuilds a trigger from TriggerModel::snapshot().
std::unique_ptr<TriggerModel> restore_trigger(std::string_view snapshot);

}  // namespace ects::triggers
