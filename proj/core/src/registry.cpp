#include "ects/registry.hpp"

#include <json.hpp>

#include <algorithm>

namespace ects::triggers {

const std::vector<std::string>& trigger_names() {
    static const std::vector<std::string> names{"no_adapt", "silver",        "threshold", "decay_threshold", "hucb1",
                                                "sw_hucb1", "deep_calimera", "alert",     "economy"};
    return names;
}

bool is_trigger_name(std::string_view name) {
    const auto& names = trigger_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::unique_ptr<TriggerModel> make_trigger(std::string_view name, const TriggerParams& params,
                                           const TrainingCache& cache, std::uint64_t seed) {
    using Variant = ThresholdTrigger::Variant;
    if (name == "no_adapt") return std::make_unique<ThresholdTrigger>(Variant::frozen, cache, 0.0, params.grid);
    if (name == "threshold") return std::make_unique<ThresholdTrigger>(Variant::plain, cache, 0.0, params.grid);
    if (name == "decay_threshold") {
        return std::make_unique<ThresholdTrigger>(Variant::decay, cache, params.decay, params.grid);
    }
    if (name == "silver") return std::make_unique<SilverTrigger>(cache, params.grid);
    if (name == "hucb1" || name == "sw_hucb1") {
        BanditConfig config = params.bandit;
        config.window = name == "sw_hucb1" ? params.sw_window : 0;
        if (name == "sw_hucb1" && config.window == 0) throw ConfigError("sw_hucb1 needs a positive window");
        return std::make_unique<BanditTrigger>(cache, config, params.grid);
    }
    if (name == "deep_calimera") return std::make_unique<CalimeraTrigger>(cache, params.calimera, seed);
    if (name == "alert") return std::make_unique<AlertTrigger>(cache, params.alert, seed);
    if (name == "economy") return std::make_unique<EconomyTrigger>(cache, params.economy);
    throw ConfigError("unknown trigger: " + std::string(name));
}

std::unique_ptr<TriggerModel> restore_trigger(std::string_view snapshot) {
    const auto name = nlohmann::json::parse(snapshot).at("trigger").get<std::string>();
    if (name == "no_adapt" || name == "threshold" || name == "decay_threshold") {
        return ThresholdTrigger::restore(snapshot);
    }
    if (name == "silver") return SilverTrigger::restore(snapshot);
    if (name == "hucb1" || name == "sw_hucb1") return BanditTrigger::restore(snapshot);
    if (name == "deep_calimera") return CalimeraTrigger::restore(snapshot);
    if (name == "alert") return AlertTrigger::restore(snapshot);
    if (name == "economy") return EconomyTrigger::restore(snapshot);
    throw ConfigError("snapshot names an unknown trigger: " + name);
}

}  // namespace ects::triggers
