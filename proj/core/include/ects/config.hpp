#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ects/harness.hpp"

namespace ects::harness {

/// Everything one run needs: data, classifier, costs and trigger settings.
struct ExperimentConfig {
    DataConfig data;
    RunConfig run;
    /// Dataset seed; defaults to the run seed.
    std::optional<std::uint64_t> data_seed;

    /// DataConfig with the generator and classifier seeds resolved.
    DataConfig resolved_data() const;
};

/// Sets one flat key to a textual value; throws ConfigError for unknown
/// keys or unparsable values.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Flat `key = value` lines; `#` starts a comment, blank lines are ignored.
void apply_config_text(ExperimentConfig& config, std::istream& in);
void apply_config_file(ExperimentConfig& config, const std::string& path);

/// Every key accepted by apply_setting, sorted.
std::vector<std::string> config_keys();

/// The full effective configuration as pretty-printed JSON.
std::string to_json(const ExperimentConfig& config);

}  // namespace ects::harness
