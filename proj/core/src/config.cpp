#include "ects/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

namespace ects::harness {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
    throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + std::string(value) + "' as " +
                      expected);
}

double parse_double(std::string_view key, std::string_view value) {
    const std::string s(value);
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) bad_value(key, value, "a number");
        return v;
    } catch (const std::logic_error&) {
        bad_value(key, value, "a number");
    }
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view value) {
    Int v{};
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc() || ptr != end) bad_value(key, value, "an integer");
    return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    bad_value(key, value, "a boolean");
}

std::vector<int> parse_int_list(std::string_view key, std::string_view value) {
    std::vector<int> out;
    std::string item;
    std::istringstream in{std::string(value)};
    while (std::getline(in, item, ',')) {
        const auto t = trim(item);
        if (!t.empty()) out.push_back(parse_int<int>(key, t));
    }
    return out;
}

struct Field {
    std::function<void(ExperimentConfig&, std::string_view key, std::string_view value)> set;
    std::function<json(const ExperimentConfig&)> get;
};

template <typename Member>
Field double_field(Member member) {
    return {[member](ExperimentConfig& c, std::string_view k, std::string_view v) { member(c) = parse_double(k, v); },
            [member](const ExperimentConfig& c) {
                auto copy = c;
                return json(member(copy));
            }};
}

template <typename Int, typename Member>
Field int_field(Member member) {
    return {[member](ExperimentConfig& c, std::string_view k, std::string_view v) { member(c) = parse_int<Int>(k, v); },
            [member](const ExperimentConfig& c) {
                auto copy = c;
                return json(member(copy));
            }};
}

template <typename Member>
Field bool_field(Member member) {
    return {[member](ExperimentConfig& c, std::string_view k, std::string_view v) { member(c) = parse_bool(k, v); },
            [member](const ExperimentConfig& c) {
                auto copy = c;
                return json(member(copy));
            }};
}

// Member accessors are lambdas returning references so one table drives
// both parsing and the JSON echo.
#define ECTS_REF(expr) [](ExperimentConfig& c) -> auto& { return expr; }

const std::map<std::string, Field, std::less<>>& fields() {
    static const std::map<std::string, Field, std::less<>> table = [] {
        std::map<std::string, Field, std::less<>> f;
        // Data generation.
        f["n_series"] = int_field<int>(ECTS_REF(c.data.generator.n_series));
        f["T"] = int_field<int>(ECTS_REF(c.data.generator.T));
        f["n_classes"] = int_field<int>(ECTS_REF(c.data.generator.n_classes));
        f["pattern_len"] = int_field<int>(ECTS_REF(c.data.generator.pattern_len));
        f["noise_std"] = double_field(ECTS_REF(c.data.generator.noise_std));
        f["jitter_std"] = double_field(ECTS_REF(c.data.generator.jitter_std));
        f["scale_lo"] = double_field(ECTS_REF(c.data.generator.scale_lo));
        f["scale_hi"] = double_field(ECTS_REF(c.data.generator.scale_hi));
        f["train_fraction"] = double_field(ECTS_REF(c.data.fractions[0]));
        f["deploy_fraction"] = double_field(ECTS_REF(c.data.fractions[1]));
        f["holdout_fraction"] = double_field(ECTS_REF(c.data.fractions[2]));
        f["data_seed"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                              c.data_seed = parse_int<std::uint64_t>(k, v);
                          },
                          [](const ExperimentConfig& c) { return c.data_seed ? json(*c.data_seed) : json(nullptr); }};
        // Classifier.
        f["n_checkpoints"] = int_field<int>(ECTS_REF(c.data.classifier.n_checkpoints));
        f["classifier_iterations"] = int_field<int>(ECTS_REF(c.data.classifier.iterations));
        f["classifier_lr"] = double_field(ECTS_REF(c.data.classifier.learning_rate));
        f["classifier_l2"] = double_field(ECTS_REF(c.data.classifier.l2));
        f["calibration_fraction"] = double_field(ECTS_REF(c.data.classifier.calibration_fraction));
        f["calibrate"] = bool_field(ECTS_REF(c.data.classifier.calibrate));
        // Run protocol.
        f["seed"] = int_field<std::uint64_t>(ECTS_REF(c.run.seed));
        f["batch_size"] = int_field<int>(ECTS_REF(c.run.batch_size));
        f["holdout_every"] = int_field<int>(ECTS_REF(c.run.holdout_every));
        f["debug_hash"] = bool_field(ECTS_REF(c.run.debug_hash));
        f["record_timing"] = bool_field(ECTS_REF(c.run.record_timing));
        f["scenario"] = {[](ExperimentConfig& c, std::string_view, std::string_view v) {
                             c.run.scenario = costs::parse_scenario(v);
                         },
                         [](const ExperimentConfig& c) { return json(std::string(costs::to_string(c.run.scenario))); }};
        f["trigger"] = {[](ExperimentConfig& c, std::string_view, std::string_view v) {
                            if (!triggers::is_trigger_name(v)) throw ConfigError("unknown trigger: " + std::string(v));
                            c.run.trigger = std::string(v);
                        },
                        [](const ExperimentConfig& c) { return json(c.run.trigger); }};
        // Costs.
        f["train_alpha"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                                c.run.train_alpha = parse_double(k, v);
                            },
                            [](const ExperimentConfig& c) {
                                return c.run.train_alpha ? json(*c.run.train_alpha) : json(nullptr);
                            }};
        f["ac_alpha"] = double_field(ECTS_REF(c.run.costs.ac_alpha));
        f["pv_alpha_start"] = double_field(ECTS_REF(c.run.costs.pv_alpha_start));
        f["pv_alpha_mid"] = double_field(ECTS_REF(c.run.costs.pv_alpha_mid));
        f["pv_shape"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                             if (v == "triangle") {
                                 c.run.costs.shape = costs::PeriodicShape::triangle;
                             } else if (v == "cosine") {
                                 c.run.costs.shape = costs::PeriodicShape::cosine;
                             } else {
                                 bad_value(k, v, "triangle or cosine");
                             }
                         },
                         [](const ExperimentConfig& c) {
                             return json(c.run.costs.shape == costs::PeriodicShape::triangle ? "triangle" : "cosine");
                         }};
        f["noisy_classes"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                                  c.run.costs.noisy_classes = parse_int_list(k, v);
                              },
                              [](const ExperimentConfig& c) { return json(c.run.costs.noisy_classes); }};
        f["lognormal_mode"] = double_field(ECTS_REF(c.run.costs.lognormal_mode));
        f["ac_sigma"] = double_field(ECTS_REF(c.run.costs.ac_sigma));
        f["pv_sigma_start"] = double_field(ECTS_REF(c.run.costs.pv_sigma_start));
        f["pv_sigma_mid"] = double_field(ECTS_REF(c.run.costs.pv_sigma_mid));
        f["clip_lo"] = double_field(ECTS_REF(c.run.costs.clip_lo));
        f["clip_hi"] = double_field(ECTS_REF(c.run.costs.clip_hi));
        // Triggers.
        f["threshold_grid_size"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                                        const int n = parse_int<int>(k, v);
                                        if (n < 2) bad_value(k, v, "an integer >= 2");
                                        c.run.params.grid.clear();
                                        for (int i = 0; i < n; ++i) c.run.params.grid.push_back(double(i) / (n - 1));
                                    },
                                    [](const ExperimentConfig& c) { return json(c.run.params.grid.size()); }};
        f["decay"] = double_field(ECTS_REF(c.run.params.decay));
        f["ucb_c"] = double_field(ECTS_REF(c.run.params.bandit.c));
        f["ucb_literal_update"] = bool_field(ECTS_REF(c.run.params.bandit.literal_update));
        f["sw_window"] = int_field<std::size_t>(ECTS_REF(c.run.params.sw_window));
        f["calimera_hidden"] = int_field<int>(ECTS_REF(c.run.params.calimera.hidden));
        f["calimera_lr"] = double_field(ECTS_REF(c.run.params.calimera.adam.learning_rate));
        f["calimera_true_label_costs"] = bool_field(ECTS_REF(c.run.params.calimera.true_label_costs));
        f["calimera_pretrain_epochs"] = int_field<int>(ECTS_REF(c.run.params.calimera.pretrain_epochs));
        f["alert_hidden"] = int_field<int>(ECTS_REF(c.run.params.alert.hidden));
        f["alert_lr"] = double_field(ECTS_REF(c.run.params.alert.adam.learning_rate));
        f["alert_gamma"] = double_field(ECTS_REF(c.run.params.alert.gamma));
        f["alert_epsilon"] = double_field(ECTS_REF(c.run.params.alert.epsilon));
        f["alert_pretrain_epochs"] = int_field<int>(ECTS_REF(c.run.params.alert.pretrain_epochs));
        f["economy_bins"] = int_field<int>(ECTS_REF(c.run.params.economy.n_bins));
        f["economy_smoothing"] = double_field(ECTS_REF(c.run.params.economy.smoothing));
        return f;
    }();
    return table;
}

#undef ECTS_REF

}  // namespace

DataConfig ExperimentConfig::resolved_data() const {
    DataConfig d = data;
    const std::uint64_t seed = data_seed.value_or(run.seed);
    d.generator.seed = seed;
    d.classifier.seed = seed;
    return d;
}

void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value) {
    const auto& table = fields();
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
    it->second.set(config, key, value);
}

void apply_config_text(ExperimentConfig& config, std::istream& in) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        apply_setting(config, trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
    }
}

void apply_config_file(ExperimentConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open config file " + path);
    apply_config_text(config, in);
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, _] : fields()) keys.push_back(k);
    return keys;
}

std::string to_json(const ExperimentConfig& config) {
    json j = json::object();
    for (const auto& [k, f] : fields()) j[k] = f.get(config);
    j["data_seed_effective"] = config.data_seed.value_or(config.run.seed);
    return j.dump(2);
}

}  // namespace ects::harness
