#include "cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ects/classifier.hpp"
#include "ects/config.hpp"
#include "ects/datagen.hpp"
#include "ects/harness.hpp"

namespace ects::cli {

namespace {

namespace fs = std::filesystem;
using harness::ExperimentConfig;
using harness::ExperimentData;
using harness::MetricsLog;

/// Raised for unreadable or unwritable files; maps to exit code 1.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flags shared by every subcommand. Values stay textual so they go
/// through the same parser as config files.
struct CommonFlags {
    std::string config_path;
    std::vector<std::string> settings;
    std::string scenario;
    std::string trigger;
    std::string seed;
    std::string batch_size;
    std::string holdout_every;
    std::string n_series;
    std::string length;
    std::string out_dir = ".";
    std::string data_dir;
    bool debug_hash = false;
    bool no_timing = false;
};

void add_common(CLI::App& app, CommonFlags& f, bool with_run_flags) {
    app.add_option("--config", f.config_path, "flat key = value file overriding defaults");
    app.add_option("--set", f.settings, "extra key=value override (repeatable)");
    app.add_option("--seed", f.seed, "run seed (also the data seed unless data_seed is set)");
    app.add_option("--n", f.n_series, "number of generated series");
    app.add_option("--T", f.length, "series length");
    app.add_option("--out-dir", f.out_dir, "output directory");
    if (!with_run_flags) return;
    app.add_option("--scenario", f.scenario, "none, ac_d, pv_d, ac_s or pv_s");
    app.add_option("--trigger", f.trigger, "trigger registry name");
    app.add_option("--batch-size", f.batch_size, "series per prequential batch");
    app.add_option("--holdout-every", f.holdout_every, "batches between hold-out snapshots");
    app.add_option("--data-dir", f.data_dir, "read posteriors written by `generate` instead of regenerating");
    app.add_flag("--debug-hash", f.debug_hash, "record and verify state hashes");
    app.add_flag("--no-timing", f.no_timing, "write zero timings so outputs are byte-stable");
}

/// Defaults, then the config file, then --set, then dedicated flags.
ExperimentConfig build_config(const CommonFlags& f) {
    ExperimentConfig c;
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) throw IoError("cannot open config file " + f.config_path);
        harness::apply_config_text(c, in);
    }
    for (const auto& kv : f.settings) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        harness::apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    const auto set_if = [&c](const char* key, const std::string& v) {
        if (!v.empty()) harness::apply_setting(c, key, v);
    };
    set_if("scenario", f.scenario);
    set_if("trigger", f.trigger);
    set_if("seed", f.seed);
    set_if("batch_size", f.batch_size);
    set_if("holdout_every", f.holdout_every);
    set_if("n_series", f.n_series);
    set_if("T", f.length);
    if (f.debug_hash) c.run.debug_hash = true;
    if (f.no_timing) c.run.record_timing = false;
    c.run.validate();
    return c;
}

/// Accepts "3", "0,1,4" and inclusive ranges "0..4" (mixable: "0..2,7").
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string item;
    const auto num = [&text](const std::string& s) -> std::uint64_t {
        std::size_t pos = 0;
        std::uint64_t v = 0;
        try {
            v = std::stoull(s, &pos);
        } catch (const std::exception&) {
            pos = std::string::npos;
        }
        if (s.empty() || pos != s.size()) throw ConfigError("cannot parse seed list '" + text + "'");
        return v;
    };
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        if (const auto dots = item.find(".."); dots != std::string::npos) {
            const auto lo = num(item.substr(0, dots));
            const auto hi = num(item.substr(dots + 2));
            if (hi < lo) throw ConfigError("empty seed range '" + item + "'");
            for (auto s = lo; s <= hi; ++s) out.push_back(s);
        } else {
            out.push_back(num(item));
        }
    }
    if (out.empty()) throw ConfigError("no seeds given");
    return out;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<std::string> parse_triggers(const std::string& text) {
    if (text == "all") return triggers::trigger_names();
    auto names = split_list(text);
    for (const auto& n : names) {
        if (!triggers::is_trigger_name(n)) throw ConfigError("unknown trigger: " + n);
    }
    if (names.empty()) throw ConfigError("no triggers given");
    return names;
}

std::vector<costs::Scenario> parse_scenarios(const std::string& text) {
    std::vector<costs::Scenario> out;
    for (const auto& n : split_list(text)) out.push_back(costs::parse_scenario(n));
    if (out.empty()) throw ConfigError("no scenarios given");
    return out;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    writer(out);
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

template <typename Reader>
auto read_file(const fs::path& path, Reader&& reader) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    try {
        return reader(in);
    } catch (const ConfigError& e) {
        throw IoError(path.string() + ": " + e.what());
    } catch (const ContractError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

const char* const kSplits[] = {"train", "deploy", "holdout"};

double accuracy(const std::vector<PosteriorTrajectory>& trajs, const std::vector<ClassId>& labels, int t) {
    if (trajs.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < trajs.size(); ++i) hits += trajs[i].predicted(t) == labels[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(trajs.size());
}

/// Loads the posterior caches and labels written by `generate`.
ExperimentData load_data(const fs::path& dir) {
    ExperimentData d;
    std::vector<PosteriorTrajectory>* trajs[] = {&d.train, &d.deploy, &d.holdout};
    std::vector<ClassId>* labels[] = {&d.train_labels, &d.deploy_labels, &d.holdout_labels};
    for (int i = 0; i < 3; ++i) {
        const std::string name = kSplits[i];
        *trajs[i] = read_file(dir / (name + "_posteriors.csv"), classifier::read_posterior_csv);
        const auto series = read_file(dir / (name + "_series.csv"), datagen::read_csv);
        for (const auto& s : series) labels[i]->push_back(s.label);
        if (labels[i]->size() != trajs[i]->size()) {
            throw IoError("split '" + name + "' has mismatched series and posterior counts");
        }
    }
    if (d.train.empty()) throw IoError("no training posteriors in " + dir.string());
    d.T = d.train.front().length();
    d.n_classes = d.train.front().n_classes();
    d.holdout_accuracy_half = accuracy(d.holdout, d.holdout_labels, std::max(1, d.T / 2));
    d.holdout_accuracy_full = accuracy(d.holdout, d.holdout_labels, d.T);
    try {
        d.validate();
    } catch (const ContractError& e) {
        throw IoError(dir.string() + ": " + e.what());
    }
    return d;
}

ExperimentData obtain_data(const ExperimentConfig& c, const std::string& data_dir) {
    if (!data_dir.empty()) return load_data(data_dir);
    return harness::prepare_experiment(c.resolved_data());
}

void write_run(const fs::path& dir, const ExperimentConfig& c, const MetricsLog& log) {
    ensure_dir(dir);
    write_file(dir / "steps.csv", [&](std::ostream& o) { harness::write_steps_csv(o, log); });
    write_file(dir / "holdout.csv", [&](std::ostream& o) { harness::write_holdout_csv(o, log); });
    write_file(dir / "config.json", [&](std::ostream& o) { o << harness::to_json(c) << '\n'; });
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// Runs `jobs` closures on up to `threads` workers; the first exception
/// is rethrown after all workers finish.
void parallel_for(std::size_t jobs, int threads, const std::function<void(std::size_t)>& body) {
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || jobs <= 1) {
        for (std::size_t i = 0; i < jobs; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, jobs); ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < jobs; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    const std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

// --------------------------------------------------------------- commands

int cmd_generate(const CommonFlags& f, std::ostream& out) {
    const auto c = build_config(f);
    const auto data_config = c.resolved_data();
    const fs::path dir = f.out_dir;
    ensure_dir(dir);
    auto series = datagen::generate(data_config.generator);
    const auto splits = datagen::split(series, data_config.fractions, data_config.generator.seed);
    const auto data = harness::prepare_experiment(std::move(series), data_config);
    const std::vector<LabeledSeries>* split_series[] = {&splits.train, &splits.deploy, &splits.holdout};
    const std::vector<PosteriorTrajectory>* trajs[] = {&data.train, &data.deploy, &data.holdout};
    for (int i = 0; i < 3; ++i) {
        const std::string name = kSplits[i];
        write_file(dir / (name + "_series.csv"), [&](std::ostream& o) { datagen::write_csv(o, *split_series[i]); });
        write_file(dir / (name + "_posteriors.csv"),
                   [&](std::ostream& o) { classifier::write_posterior_csv(o, *trajs[i]); });
    }
    write_file(dir / "config.json", [&](std::ostream& o) { o << harness::to_json(c) << '\n'; });
    out << "generated " << data.train.size() << " train, " << data.deploy.size() << " deploy, "
        << data.holdout.size() << " holdout series (T=" << data.T << ", K=" << data.n_classes << ") in "
        << dir.string() << "\n"
        << "holdout accuracy t=T/2 " << fmt(data.holdout_accuracy_half) << ", t=T "
        << fmt(data.holdout_accuracy_full) << '\n';
    return kExitOk;
}

int cmd_run(const CommonFlags& f, std::ostream& out) {
    const auto c = build_config(f);
    const auto data = obtain_data(c, f.data_dir);
    const auto log = harness::run(c.run, data);
    if (c.run.debug_hash) harness::verify_integrity(log, c.run.batch_size);
    write_run(f.out_dir, c, log);
    out << c.run.trigger << ' ' << costs::to_string(c.run.scenario) << " seed " << c.run.seed << ": "
        << log.records.size() << " steps, normalized regret " << fmt(log.normalized_regret()) << '\n';
    return kExitOk;
}

struct SweepFlags {
    std::string scenarios = "ac_d,pv_d,ac_s,pv_s";
    std::string triggers = "all";
    std::string seeds = "0";
    int jobs = 1;
};

int cmd_sweep(const CommonFlags& f, const SweepFlags& s, std::ostream& out) {
    const auto base = build_config(f);
    const auto scenarios = parse_scenarios(s.scenarios);
    const auto names = parse_triggers(s.triggers);
    const auto seeds = parse_seeds(s.seeds);
    const fs::path root = f.out_dir;
    ensure_dir(root);

    struct Row {
        std::string scenario, trigger;
        std::uint64_t seed;
        std::size_t steps;
        double final_regret, normalized_regret, final_avgcost;
    };
    std::vector<Row> rows;
    std::optional<ExperimentData> shared;
    if (!f.data_dir.empty()) shared = load_data(f.data_dir);

    for (const auto seed : seeds) {
        auto seed_config = base;
        seed_config.run.seed = seed;
        const ExperimentData data = shared ? *shared : harness::prepare_experiment(seed_config.resolved_data());
        const std::size_t jobs = scenarios.size() * names.size();
        std::vector<Row> seed_rows(jobs);
        parallel_for(jobs, s.jobs, [&](std::size_t j) {
            auto c = seed_config;
            c.run.scenario = scenarios[j / names.size()];
            c.run.trigger = names[j % names.size()];
            const auto log = harness::run(c.run, data);
            if (c.run.debug_hash) harness::verify_integrity(log, c.run.batch_size);
            const std::string scen(costs::to_string(c.run.scenario));
            write_run(root / scen / c.run.trigger / ("seed" + std::to_string(seed)), c, log);
            seed_rows[j] = {scen,
                            c.run.trigger,
                            seed,
                            log.records.size(),
                            log.final_regret(),
                            log.normalized_regret(),
                            log.holdout.empty() ? 0.0 : log.holdout.back().metrics.avg_cost};
        });
        for (const auto& r : seed_rows) {
            out << r.scenario << ' ' << r.trigger << " seed " << r.seed << ": normalized regret "
                << fmt(r.normalized_regret) << '\n';
        }
        rows.insert(rows.end(), seed_rows.begin(), seed_rows.end());
    }

    write_file(root / "summary.csv", [&](std::ostream& o) {
        o << "scenario,trigger,seed,steps,final_regret,normalized_regret,final_holdout_avgcost\n";
        for (const auto& r : rows) {
            o << r.scenario << ',' << r.trigger << ',' << r.seed << ',' << r.steps << ',' << fmt(r.final_regret)
              << ',' << fmt(r.normalized_regret) << ',' << fmt(r.final_avgcost) << '\n';
        }
    });
    out << "wrote " << rows.size() << " runs to " << root.string() << '\n';
    return kExitOk;
}

struct TimingFlags {
    std::string scenario = "pv_s";
    std::string triggers = "all";
    std::string seeds = "0";
};

int cmd_timing(const CommonFlags& f, const TimingFlags& t, std::ostream& out) {
    auto base = build_config(f);
    base.run.scenario = costs::parse_scenario(t.scenario);
    base.run.record_timing = true;
    const auto names = parse_triggers(t.triggers);
    const auto seeds = parse_seeds(t.seeds);
    const fs::path root = f.out_dir;
    ensure_dir(root);

    std::vector<double> infer(names.size(), 0.0), update(names.size(), 0.0);
    std::vector<std::size_t> steps(names.size(), 0);
    for (const auto seed : seeds) {
        auto c = base;
        c.run.seed = seed;
        const auto data = harness::prepare_experiment(c.resolved_data());
        for (std::size_t i = 0; i < names.size(); ++i) {
            c.run.trigger = names[i];
            const auto log = harness::run(c.run, data);
            for (double s : log.batch_infer_seconds) infer[i] += s;
            for (double s : log.batch_update_seconds) update[i] += s;
            steps[i] += log.records.size();
        }
    }
    write_file(root / "timing.csv", [&](std::ostream& o) {
        o << "trigger,scenario,steps,infer_ms,update_ms\n";
        for (std::size_t i = 0; i < names.size(); ++i) {
            const double n = static_cast<double>(std::max<std::size_t>(1, steps[i]));
            o << names[i] << ',' << t.scenario << ',' << steps[i] << ',' << fmt(infer[i] * 1e3 / n) << ','
              << fmt(update[i] * 1e3 / n) << '\n';
        }
    });
    out << "trigger            infer_ms   update_ms\n";
    for (std::size_t i = 0; i < names.size(); ++i) {
        const double n = static_cast<double>(std::max<std::size_t>(1, steps[i]));
        char line[128];
        std::snprintf(line, sizeof line, "%-16s %10.4f %11.4f\n", names[i].c_str(), infer[i] * 1e3 / n,
                      update[i] * 1e3 / n);
        out << line;
    }
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Early-classification trigger experiments under drifting and stochastic costs", "ects"};
    app.require_subcommand(1);

    CommonFlags gen_flags, run_flags, sweep_flags, timing_flags;
    SweepFlags sweep;
    TimingFlags timing;

    auto* gen = app.add_subcommand("generate", "generate a dataset and write series and posterior caches");
    add_common(*gen, gen_flags, false);

    auto* run = app.add_subcommand("run", "run one trigger on one scenario and seed");
    add_common(*run, run_flags, true);

    auto* sw = app.add_subcommand("sweep", "run triggers x scenarios x seeds");
    add_common(*sw, sweep_flags, true);
    sw->add_option("--scenarios", sweep.scenarios, "comma-separated scenario names");
    sw->add_option("--triggers", sweep.triggers, "'all' or comma-separated trigger names");
    sw->add_option("--seeds", sweep.seeds, "seed list such as 0..4 or 0,2,3");
    sw->add_option("--jobs", sweep.jobs, "concurrent runs per seed")->check(CLI::PositiveNumber);

    auto* tm = app.add_subcommand("timing", "mean per-series inference and update time per trigger");
    add_common(*tm, timing_flags, false);
    tm->add_option("--scenario", timing.scenario, "scenario used for timing");
    tm->add_option("--triggers", timing.triggers, "'all' or comma-separated trigger names");
    tm->add_option("--seeds", timing.seeds, "seed list such as 0..4");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        if (gen->parsed()) return cmd_generate(gen_flags, out);
        if (run->parsed()) return cmd_run(run_flags, out);
        if (sw->parsed()) return cmd_sweep(sweep_flags, sweep, out);
        if (tm->parsed()) return cmd_timing(timing_flags, timing, out);
    } catch (const ConfigError& e) {
        err << "ects: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        err << "ects: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::ios_base::failure& e) {
        err << "ects: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        err << "ects: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitUsage;
}

}  // namespace ects::cli
