#include "labelsim/runner.hpp"

#include <chrono>
#include <ostream>

#include "labelsim/csv.hpp"
#include "labelsim/errors.hpp"
#include "labelsim/report.hpp"

namespace labelsim {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void print_error(std::ostream& err, int code, const char* kind, const std::string& message) {
    err << json{{"error", {{"code", code}, {"kind", kind}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

RunConfig resolve_config(const CliOptions& options) {
    if (options.config.empty()) throw ConfigError("--config is required");
    const bool env_dataset = options.env && options.env("LABELSIM_DATASET").has_value();
    RunConfig cfg = parse_config(options.config, !env_dataset);
    if (options.env) apply_environment(cfg, options.env);
    if (options.seed) cfg.seed = *options.seed;
    if (options.workers) cfg.workers = *options.workers;
    if (options.out) cfg.output_dir = *options.out;
    if (cfg.dataset.empty()) throw ConfigError(options.config.string() + ": dataset: missing dataset path");
    cfg.apply_run_settings();
    return cfg;
}

int run_command(const std::string& command, const CliOptions& options, std::ostream& out, std::ostream& err) {
    try {
        if (command != "sweep" && command != "poison" && command != "active" && command != "bench") {
            throw ConfigError("unknown command '" + command + "'");
        }
        const RunConfig cfg = resolve_config(options);
        const Dataset ds = load_csv(cfg.dataset, cfg.schema);

        RunManifest manifest;
        manifest.tool_version = kToolVersion;
        manifest.command = command;
        manifest.config_hash = cfg.hash();
        manifest.master_seed = cfg.seed;
        manifest.workers = cfg.workers;
        manifest.dataset = fingerprint(cfg.dataset, ds);
        manifest.hardware_note = cfg.hardware_note;
        manifest.started_utc = utc_timestamp();

        ResultBundle results;
        const bool all = command == "bench";
        if (all || command == "sweep") {
            const auto t0 = Clock::now();
            auto r = run_size_sweep(cfg.sweep, ds);
            manifest.wall_clock_seconds.emplace_back("sweep", seconds_since(t0));
            merge_into(results, bundle(r), "sweep");
        }
        if (all || command == "poison") {
            const auto t0 = Clock::now();
            auto r = run_poison_grid(cfg.poison, ds);
            manifest.wall_clock_seconds.emplace_back("poison", seconds_since(t0));
            merge_into(results, bundle(r), "poison");
        }
        if (all || command == "active") {
            const auto t0 = Clock::now();
            auto r = run_al_schedules(cfg.active, ds);
            manifest.wall_clock_seconds.emplace_back("active", seconds_since(t0));
            merge_into(results, bundle(r), "active");
        }

        const auto dir = make_run_dir(cfg.output_dir, manifest.started_utc, manifest.config_hash);
        emit_results(dir, results);
        json m = manifest.to_json();
        if (all) {
            const auto& w = manifest.wall_clock_seconds;  // sweep, poison, active
            m["bench_ordering_poison_lt_sweep_lt_active"] = w[1].second < w[0].second && w[0].second < w[2].second;
        }
        write_json(dir / "manifest.json", m);
        out << dir.string() << "\n";
        return kExitOk;
    } catch (const ConfigError& e) {
        print_error(err, kExitConfig, "config", e.what());
        return kExitConfig;
    } catch (const DataError& e) {
        print_error(err, kExitData, "data", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        print_error(err, kExitRuntime, "runtime", e.what());
        return kExitRuntime;
    }
}

}  // namespace labelsim
