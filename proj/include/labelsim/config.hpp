#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "json.hpp"

#include "labelsim/csv.hpp"
#include "labelsim/experiments.hpp"

namespace labelsim {

/// Everything a run needs. Produced by parse_config with every default
/// filled in; the experiment configs already carry the shared forest
/// settings, master seed, and worker count.
struct RunConfig {
    std::filesystem::path dataset;
    CsvSchema schema;
    std::uint64_t seed = 0;
    std::size_t workers = 0;  // 0 = all available cores
    std::filesystem::path output_dir = "results";
    std::string hardware_note;

    SweepConfig sweep;
    PoisonConfig poison;
    ALConfig active;

    /// Result-affecting settings only (no paths, worker count or notes),
    /// with sorted keys.
    nlohmann::json canonical() const;

    /// FNV-1a 64 of canonical().dump(), as 16 hex digits.
    std::string hash() const;

    /// Propagates seed and workers into the three experiment configs.
    void apply_run_settings();
};

/// Reads and validates a YAML config file. Unknown keys, out-of-range values
/// and a missing dataset path raise ConfigError prefixed with "file:line:".
RunConfig parse_config(const std::filesystem::path& path, bool require_dataset = true);

/// Same, from text. Relative dataset/schema paths resolve against `base_dir`.
RunConfig parse_config_text(const std::string& text, const std::string& source,
                            const std::filesystem::path& base_dir = {}, bool require_dataset = true);

/// Applies LABELSIM_DATASET and LABELSIM_OUT overrides.
using EnvLookup = std::function<std::optional<std::string>(const char*)>;
void apply_environment(RunConfig& cfg, const EnvLookup& env);
std::optional<std::string> process_env(const char* name);

/// Schema file: label_column, benign_values, malicious_values, ignore_columns.
CsvSchema parse_schema_file(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string hex64(std::uint64_t v);

}  // namespace labelsim
