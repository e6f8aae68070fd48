#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "labelsim/config.hpp"

namespace labelsim {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitData = 3,
    kExitRuntime = 4,
};

struct CliOptions {
    std::filesystem::path config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    std::optional<std::filesystem::path> out;
    EnvLookup env = process_env;
};

/// Runs one of "sweep", "poison", "active", "bench". On success prints the
/// run directory to `out` and returns 0. On failure writes a one-line JSON
/// error object to `err` and returns 2 (config), 3 (data) or 4 (runtime).
int run_command(const std::string& command, const CliOptions& options, std::ostream& out, std::ostream& err);

/// Resolves the config the way run_command does (file, environment, flags).
RunConfig resolve_config(const CliOptions& options);

}  // namespace labelsim
