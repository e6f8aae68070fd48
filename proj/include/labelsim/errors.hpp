#pragma once

#include <stdexcept>
#include <string>

namespace labelsim {

/// Bad or inconsistent input data (CSV ingestion, too-small datasets).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration value, schema, or argument range.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failure writing results to disk.
class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace labelsim
