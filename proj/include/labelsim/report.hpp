#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "labelsim/experiments.hpp"

namespace labelsim {

inline constexpr int kResultsCsvVersion = 1;

/// Pinned header of results.csv (version 1). Thirteen result columns plus a
/// trailing `degenerate` flag set when precision, recall or F1 was undefined
/// and reported as 0.
inline constexpr const char* kResultsCsvHeader =
    "experiment,fraction_or_budget,flip_mal,flip_ben,iteration,trial,accuracy,precision,recall,f1,fp,fn,seed,"
    "degenerate";

inline constexpr const char* kCurveCsvHeader =
    "experiment,x,trials,accuracy_mean,accuracy_std,precision_mean,precision_std,recall_mean,recall_std,f1_mean,"
    "f1_std,fp_mean,fp_std,fn_mean,fn_std";

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

void write_results_csv(std::span<const TrialRecord> records, std::ostream& out);

/// Parses a results.csv back into records. Undefined-metric flags are
/// restored as a single degenerate marker on precision.
std::vector<TrialRecord> read_results_csv(std::istream& in);

struct NamedCurve {
    std::string experiment;
    std::vector<CurvePoint> points;
};

void write_curves_csv(std::span<const NamedCurve> curves, std::ostream& out);

nlohmann::json stats_json(const AggregateStats& s);
nlohmann::json summary_json(const SweepResult& r);
nlohmann::json summary_json(const PoisonResult& r);
nlohmann::json summary_json(const ALResult& r);

/// What a run writes besides the manifest.
struct ResultBundle {
    std::vector<TrialRecord> records;
    std::vector<NamedCurve> curves;
    nlohmann::json summary;
};

ResultBundle bundle(const SweepResult& r);
ResultBundle bundle(const PoisonResult& r);
ResultBundle bundle(const ALResult& r);

/// Concatenates records and curves; summaries go under their experiment key.
void merge_into(ResultBundle& into, ResultBundle from, const std::string& key);

/// Writes results.csv, curves.csv and summary.json into `dir`.
/// Throws OutputError when the directory cannot be written.
void emit_results(const std::filesystem::path& dir, const ResultBundle& results);

struct DatasetFingerprint {
    std::string content_hash;  // FNV-1a 64 of the file bytes, hex
    std::size_t samples = 0;
    ClassCounts class_counts;
};

DatasetFingerprint fingerprint(const std::filesystem::path& file, const Dataset& ds);

struct RunManifest {
    std::string tool_version;
    std::string command;
    std::string config_hash;
    std::uint64_t master_seed = 0;
    std::size_t workers = 0;
    DatasetFingerprint dataset;
    std::vector<std::pair<std::string, double>> wall_clock_seconds;
    std::string hardware_note;
    std::string started_utc;

    nlohmann::json to_json() const;
};

void write_json(const std::filesystem::path& file, const nlohmann::json& j);

/// Creates `<root>/<YYYYmmddTHHMMSSZ>-<hash prefix>`, adding a numeric
/// suffix if that name is taken.
std::filesystem::path make_run_dir(const std::filesystem::path& root, const std::string& utc_stamp,
                                   const std::string& config_hash);

std::string utc_timestamp();

}  // namespace labelsim
