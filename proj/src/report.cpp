#include "labelsim/report.hpp"

#include <charconv>
#include <cmath>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "labelsim/config.hpp"
#include "labelsim/csv.hpp"
#include "labelsim/errors.hpp"

namespace labelsim {

using nlohmann::json;

namespace {

template <typename T>
T parse_field(const std::string& text, std::size_t line, const char* column) {
    T v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw DataError("results csv line " + std::to_string(line) + ": bad " + column + " '" + text + "'");
    }
    return v;
}

std::ofstream open_out(const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError("cannot write " + file.string());
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& file) {
    out.flush();
    if (!out) throw OutputError("error while writing " + file.string());
}

json summary_or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json metric_json(const MetricSummary& m) {
    return json{{"mean", m.mean}, {"std", summary_or_null(m.std)}, {"min", m.min}, {"max", m.max}};
}

json curve_json(std::span<const CurvePoint> points) {
    json arr = json::array();
    for (const auto& p : points) arr.push_back({{"x", p.x}, {"stats", stats_json(p.stats)}});
    return arr;
}

json spec_json(const FlipSpec& s) {
    return json{{"malicious", s.malicious_ratio}, {"benign", s.benign_ratio}, {"nominal_poison_pct", s.nominal_poison_pct()}};
}

json ttest_json(const TTestResult& t) {
    // JSON has no infinity; degenerate zero-variance tests report the sign only.
    json stat = std::isfinite(t.t_statistic) ? json(t.t_statistic) : json(t.t_statistic > 0 ? "inf" : "-inf");
    return json{{"t", stat},
                {"df", t.degrees_of_freedom},
                {"p_value", t.p_value},
                {"significant_at_0_05", t.significant_at_0_05}};
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_results_csv(std::span<const TrialRecord> records, std::ostream& out) {
    out << kResultsCsvHeader << "\r\n";
    for (const auto& r : records) {
        const auto& m = r.metrics;
        out << csv_escape(r.experiment) << ',' << format_number(r.fraction_or_budget) << ','
            << format_number(r.flip_mal) << ',' << format_number(r.flip_ben) << ',' << r.iteration << ',' << r.trial
            << ',' << format_number(m.accuracy) << ',' << format_number(m.precision) << ','
            << format_number(m.recall) << ',' << format_number(m.f1) << ',' << m.fp_count << ',' << m.fn_count << ','
            << r.seed << ',' << (m.degenerate() ? "true" : "false") << "\r\n";
    }
}

std::vector<TrialRecord> read_results_csv(std::istream& in) {
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    const auto rows = parse_csv(text);
    if (rows.empty()) throw DataError("results csv is empty");
    std::string header;
    for (std::size_t i = 0; i < rows[0].fields.size(); ++i) header += (i ? "," : "") + rows[0].fields[i];
    if (header != kResultsCsvHeader) throw DataError("results csv header mismatch: " + header);

    std::vector<TrialRecord> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& f = rows[i].fields;
        const auto line = rows[i].line;
        if (f.size() != 14) throw DataError("results csv line " + std::to_string(line) + ": expected 14 fields");
        TrialRecord r;
        r.experiment = f[0];
        r.fraction_or_budget = parse_field<double>(f[1], line, "fraction_or_budget");
        r.flip_mal = parse_field<double>(f[2], line, "flip_mal");
        r.flip_ben = parse_field<double>(f[3], line, "flip_ben");
        r.iteration = parse_field<std::size_t>(f[4], line, "iteration");
        r.trial = parse_field<std::size_t>(f[5], line, "trial");
        r.metrics.accuracy = parse_field<double>(f[6], line, "accuracy");
        r.metrics.precision = parse_field<double>(f[7], line, "precision");
        r.metrics.recall = parse_field<double>(f[8], line, "recall");
        r.metrics.f1 = parse_field<double>(f[9], line, "f1");
        r.metrics.fp_count = parse_field<std::size_t>(f[10], line, "fp");
        r.metrics.fn_count = parse_field<std::size_t>(f[11], line, "fn");
        r.seed = parse_field<std::uint64_t>(f[12], line, "seed");
        if (f[13] != "true" && f[13] != "false") throw DataError("results csv line " + std::to_string(line) + ": bad degenerate flag");
        r.metrics.precision_undefined = f[13] == "true";
        out.push_back(std::move(r));
    }
    return out;
}

void write_curves_csv(std::span<const NamedCurve> curves, std::ostream& out) {
    out << kCurveCsvHeader << "\r\n";
    auto cell = [](const MetricSummary& m) {
        return format_number(m.mean) + "," + (m.std ? format_number(*m.std) : std::string());
    };
    for (const auto& c : curves) {
        for (const auto& p : c.points) {
            const auto& s = p.stats;
            out << csv_escape(c.experiment) << ',' << format_number(p.x) << ',' << s.trials << ',' << cell(s.accuracy)
                << ',' << cell(s.precision) << ',' << cell(s.recall) << ',' << cell(s.f1) << ',' << cell(s.fp_count)
                << ',' << cell(s.fn_count) << "\r\n";
        }
    }
}

json stats_json(const AggregateStats& s) {
    return json{{"trials", s.trials},
                {"accuracy", metric_json(s.accuracy)},
                {"precision", metric_json(s.precision)},
                {"recall", metric_json(s.recall)},
                {"f1", metric_json(s.f1)},
                {"fp", metric_json(s.fp_count)},
                {"fn", metric_json(s.fn_count)}};
}

json summary_json(const SweepResult& r) {
    json single = json::array();
    for (const auto& t : r.single_trial) single.push_back({{"fraction", t.fraction_or_budget}, {"accuracy", t.metrics.accuracy}});
    return json{{"train_size", r.train_size},
                {"eval_size", r.eval_size},
                {"average", curve_json(r.average)},
                {"single_trial", single},
                {"records", r.records.size()}};
}

json summary_json(const PoisonResult& r) {
    json cells = json::array();
    for (const auto& c : r.cells) {
        cells.push_back({{"subset_fraction", c.subset_fraction},
                         {"flip", spec_json(c.spec)},
                         {"mean_flipped_fraction", c.mean_flipped_fraction},
                         {"stats", stats_json(c.stats)}});
    }
    json tests = json::array();
    for (const auto& t : r.tests) {
        tests.push_back({{"a", {{"subset_fraction", t.subset_a}, {"flip", spec_json(t.spec_a)}}},
                         {"b", {{"subset_fraction", t.subset_b}, {"flip", spec_json(t.spec_b)}}},
                         {"metric", "f1"},
                         {"welch", ttest_json(t.f1)}});
    }
    return json{{"cells", cells}, {"t_tests", tests}, {"records", r.records.size()}};
}

json summary_json(const ALResult& r) {
    json schedules = json::array();
    for (const auto& s : r.schedules) {
        schedules.push_back({{"iterations", s.iterations},
                             {"curve", curve_json(s.curve)},
                             {"plateau", {{"saturation_budget", s.plateau.saturation_budget}, {"epsilon", s.plateau.epsilon}}}});
    }
    return json{{"schedules", schedules}, {"traces", r.trace_count}, {"records", r.records.size()}};
}

ResultBundle bundle(const SweepResult& r) {
    return {r.records, {{"sweep", r.average}}, json{{"results_csv_version", kResultsCsvVersion}, {"sweep", summary_json(r)}}};
}

ResultBundle bundle(const PoisonResult& r) {
    return {r.records, {}, json{{"results_csv_version", kResultsCsvVersion}, {"poison", summary_json(r)}}};
}

ResultBundle bundle(const ALResult& r) {
    ResultBundle b{r.records, {}, json{{"results_csv_version", kResultsCsvVersion}, {"active", summary_json(r)}}};
    for (const auto& s : r.schedules) b.curves.push_back({"active-" + std::to_string(s.iterations), s.curve});
    return b;
}

void merge_into(ResultBundle& into, ResultBundle from, const std::string& key) {
    into.records.insert(into.records.end(), std::make_move_iterator(from.records.begin()),
                        std::make_move_iterator(from.records.end()));
    into.curves.insert(into.curves.end(), std::make_move_iterator(from.curves.begin()),
                       std::make_move_iterator(from.curves.end()));
    into.summary["results_csv_version"] = kResultsCsvVersion;
    into.summary[key] = std::move(from.summary[key]);
}

void write_json(const std::filesystem::path& file, const json& j) {
    auto out = open_out(file);
    out << j.dump(2) << "\n";
    finish(out, file);
}

void emit_results(const std::filesystem::path& dir, const ResultBundle& results) {
    if (results.records.empty()) throw OutputError("no records to emit");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw OutputError("cannot create output directory " + dir.string() + ": " + ec.message());
    {
        const auto file = dir / "results.csv";
        auto out = open_out(file);
        write_results_csv(results.records, out);
        finish(out, file);
    }
    {
        const auto file = dir / "curves.csv";
        auto out = open_out(file);
        write_curves_csv(results.curves, out);
        finish(out, file);
    }
    write_json(dir / "summary.json", results.summary);
}

DatasetFingerprint fingerprint(const std::filesystem::path& file, const Dataset& ds) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw DataError("cannot open dataset file " + file.string());
    const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return {hex64(fnv1a64(bytes)), ds.size(), ds.class_counts()};
}

json RunManifest::to_json() const {
    json clocks = json::object();
    for (const auto& [name, secs] : wall_clock_seconds) clocks[name] = secs;
    return json{{"tool_version", tool_version},
                {"command", command},
                {"config_hash", config_hash},
                {"master_seed", master_seed},
                {"workers", workers},
                {"dataset",
                 {{"content_hash", dataset.content_hash},
                  {"samples", dataset.samples},
                  {"class_counts", {{"benign", dataset.class_counts.benign}, {"malicious", dataset.class_counts.malicious}}}}},
                {"wall_clock_seconds", clocks},
                {"hardware_note", hardware_note},
                {"started_utc", started_utc}};
}

std::filesystem::path make_run_dir(const std::filesystem::path& root, const std::string& utc_stamp,
                                   const std::string& config_hash) {
    const auto base = utc_stamp + "-" + config_hash.substr(0, 8);
    std::error_code ec;
    std::filesystem::create_directories(root, ec);
    if (ec) throw OutputError("cannot create output directory " + root.string() + ": " + ec.message());
    for (int i = 0; i < 10000; ++i) {
        const auto dir = root / (i == 0 ? base : base + "-" + std::to_string(i));
        if (std::filesystem::create_directory(dir, ec)) return dir;
        if (ec) throw OutputError("cannot create run directory " + dir.string() + ": " + ec.message());
    }
    throw OutputError("too many runs named " + base + " in " + root.string());
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

}  // namespace labelsim
