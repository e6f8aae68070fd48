#include "labelsim/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "labelsim/errors.hpp"

namespace labelsim {

namespace {

using nlohmann::json;

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& at, const std::string& field, const std::string& msg) const {
        std::string where = source_;
        if (at.IsDefined() && at.Mark().line >= 0) where += ":" + std::to_string(at.Mark().line + 1);
        throw ConfigError(where + ": " + field + ": " + msg);
    }

    void require_map(const YAML::Node& n, const std::string& field) const {
        if (!n.IsMap()) fail(n, field, "expected a mapping");
    }

    void check_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& section) const {
        for (auto it = map.begin(); it != map.end(); ++it) {
            const auto key = it->first.as<std::string>();
            if (!allowed.contains(key)) {
                fail(it->first, section.empty() ? key : section + "." + key, "unknown key");
            }
        }
    }

    template <typename T>
    T scalar(const YAML::Node& n, const std::string& field, const char* expected) const {
        if (!n.IsScalar()) fail(n, field, std::string("expected ") + expected);
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            fail(n, field, std::string("expected ") + expected + ", got '" + n.Scalar() + "'");
        }
    }

    double real(const YAML::Node& n, const std::string& field) const {
        const auto v = scalar<double>(n, field, "a number");
        if (!std::isfinite(v)) fail(n, field, "must be finite");
        return v;
    }

    double fraction(const YAML::Node& n, const std::string& field, bool allow_one) const {
        const double v = real(n, field);
        if (!(v > 0.0) || (allow_one ? v > 1.0 : v >= 1.0)) {
            fail(n, field, std::string("must be in (0, 1") + (allow_one ? "]" : ")") + ", got " + n.Scalar());
        }
        return v;
    }

    double ratio(const YAML::Node& n, const std::string& field) const {
        const double v = real(n, field);
        if (v < 0.0 || v > 1.0) fail(n, field, "must be in [0, 1], got " + n.Scalar());
        return v;
    }

    std::size_t count(const YAML::Node& n, const std::string& field, std::size_t min) const {
        const auto text = n.IsScalar() ? n.Scalar() : std::string();
        if (!text.empty() && text.front() == '-') fail(n, field, "must be >= " + std::to_string(min));
        const auto v = scalar<std::uint64_t>(n, field, "a non-negative integer");
        if (v < min) fail(n, field, "must be >= " + std::to_string(min) + ", got " + std::to_string(v));
        return static_cast<std::size_t>(v);
    }

    bool boolean(const YAML::Node& n, const std::string& field) const { return scalar<bool>(n, field, "true or false"); }

    std::string string(const YAML::Node& n, const std::string& field) const {
        return scalar<std::string>(n, field, "a string");
    }

    std::vector<std::string> strings(const YAML::Node& n, const std::string& field) const {
        if (!n.IsSequence()) fail(n, field, "expected a list of strings");
        std::vector<std::string> out;
        for (std::size_t i = 0; i < n.size(); ++i) out.push_back(string(n[i], field + "[" + std::to_string(i) + "]"));
        return out;
    }

    const std::string& source() const { return source_; }

private:
    std::string source_;
};

double snap(double v) { return std::round(v * 1e9) / 1e9; }

std::vector<double> fraction_list(const Reader& rd, const YAML::Node& n, const std::string& field) {
    std::vector<double> out;
    if (n.IsMap()) {
        rd.check_keys(n, {"start", "stop", "step"}, field);
        for (const char* k : {"start", "stop", "step"}) {
            if (!n[k]) rd.fail(n, field, std::string("range needs '") + k + "'");
        }
        const double start = rd.fraction(n["start"], field + ".start", true);
        const double stop = rd.fraction(n["stop"], field + ".stop", true);
        const double step = rd.fraction(n["step"], field + ".step", true);
        if (stop < start) rd.fail(n, field, "stop must be >= start");
        const auto steps = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
        for (long long i = 0; i <= steps; ++i) out.push_back(snap(start + static_cast<double>(i) * step));
        return out;
    }
    if (!n.IsSequence() || n.size() == 0) rd.fail(n, field, "expected a non-empty list or a {start, stop, step} range");
    for (std::size_t i = 0; i < n.size(); ++i) {
        out.push_back(rd.fraction(n[i], field + "[" + std::to_string(i) + "]", true));
    }
    return out;
}

CsvSchema schema_from(const Reader& rd, const YAML::Node& n, const std::string& field) {
    rd.require_map(n, field);
    rd.check_keys(n, {"label_column", "benign_values", "malicious_values", "ignore_columns"}, field);
    CsvSchema s;
    if (n["label_column"]) s.label_column = rd.string(n["label_column"], field + ".label_column");
    if (n["benign_values"]) s.benign_values = rd.strings(n["benign_values"], field + ".benign_values");
    if (n["malicious_values"]) s.malicious_values = rd.strings(n["malicious_values"], field + ".malicious_values");
    if (n["ignore_columns"]) s.ignore_columns = rd.strings(n["ignore_columns"], field + ".ignore_columns");
    if (s.benign_values.empty() || s.malicious_values.empty()) rd.fail(n, field, "label vocabularies must not be empty");
    for (const auto& b : s.benign_values) {
        for (const auto& m : s.malicious_values) {
            if (b == m) rd.fail(n, field, "value '" + b + "' is both benign and malicious");
        }
    }
    return s;
}

YAML::Node load_yaml(const std::string& text, const std::string& source) {
    try {
        return YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
}

std::string read_file(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(std::string("cannot open ") + what + " " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void read_forest(const Reader& rd, const YAML::Node& n, ForestConfig& f) {
    rd.require_map(n, "forest");
    rd.check_keys(n, {"n_trees", "max_depth", "min_samples_split", "features_per_split"}, "forest");
    if (n["n_trees"]) f.n_trees = rd.count(n["n_trees"], "forest.n_trees", 1);
    if (n["max_depth"] && !n["max_depth"].IsNull()) f.max_depth = rd.count(n["max_depth"], "forest.max_depth", 0);
    if (n["min_samples_split"]) f.min_samples_split = rd.count(n["min_samples_split"], "forest.min_samples_split", 1);
    if (n["features_per_split"]) {
        try {
            f.features_per_split = FeatureRule::parse(rd.string(n["features_per_split"], "forest.features_per_split"));
        } catch (const ConfigError& e) {
            rd.fail(n["features_per_split"], "forest.features_per_split", e.what());
        }
    }
}

json forest_json(const ForestConfig& f) {
    return json{{"n_trees", f.n_trees},
                {"max_depth", f.max_depth ? json(*f.max_depth) : json(nullptr)},
                {"min_samples_split", f.min_samples_split},
                {"features_per_split", f.features_per_split.to_string()},
                {"bootstrap", f.bootstrap}};
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

CsvSchema parse_schema_file(const std::filesystem::path& path) {
    const auto source = path.string();
    const Reader rd(source);
    return schema_from(rd, load_yaml(read_file(path, "schema file"), source), "schema");
}

RunConfig parse_config_text(const std::string& text, const std::string& source, const std::filesystem::path& base_dir,
                            bool require_dataset) {
    const Reader rd(source);
    const YAML::Node root = load_yaml(text, source);
    RunConfig cfg;
    if (!root.IsDefined() || root.IsNull()) {
        if (require_dataset) throw ConfigError(source + ": dataset: missing dataset path");
        return cfg;
    }
    rd.require_map(root, "<root>");
    rd.check_keys(root,
                  {"dataset", "schema", "seed", "workers", "output_dir", "hardware_note", "forest", "sweep", "poison",
                   "active"},
                  "");

    auto resolve = [&](const std::filesystem::path& p) { return p.is_absolute() || base_dir.empty() ? p : base_dir / p; };

    if (root["dataset"]) cfg.dataset = resolve(rd.string(root["dataset"], "dataset"));
    if (root["schema"]) {
        const auto& s = root["schema"];
        cfg.schema = s.IsScalar() ? parse_schema_file(resolve(rd.string(s, "schema"))) : schema_from(rd, s, "schema");
    }
    if (root["seed"]) cfg.seed = rd.scalar<std::uint64_t>(root["seed"], "seed", "an unsigned 64-bit integer");
    if (root["workers"]) cfg.workers = rd.count(root["workers"], "workers", 0);
    if (root["output_dir"]) cfg.output_dir = rd.string(root["output_dir"], "output_dir");
    if (root["hardware_note"]) cfg.hardware_note = rd.string(root["hardware_note"], "hardware_note");

    ForestConfig forest;
    if (root["forest"]) read_forest(rd, root["forest"], forest);
    cfg.sweep.forest = forest;
    cfg.poison.forest = forest;
    cfg.active.forest = forest;
    cfg.sweep.forest.bootstrap = true;
    cfg.poison.forest.bootstrap = true;
    cfg.active.forest.bootstrap = false;

    if (const auto n = root["sweep"]) {
        rd.require_map(n, "sweep");
        rd.check_keys(n, {"fractions", "trials", "holdout_fraction", "bootstrap"}, "sweep");
        if (n["fractions"]) cfg.sweep.fractions = fraction_list(rd, n["fractions"], "sweep.fractions");
        if (n["trials"]) cfg.sweep.trials = rd.count(n["trials"], "sweep.trials", 1);
        if (n["holdout_fraction"]) cfg.sweep.holdout_fraction = rd.fraction(n["holdout_fraction"], "sweep.holdout_fraction", false);
        if (n["bootstrap"]) cfg.sweep.forest.bootstrap = rd.boolean(n["bootstrap"], "sweep.bootstrap");
    }
    if (const auto n = root["poison"]) {
        rd.require_map(n, "poison");
        rd.check_keys(n, {"subset_fractions", "flip_specs", "trials", "holdout_fraction", "bootstrap"}, "poison");
        if (n["subset_fractions"]) cfg.poison.subset_fractions = fraction_list(rd, n["subset_fractions"], "poison.subset_fractions");
        if (n["flip_specs"]) {
            const auto& specs = n["flip_specs"];
            if (!specs.IsSequence() || specs.size() == 0) rd.fail(specs, "poison.flip_specs", "expected a non-empty list");
            cfg.poison.flip_specs.clear();
            for (std::size_t i = 0; i < specs.size(); ++i) {
                const auto field = "poison.flip_specs[" + std::to_string(i) + "]";
                rd.require_map(specs[i], field);
                rd.check_keys(specs[i], {"malicious", "benign"}, field);
                FlipSpec fs;
                if (specs[i]["malicious"]) fs.malicious_ratio = rd.ratio(specs[i]["malicious"], field + ".malicious");
                if (specs[i]["benign"]) fs.benign_ratio = rd.ratio(specs[i]["benign"], field + ".benign");
                cfg.poison.flip_specs.push_back(fs);
            }
        }
        if (n["trials"]) cfg.poison.trials = rd.count(n["trials"], "poison.trials", 1);
        if (n["holdout_fraction"]) cfg.poison.holdout_fraction = rd.fraction(n["holdout_fraction"], "poison.holdout_fraction", false);
        if (n["bootstrap"]) cfg.poison.forest.bootstrap = rd.boolean(n["bootstrap"], "poison.bootstrap");
    }
    if (const auto n = root["active"]) {
        rd.require_map(n, "active");
        rd.check_keys(n,
                      {"iteration_counts", "eval_resamplings", "reps_per_eval", "holdout_fraction", "bootstrap",
                       "plateau_epsilon", "budget"},
                      "active");
        if (n["iteration_counts"]) {
            const auto& ic = n["iteration_counts"];
            if (!ic.IsSequence() || ic.size() == 0) rd.fail(ic, "active.iteration_counts", "expected a non-empty list");
            cfg.active.iteration_counts.clear();
            for (std::size_t i = 0; i < ic.size(); ++i) {
                cfg.active.iteration_counts.push_back(
                    rd.count(ic[i], "active.iteration_counts[" + std::to_string(i) + "]", 1));
            }
        }
        if (n["eval_resamplings"]) cfg.active.eval_resamplings = rd.count(n["eval_resamplings"], "active.eval_resamplings", 1);
        if (n["reps_per_eval"]) cfg.active.reps_per_eval = rd.count(n["reps_per_eval"], "active.reps_per_eval", 1);
        if (n["holdout_fraction"]) cfg.active.holdout_fraction = rd.fraction(n["holdout_fraction"], "active.holdout_fraction", false);
        if (n["bootstrap"]) cfg.active.forest.bootstrap = rd.boolean(n["bootstrap"], "active.bootstrap");
        if (n["plateau_epsilon"]) {
            cfg.active.plateau_epsilon = rd.real(n["plateau_epsilon"], "active.plateau_epsilon");
            if (cfg.active.plateau_epsilon < 0.0) rd.fail(n["plateau_epsilon"], "active.plateau_epsilon", "must be >= 0");
        }
        if (n["budget"]) cfg.active.budget = rd.count(n["budget"], "active.budget", 0);
    }

    if (require_dataset && cfg.dataset.empty()) throw ConfigError(source + ": dataset: missing dataset path");
    cfg.apply_run_settings();
    return cfg;
}

RunConfig parse_config(const std::filesystem::path& path, bool require_dataset) {
    return parse_config_text(read_file(path, "config file"), path.string(), path.parent_path(), require_dataset);
}

void RunConfig::apply_run_settings() {
    sweep.master_seed = poison.master_seed = active.master_seed = seed;
    sweep.workers = poison.workers = active.workers = workers;
}

json RunConfig::canonical() const {
    json specs = json::array();
    for (const auto& s : poison.flip_specs) specs.push_back({{"malicious", s.malicious_ratio}, {"benign", s.benign_ratio}});
    return json{
        {"seed", seed},
        {"schema",
         {{"label_column", schema.label_column},
          {"benign_values", schema.benign_values},
          {"malicious_values", schema.malicious_values},
          {"ignore_columns", schema.ignore_columns}}},
        {"sweep",
         {{"fractions", sweep.fractions},
          {"trials", sweep.trials},
          {"holdout_fraction", sweep.holdout_fraction},
          {"forest", forest_json(sweep.forest)}}},
        {"poison",
         {{"subset_fractions", poison.subset_fractions},
          {"flip_specs", specs},
          {"trials", poison.trials},
          {"holdout_fraction", poison.holdout_fraction},
          {"forest", forest_json(poison.forest)}}},
        {"active",
         {{"iteration_counts", active.iteration_counts},
          {"eval_resamplings", active.eval_resamplings},
          {"reps_per_eval", active.reps_per_eval},
          {"holdout_fraction", active.holdout_fraction},
          {"plateau_epsilon", active.plateau_epsilon},
          {"budget", active.budget},
          {"forest", forest_json(active.forest)}}},
    };
}

std::string RunConfig::hash() const { return hex64(fnv1a64(canonical().dump())); }

std::optional<std::string> process_env(const char* name) {
    if (const char* v = std::getenv(name); v != nullptr && *v != '\0') return std::string(v);
    return std::nullopt;
}

void apply_environment(RunConfig& cfg, const EnvLookup& env) {
    if (auto v = env("LABELSIM_DATASET")) cfg.dataset = *v;
    if (auto v = env("LABELSIM_OUT")) cfg.output_dir = *v;
}

}  // namespace labelsim
