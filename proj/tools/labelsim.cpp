// labelsim: command-line front end for the labelling-cost experiments.
//
//   labelsim sweep  --config run.yaml [--seed N] [--workers N] [--out DIR]
//   labelsim poison --config run.yaml ...
//   labelsim active --config run.yaml ...
//   labelsim bench  --config run.yaml ...
//   labelsim synth  --out data.csv [--per-class N] [--features N] [--informative N] [--separation X] [--seed N]

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "labelsim/csv.hpp"
#include "labelsim/runner.hpp"
#include "labelsim/synthetic.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Simulate the cost of labelling for ML-based threat detection"};
    app.require_subcommand(1);

    labelsim::CliOptions options;
    std::uint64_t seed = 0;
    std::size_t workers = 0;
    std::string out_dir;

    const char* descriptions[][2] = {
        {"sweep", "training-size sweep (learning curve over balanced subsets)"},
        {"poison", "label-flip grid over subset sizes and per-class flip ratios"},
        {"active", "uncertainty-sampling campaigns over iteration schedules"},
        {"bench", "run all three experiments and record wall-clock per section"},
    };
    for (const auto& [name, desc] : descriptions) {
        auto* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", options.config, "YAML run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "master seed (overrides the config)");
        sub->add_option("--workers", workers, "worker threads, 0 = all cores (overrides the config)");
        sub->add_option("--out", out_dir, "output root directory (overrides the config)");
    }

    labelsim::SyntheticSpec synth;
    std::string synth_out;
    std::uint64_t synth_seed = 0;
    auto* synth_cmd = app.add_subcommand("synth", "write a synthetic balanced dataset as CSV");
    synth_cmd->add_option("--out", synth_out, "output CSV path")->required();
    synth_cmd->add_option("--per-class", synth.per_class, "samples per class");
    synth_cmd->add_option("--features", synth.n_features, "feature count");
    synth_cmd->add_option("--informative", synth.informative, "informative feature count");
    synth_cmd->add_option("--separation", synth.separation, "class mean separation in std units");
    synth_cmd->add_option("--seed", synth_seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : labelsim::kExitConfig;
    }

    if (synth_cmd->parsed()) {
        std::ofstream out(synth_out, std::ios::binary);
        if (!out) {
            const nlohmann::json err{{"error", {{"code", 4}, {"kind", "runtime"}, {"message", "cannot write " + synth_out}}}};
            std::cerr << err.dump() << "\n";
            return labelsim::kExitRuntime;
        }
        labelsim::write_csv(labelsim::make_synthetic(synth, labelsim::derive_seed(synth_seed, {})), out);
        return labelsim::kExitOk;
    }

    const auto* cmd = app.get_subcommands().front();
    if (cmd->count("--seed")) options.seed = seed;
    if (cmd->count("--workers")) options.workers = workers;
    if (cmd->count("--out")) options.out = out_dir;
    return labelsim::run_command(cmd->get_name(), options, std::cout, std::cerr);
}
