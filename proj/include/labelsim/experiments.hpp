#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "labelsim/active.hpp"
#include "labelsim/dataset.hpp"
#include "labelsim/forest.hpp"
#include "labelsim/metrics.hpp"
#include "labelsim/sampling.hpp"

namespace labelsim {

/// One trained-and-evaluated model.
///
/// `experiment` is "sweep", "poison", or "active-<iterations>";
/// `fraction_or_budget` is the subset fraction of T for sweep/poison and the
/// cumulative labelled count for active learning.
struct TrialRecord {
    std::string experiment;
    double fraction_or_budget = 0.0;
    double flip_mal = 0.0;
    double flip_ben = 0.0;
    std::size_t iteration = 0;
    std::size_t trial = 0;
    MetricsRecord metrics;
    std::uint64_t seed = 0;
};

struct CurvePoint {
    double x = 0.0;
    AggregateStats stats;
};

/// 0.01, 0.02, ..., 1.00
std::vector<double> percent_fractions();

// ---------------------------------------------------------------------------
// Training-size sweep

struct SweepConfig {
    std::vector<double> fractions = percent_fractions();
    std::size_t trials = 30;
    double holdout_fraction = 0.2;
    ForestConfig forest;  // bootstrap on
    std::uint64_t master_seed = 0;
    std::size_t workers = 1;

    void validate() const;
};

struct SweepResult {
    std::vector<TrialRecord> records;     // fraction-major, then trial
    std::vector<CurvePoint> average;      // one point per fraction
    std::vector<TrialRecord> single_trial;  // trial 0 at every fraction
    std::size_t train_size = 0;
    std::size_t eval_size = 0;
};

SweepResult run_size_sweep(const SweepConfig& cfg, const Dataset& ds);

// ---------------------------------------------------------------------------
// Mislabelling grid

struct PoisonConfig {
    std::vector<double> subset_fractions{0.5, 0.8, 1.0};
    std::vector<FlipSpec> flip_specs = reference_flip_specs();
    std::size_t trials = 30;
    double holdout_fraction = 0.2;
    ForestConfig forest;
    std::uint64_t master_seed = 0;
    std::size_t workers = 1;

    void validate() const;
};

struct PoisonCell {
    double subset_fraction = 0.0;
    FlipSpec spec;
    double mean_flipped_fraction = 0.0;  // flipped samples / training samples
    AggregateStats stats;
};

/// F1 comparison between two grid cells.
struct PairwiseTest {
    double subset_a = 0.0;
    FlipSpec spec_a;
    double subset_b = 0.0;
    FlipSpec spec_b;
    TTestResult f1;
};

struct PoisonResult {
    std::vector<TrialRecord> records;
    std::vector<PoisonCell> cells;  // subset-major, specs in config order
    /// Every pair of specs within a subset fraction, then every pair of
    /// subset fractions for the same spec.
    std::vector<PairwiseTest> tests;

    const PoisonCell& cell(double subset_fraction, const FlipSpec& spec) const;
    const PairwiseTest& test(double subset_fraction, const FlipSpec& a, const FlipSpec& b) const;
};

PoisonResult run_poison_grid(const PoisonConfig& cfg, const Dataset& ds);

// ---------------------------------------------------------------------------
// Active-learning schedules

struct PlateauEntry {
    std::size_t iterations = 0;
    double saturation_budget = 0.0;
    double epsilon = 0.0;
};

struct BudgetPoint {
    double budget = 0.0;
    double metric = 0.0;
};

/// Smallest budget b* whose metric is within epsilon of everything after it:
/// max(metric beyond b*) - metric(b*) <= epsilon. The last budget always
/// qualifies. Throws DataError for fewer than 2 points or unsorted budgets.
PlateauEntry detect_plateau(std::span<const BudgetPoint> curve, double epsilon);

struct ALConfig {
    std::vector<std::size_t> iteration_counts{2, 4, 16, 32, 64};
    std::size_t eval_resamplings = 10;
    std::size_t reps_per_eval = 10;
    double holdout_fraction = 0.2;
    ForestConfig forest = [] {
        ForestConfig f;
        f.bootstrap = false;
        return f;
    }();
    std::uint64_t master_seed = 0;
    std::size_t workers = 1;
    double plateau_epsilon = 0.002;
    /// Labelling budget; 0 means the whole training pool.
    std::size_t budget = 0;

    void validate() const;
    std::size_t total_trials() const noexcept { return eval_resamplings * reps_per_eval; }
};

struct ScheduleCurve {
    std::size_t iterations = 0;
    std::vector<CurvePoint> curve;  // x = cumulative labelled count
    PlateauEntry plateau;           // on mean accuracy

    /// Mean accuracy at an exact cumulative budget; throws if absent.
    double accuracy_at(double budget) const;
};

struct ALResult {
    std::vector<TrialRecord> records;
    std::vector<ScheduleCurve> schedules;  // config order
    std::size_t trace_count = 0;

    const ScheduleCurve& schedule(std::size_t iterations) const;
};

ALResult run_al_schedules(const ALConfig& cfg, const Dataset& ds);

}  // namespace labelsim
