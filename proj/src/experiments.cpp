#include "labelsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "labelsim/errors.hpp"
#include "labelsim/parallel.hpp"

namespace labelsim {

namespace {

// Seed stream tags. Sweep and poison share kSplit/kSubsample/kForest so the
// clean poison cells reproduce the sweep exactly at the same fraction.
enum Stream : std::uint64_t {
    kSplit = 1,
    kSubsample = 2,
    kForest = 3,
    kFlip = 4,
    kActiveSplit = 5,
    kCampaign = 6,
};

// Fractions enter seed streams in basis points so that 0.12 from a config
// file and 12/100 from percent_fractions() name the same stream.
std::uint64_t fraction_key(double f) { return static_cast<std::uint64_t>(std::llround(f * 10000.0)); }

void check_fractions(const std::vector<double>& fractions, const char* what) {
    if (fractions.empty()) throw ConfigError(std::string(what) + " must not be empty");
    for (double f : fractions) {
        if (!std::isfinite(f) || f <= 0.0 || f > 1.0) {
            throw ConfigError(std::string(what) + " entries must be in (0, 1], got " + std::to_string(f));
        }
    }
}

void check_holdout(double h) {
    if (!std::isfinite(h) || h <= 0.0 || h >= 1.0) {
        throw ConfigError("holdout_fraction must be in (0, 1), got " + std::to_string(h));
    }
}

void check_subsample_size(const Dataset& train, double fraction) {
    const auto per_class = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(train.size()) / 2.0 + 1e-9));
    if (per_class == 0) {
        throw DataError("insufficient data: a fraction of " + std::to_string(fraction) + " of " +
                        std::to_string(train.size()) + " training samples leaves no sample per class");
    }
    for (Label l : kLabels) {
        if (train.class_counts()[l] < per_class) {
            throw DataError("insufficient data: fraction " + std::to_string(fraction) + " needs " +
                            std::to_string(per_class) + " samples of class " + std::to_string(index_of(l)) +
                            ", training pool has " + std::to_string(train.class_counts()[l]));
        }
    }
}

ForestConfig trial_forest(const ForestConfig& base, const Seed& seed, std::size_t experiment_workers) {
    ForestConfig f = base;
    f.seed = seed;
    // One level of parallelism: trials when the experiment has a pool, trees otherwise.
    if (experiment_workers > 1) f.workers = 1;
    return f;
}

std::vector<MetricsRecord> metrics_of(std::span<const TrialRecord> records) {
    std::vector<MetricsRecord> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.metrics);
    return out;
}

std::vector<double> f1_of(std::span<const TrialRecord> records) {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.metrics.f1);
    return out;
}

std::size_t resolve_workers(std::size_t w) { return w == 0 ? default_workers() : w; }

}  // namespace

std::vector<double> percent_fractions() {
    std::vector<double> out;
    out.reserve(100);
    for (int i = 1; i <= 100; ++i) out.push_back(i / 100.0);
    return out;
}

// ---------------------------------------------------------------------------
// Sweep

void SweepConfig::validate() const {
    check_fractions(fractions, "sweep fractions");
    if (trials < 1) throw ConfigError("sweep trials must be >= 1");
    check_holdout(holdout_fraction);
}

SweepResult run_size_sweep(const SweepConfig& cfg, const Dataset& ds) {
    cfg.validate();
    const auto split = split_holdout(ds, cfg.holdout_fraction, derive_seed(cfg.master_seed, {kSplit}));
    for (double f : cfg.fractions) check_subsample_size(split.train, f);

    const std::size_t workers = resolve_workers(cfg.workers);
    SweepResult result;
    result.train_size = split.train.size();
    result.eval_size = split.eval.size();
    result.records.resize(cfg.fractions.size() * cfg.trials);
    parallel_for(result.records.size(), workers, [&](std::size_t u) {
        const double f = cfg.fractions[u / cfg.trials];
        const std::size_t trial = u % cfg.trials;
        const auto key = fraction_key(f);
        const auto sub_seed = derive_seed(cfg.master_seed, {kSubsample, trial, key});
        const auto subset = sample_balanced_subset(split.train, f, sub_seed);
        const auto model =
            train_forest(subset, trial_forest(cfg.forest, derive_seed(cfg.master_seed, {kForest, trial, key}), workers));
        result.records[u] = TrialRecord{"sweep", f, 0.0, 0.0, 0, trial, evaluate(model, split.eval), sub_seed.value()};
    });

    for (std::size_t fi = 0; fi < cfg.fractions.size(); ++fi) {
        std::span<const TrialRecord> group(result.records.data() + fi * cfg.trials, cfg.trials);
        const auto ms = metrics_of(group);
        result.average.push_back({cfg.fractions[fi], aggregate(ms)});
        result.single_trial.push_back(group.front());
    }
    return result;
}

// ---------------------------------------------------------------------------
// Poison grid

void PoisonConfig::validate() const {
    check_fractions(subset_fractions, "poison subset_fractions");
    if (flip_specs.empty()) throw ConfigError("poison flip_specs must not be empty");
    for (const auto& s : flip_specs) s.validate();
    if (trials < 1) throw ConfigError("poison trials must be >= 1");
    check_holdout(holdout_fraction);
}

const PoisonCell& PoisonResult::cell(double subset_fraction, const FlipSpec& spec) const {
    for (const auto& c : cells) {
        if (fraction_key(c.subset_fraction) == fraction_key(subset_fraction) && c.spec == spec) return c;
    }
    throw ConfigError("no poison cell for the requested subset / flip spec");
}

const PairwiseTest& PoisonResult::test(double subset_fraction, const FlipSpec& a, const FlipSpec& b) const {
    const auto key = fraction_key(subset_fraction);
    for (const auto& t : tests) {
        if (fraction_key(t.subset_a) != key || fraction_key(t.subset_b) != key) continue;
        if ((t.spec_a == a && t.spec_b == b) || (t.spec_a == b && t.spec_b == a)) return t;
    }
    throw ConfigError("no t-test for the requested pair");
}

PoisonResult run_poison_grid(const PoisonConfig& cfg, const Dataset& ds) {
    cfg.validate();
    const auto split = split_holdout(ds, cfg.holdout_fraction, derive_seed(cfg.master_seed, {kSplit}));
    for (double f : cfg.subset_fractions) check_subsample_size(split.train, f);

    const std::size_t n_specs = cfg.flip_specs.size();
    const std::size_t workers = resolve_workers(cfg.workers);
    PoisonResult result;
    result.records.resize(cfg.subset_fractions.size() * n_specs * cfg.trials);
    std::vector<double> flipped_fraction(result.records.size());
    parallel_for(result.records.size(), workers, [&](std::size_t u) {
        const double f = cfg.subset_fractions[u / (n_specs * cfg.trials)];
        const auto& spec = cfg.flip_specs[(u / cfg.trials) % n_specs];
        const std::size_t trial = u % cfg.trials;
        const auto key = fraction_key(f);
        const auto sub_seed = derive_seed(cfg.master_seed, {kSubsample, trial, key});
        const auto subset = sample_balanced_subset(split.train, f, sub_seed);
        // Flip draws do not depend on the spec, so within a trial larger
        // ratios flip a superset of the samples smaller ratios flip.
        auto [poisoned, audit] = flip_labels(subset, spec, derive_seed(cfg.master_seed, {kFlip, trial, key}));
        flipped_fraction[u] = audit.flipped_fraction(subset.size());
        const auto model = train_forest(
            poisoned, trial_forest(cfg.forest, derive_seed(cfg.master_seed, {kForest, trial, key}), workers));
        result.records[u] = TrialRecord{"poison", f, spec.malicious_ratio, spec.benign_ratio, 0, trial,
                                        evaluate(model, split.eval), sub_seed.value()};
    });

    auto group = [&](std::size_t fi, std::size_t si) {
        return std::span<const TrialRecord>(result.records.data() + (fi * n_specs + si) * cfg.trials, cfg.trials);
    };
    for (std::size_t fi = 0; fi < cfg.subset_fractions.size(); ++fi) {
        for (std::size_t si = 0; si < n_specs; ++si) {
            const auto base = (fi * n_specs + si) * cfg.trials;
            double flipped = 0.0;
            for (std::size_t t = 0; t < cfg.trials; ++t) flipped += flipped_fraction[base + t];
            result.cells.push_back(PoisonCell{cfg.subset_fractions[fi], cfg.flip_specs[si],
                                              flipped / static_cast<double>(cfg.trials),
                                              aggregate(metrics_of(group(fi, si)))});
        }
    }

    if (cfg.trials >= 2) {
        for (std::size_t fi = 0; fi < cfg.subset_fractions.size(); ++fi) {
            for (std::size_t a = 0; a < n_specs; ++a) {
                for (std::size_t b = a + 1; b < n_specs; ++b) {
                    result.tests.push_back({cfg.subset_fractions[fi], cfg.flip_specs[a], cfg.subset_fractions[fi],
                                            cfg.flip_specs[b], welch_t_test(f1_of(group(fi, a)), f1_of(group(fi, b)))});
                }
            }
        }
        for (std::size_t si = 0; si < n_specs; ++si) {
            for (std::size_t a = 0; a < cfg.subset_fractions.size(); ++a) {
                for (std::size_t b = a + 1; b < cfg.subset_fractions.size(); ++b) {
                    result.tests.push_back({cfg.subset_fractions[a], cfg.flip_specs[si], cfg.subset_fractions[b],
                                            cfg.flip_specs[si], welch_t_test(f1_of(group(a, si)), f1_of(group(b, si)))});
                }
            }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Active learning

PlateauEntry detect_plateau(std::span<const BudgetPoint> curve, double epsilon) {
    if (curve.size() < 2) throw DataError("plateau detection needs at least 2 curve points");
    for (std::size_t i = 1; i < curve.size(); ++i) {
        if (!(curve[i].budget > curve[i - 1].budget)) throw DataError("plateau curve budgets must be strictly increasing");
    }
    // best_after[i] = max metric strictly after i
    std::vector<double> best_after(curve.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = curve.size() - 1; i > 0; --i) best_after[i - 1] = std::max(best_after[i], curve[i].metric);
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (i + 1 == curve.size() || best_after[i] - curve[i].metric <= epsilon) {
            return PlateauEntry{0, curve[i].budget, epsilon};
        }
    }
    return PlateauEntry{0, curve.back().budget, epsilon};
}

void ALConfig::validate() const {
    if (iteration_counts.empty()) throw ConfigError("active iteration_counts must not be empty");
    for (auto n : iteration_counts) {
        if (n < 1) throw ConfigError("active iteration_counts entries must be >= 1");
    }
    if (eval_resamplings < 1 || reps_per_eval < 1) throw ConfigError("active eval_resamplings and reps_per_eval must be >= 1");
    check_holdout(holdout_fraction);
    if (!std::isfinite(plateau_epsilon) || plateau_epsilon < 0.0) throw ConfigError("plateau_epsilon must be >= 0");
}

double ScheduleCurve::accuracy_at(double budget) const {
    for (const auto& p : curve) {
        if (p.x == budget) return p.stats.accuracy.mean;
    }
    throw ConfigError("schedule with " + std::to_string(iterations) + " iterations has no point at budget " +
                      std::to_string(budget));
}

const ScheduleCurve& ALResult::schedule(std::size_t iterations) const {
    for (const auto& s : schedules) {
        if (s.iterations == iterations) return s;
    }
    throw ConfigError("no schedule with " + std::to_string(iterations) + " iterations");
}

ALResult run_al_schedules(const ALConfig& cfg, const Dataset& ds) {
    cfg.validate();
    std::vector<SplitResult> splits;
    splits.reserve(cfg.eval_resamplings);
    for (std::size_t r = 0; r < cfg.eval_resamplings; ++r) {
        splits.push_back(split_holdout(ds, cfg.holdout_fraction, derive_seed(cfg.master_seed, {kActiveSplit, r})));
    }
    const std::size_t pool_size = splits.front().train.size();
    const std::size_t budget = cfg.budget == 0 ? pool_size : cfg.budget;
    if (budget > pool_size) {
        throw DataError("insufficient data: budget " + std::to_string(budget) + " exceeds training pool of " +
                        std::to_string(pool_size));
    }
    std::vector<CampaignSchedule> schedules;
    for (auto n : cfg.iteration_counts) schedules.push_back(CampaignSchedule::even(budget, n));

    const std::size_t trials = cfg.total_trials();
    const std::size_t workers = resolve_workers(cfg.workers);
    std::vector<CampaignTrace> traces(schedules.size() * trials);
    parallel_for(traces.size(), workers, [&](std::size_t u) {
        const auto& schedule = schedules[u / trials];
        const std::size_t trial = u % trials;
        const std::size_t r = trial / cfg.reps_per_eval;
        const std::size_t rep = trial % cfg.reps_per_eval;
        ForestConfig fcfg = cfg.forest;
        if (workers > 1) fcfg.workers = 1;
        traces[u] = run_campaign(PoolState::start(splits[r].train, splits[r].eval), schedule, fcfg,
                                 derive_seed(cfg.master_seed, {kCampaign, r, rep}));
    });

    ALResult result;
    result.trace_count = traces.size();
    for (std::size_t s = 0; s < schedules.size(); ++s) {
        const auto name = "active-" + std::to_string(schedules[s].iterations);
        std::map<std::size_t, std::vector<MetricsRecord>> by_budget;
        for (std::size_t trial = 0; trial < trials; ++trial) {
            const std::size_t r = trial / cfg.reps_per_eval;
            const std::size_t rep = trial % cfg.reps_per_eval;
            const auto seed = derive_seed(cfg.master_seed, {kCampaign, r, rep}).value();
            for (const auto& it : traces[s * trials + trial].iterations) {
                result.records.push_back(TrialRecord{name, static_cast<double>(it.cumulative_labeled), 0.0, 0.0,
                                                     it.iteration, trial, it.metrics, seed});
                by_budget[it.cumulative_labeled].push_back(it.metrics);
            }
        }
        ScheduleCurve curve;
        curve.iterations = schedules[s].iterations;
        std::vector<BudgetPoint> points;
        for (const auto& [b, ms] : by_budget) {
            curve.curve.push_back({static_cast<double>(b), aggregate(ms)});
            points.push_back({static_cast<double>(b), curve.curve.back().stats.accuracy.mean});
        }
        curve.plateau = points.size() >= 2 ? detect_plateau(points, cfg.plateau_epsilon)
                                           : PlateauEntry{0, points.front().budget, cfg.plateau_epsilon};
        curve.plateau.iterations = curve.iterations;
        result.schedules.push_back(std::move(curve));
    }
    return result;
}

}  // namespace labelsim
