// Degenerate inputs: each case must end in the documented error or result.

#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "labelsim/active.hpp"
#include "labelsim/csv.hpp"
#include "labelsim/errors.hpp"
#include "labelsim/experiments.hpp"
#include "labelsim/sampling.hpp"
#include "labelsim/synthetic.hpp"
#include "oracles.hpp"

using namespace labelsim;

namespace {

Dataset one_class(std::size_t n) {
    Dataset ds({"a", "b"});
    for (std::size_t i = 0; i < n; ++i) ds.add({i, {double(i), double(i % 3)}, Label::malicious});
    return ds;
}

ForestConfig tiny() {
    ForestConfig f;
    f.n_trees = 3;
    return f;
}

}  // namespace

TEST_CASE("empty dataset") {
    std::istringstream in("a,label\n");
    const auto ds = load_csv(in);
    CHECK(ds.empty());
    CHECK_THROWS_AS(split_holdout(ds, 0.2, derive_seed(0, {})), DataError);
    CHECK_THROWS_AS(train_forest(ds, tiny()), DataError);
    CHECK_THROWS_AS(train_tree(ds, tiny(), derive_seed(0, {})), DataError);
    CHECK(sample_balanced_subset(ds, 0.5, derive_seed(0, {})).empty());

    SweepConfig s;
    s.trials = 1;
    s.fractions = {1.0};
    CHECK_THROWS_AS(run_size_sweep(s, ds), DataError);
    PoisonConfig p;
    p.trials = 1;
    CHECK_THROWS_AS(run_poison_grid(p, ds), DataError);
    ALConfig a;
    a.eval_resamplings = a.reps_per_eval = 1;
    CHECK_THROWS_AS(run_al_schedules(a, ds), DataError);

    const auto [flipped, audit] = flip_labels(ds, {0.5, 0.5}, derive_seed(0, {}));
    CHECK(flipped.empty());
    CHECK(audit.flipped_ids.empty());
    CHECK(audit.flipped_fraction(0) == 0.0);
}

TEST_CASE("single-class dataset") {
    const auto ds = one_class(30);
    CHECK_THROWS_AS(split_holdout(ds, 0.2, derive_seed(0, {})), DataError);
    CHECK_THROWS_AS(sample_balanced_subset(ds, 0.5, derive_seed(0, {})), DataError);

    // A tree on one class is a single leaf voting for it.
    const auto tree = train_tree(ds, tiny(), derive_seed(0, {}));
    CHECK(tree.nodes().size() == 1);
    CHECK(tree.vote(std::vector<double>{0.0, 0.0}) == Label::malicious);

    // Scoring a one-class evaluation set flags the undefined ratios.
    const std::vector<Label> truth(10, Label::benign), preds(10, Label::benign);
    const auto m = compute_metrics(confusion(preds, truth));
    CHECK(m.accuracy == 1.0);
    CHECK(m.precision_undefined);
    CHECK(m.recall_undefined);
    CHECK(m.f1 == 0.0);
    CHECK(m.degenerate());

    SweepConfig s;
    s.trials = 1;
    s.fractions = {0.5};
    CHECK_THROWS_AS(run_size_sweep(s, ds), DataError);

    // Initial AL batch falls back to whatever class is available.
    const auto b = draw_initial_batch(ds, 6, derive_seed(1, {}));
    CHECK(b.size() == 6);
}

TEST_CASE("identical features with conflicting labels") {
    const auto ds = oracle::make_set({{1, 2}, {1, 2}, {1, 2}, {1, 2}}, {0, 1, 0, 1});
    const std::size_t f[] = {0, 1};
    const std::size_t rows[] = {0, 1, 2, 3};
    CHECK_FALSE(best_split(TrainingMatrix(ds), rows, f));
    const auto tree = train_tree(ds, tiny(), derive_seed(0, {}));
    CHECK(tree.nodes().size() == 1);
    CHECK(tree.vote(std::vector<double>{1, 2}) == Label::benign);  // 2 v 2 tie

    ForestConfig cfg = tiny();
    cfg.n_trees = 10;
    const auto forest = train_forest(ds, cfg);
    const double p = forest.predict_proba(std::vector<double>{1, 2});
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
}

TEST_CASE("zero-size batches") {
    const std::vector<SampleId> ranking{4, 5, 6};
    CHECK(select_batch(ranking, 0).empty());
    CHECK(select_batch(std::vector<SampleId>{}, 0).empty());

    const auto ds = make_synthetic({10, 2, 1, 1.0}, derive_seed(1, {}));
    const auto split = split_holdout(ds, 0.2, derive_seed(1, {}));
    auto pools = PoolState::start(split.train, split.eval);
    pools.label({});
    CHECK(pools.labeled.empty());
    CHECK(pools.unlabeled.size() == split.train.size());

    // A no-op iteration keeps the labelled count and still records a model.
    const CampaignSchedule with_gap{8, 3, {4, 0, 4}};
    const auto trace = run_campaign(PoolState::start(split.train, split.eval), with_gap, tiny(), derive_seed(2, {}));
    REQUIRE(trace.iterations.size() == 3);
    CHECK(trace.iterations[1].selected_ids.empty());
    CHECK(trace.iterations[1].cumulative_labeled == 4);
    CHECK(trace.iterations[2].cumulative_labeled == 8);

    CHECK(draw_initial_batch(split.train, 0, derive_seed(0, {})).empty());
    CHECK_THROWS_AS(CampaignSchedule::even(0, 1).validate(), ConfigError);
}

TEST_CASE("fraction boundaries") {
    const auto train = make_synthetic({50, 2, 1, 1.0}, derive_seed(1, {}));
    const auto seed = derive_seed(0, {});
    const double nan = std::numeric_limits<double>::quiet_NaN();

    CHECK(sample_balanced_subset(train, 1.0, seed).size() == 100);
    CHECK_THROWS_AS(sample_balanced_subset(train, 0.0, seed), ConfigError);
    CHECK_THROWS_AS(sample_balanced_subset(train, -0.1, seed), ConfigError);
    CHECK_THROWS_AS(sample_balanced_subset(train, 1.0000001, seed), ConfigError);
    CHECK_THROWS_AS(sample_balanced_subset(train, nan, seed), ConfigError);
    CHECK(sample_balanced_subset(train, 1e-9, seed).empty());
    CHECK(sample_balanced_subset(train, 0.02, seed).size() == 2);

    CHECK_THROWS_AS(split_holdout(train, 0.0, seed), ConfigError);
    CHECK_THROWS_AS(split_holdout(train, 1.0, seed), ConfigError);
    CHECK_THROWS_AS(split_holdout(train, nan, seed), ConfigError);
    CHECK_THROWS_AS(split_holdout(train, 0.001, seed), DataError);  // rounds to 0 per class
    CHECK_THROWS_AS(split_holdout(train, 0.999, seed), DataError);  // leaves nothing to train on
    CHECK(split_holdout(train, 0.01, seed).eval.size() == 2);

    const auto [all, audit] = flip_labels(train, {1.0, 1.0}, seed);
    for (std::size_t i = 0; i < train.size(); ++i) CHECK(all[i].label == opposite(train[i].label));
    CHECK(audit.flipped_ids.size() == train.size());

    SweepConfig s;
    s.trials = 1;
    s.forest = tiny();
    s.fractions = {1e-6};
    CHECK_THROWS_AS(run_size_sweep(s, train), DataError);
    s.fractions = {1.0};
    CHECK(run_size_sweep(s, train).records.size() == 1);
}
