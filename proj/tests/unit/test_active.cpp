#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "labelsim/active.hpp"
#include "labelsim/errors.hpp"
#include "labelsim/sampling.hpp"
#include "labelsim/synthetic.hpp"
#include "oracles.hpp"

using namespace labelsim;

namespace {

Tree stump(double threshold) {
    std::vector<Tree::Node> nodes(3);
    nodes[0].feature = 0;
    nodes[0].threshold = threshold;
    nodes[0].left = 1;
    nodes[0].right = 2;
    nodes[1].counts[0] = 1;
    nodes[2].counts[1] = 1;
    return Tree(std::move(nodes));
}

// 20 stumps at 0.5, 1.5, ...: a sample with x0 = v gets v malicious votes.
Forest counting_forest() {
    std::vector<Tree> trees;
    for (int j = 0; j < 20; ++j) trees.push_back(stump(j + 0.5));
    return Forest(trees, ForestConfig{}, 1);
}

PoolState pool_of(const std::vector<double>& x0) {
    Dataset u({"x0"});
    for (std::size_t i = 0; i < x0.size(); ++i) u.add({i, {x0[i]}, i % 2 ? Label::malicious : Label::benign});
    Dataset e({"x0"});
    e.add({1000, {0.0}, Label::benign});
    e.add({1001, {20.0}, Label::malicious});
    return PoolState::start(u, e);
}

ForestConfig small_forest() {
    ForestConfig cfg;
    cfg.n_trees = 8;
    cfg.bootstrap = false;
    return cfg;
}

std::set<SampleId> ids_of(const Dataset& ds) {
    const auto v = ds.ids();
    return {v.begin(), v.end()};
}

}  // namespace

TEST_CASE("uncertainty score") {
    CHECK(uncertainty(0.5) == 0.0);
    CHECK(uncertainty(1.0) == 0.5);
    CHECK(uncertainty(0.3) == doctest::Approx(0.2));
    CHECK_THROWS_AS(uncertainty(1.2), ConfigError);
}

TEST_CASE("ranking follows the vote margin") {
    const auto f = counting_forest();
    // p = 0.5, 0.9, 0.45
    const auto pool = pool_of({10, 18, 9});
    CHECK(rank_unlabeled(f, pool) == std::vector<SampleId>{0, 2, 1});

    const auto ties = pool_of({4, 4, 4, 4});
    CHECK(rank_unlabeled(f, ties) == std::vector<SampleId>{0, 1, 2, 3});

    // 0.3 and 0.7 have the same margin; the lower id wins.
    const auto mirrored = pool_of({14, 6});
    CHECK(rank_unlabeled(f, mirrored) == std::vector<SampleId>{0, 1});

    const auto single = pool_of({3});
    CHECK(rank_unlabeled(f, single) == std::vector<SampleId>{0});

    PoolState empty = pool_of({});
    CHECK_THROWS_AS(rank_unlabeled(f, empty), DataError);
}

TEST_CASE("ranking matches score-all-then-sort on small pools") {
    std::mt19937_64 gen(21);
    for (int round = 0; round < 60; ++round) {
        const auto train = oracle::random_instance(gen, 30, 3, 6);
        ForestConfig cfg;
        cfg.n_trees = 1 + round % 12;
        cfg.seed = derive_seed(round, {});
        const auto forest = train_forest(train, cfg);

        const std::size_t n = 1 + round % 20;
        Dataset u({"x0", "x1", "x2"});
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> x(3);
            for (auto& v : x) v = std::uniform_int_distribution<int>(0, 5)(gen);
            u.add({i * 7 + 3, x, Label::benign});
        }
        const auto pool = PoolState::start(u, Dataset({"x0", "x1", "x2"}));

        std::vector<std::pair<std::size_t, SampleId>> scored;
        for (const auto& s : u.samples()) {
            const auto votes = oracle::routed_votes(forest, s.features);
            const auto margin = 2 * votes > cfg.n_trees ? 2 * votes - cfg.n_trees : cfg.n_trees - 2 * votes;
            scored.emplace_back(margin, s.id);
        }
        std::sort(scored.begin(), scored.end());
        std::vector<SampleId> want;
        for (const auto& [m, id] : scored) want.push_back(id);
        CHECK(rank_unlabeled(forest, pool) == want);
    }
}

TEST_CASE("select_batch is a prefix") {
    const std::vector<SampleId> r{7, 2, 9};
    CHECK(select_batch(r, 2) == std::vector<SampleId>{7, 2});
    CHECK(select_batch(r, 0).empty());
    CHECK(select_batch(r, 3) == r);
    CHECK_THROWS_AS(select_batch(r, 4), ConfigError);
    std::vector<SampleId> ten(10);
    for (std::size_t i = 0; i < 10; ++i) ten[i] = 10 - i;
    CHECK(select_batch(ten, 10) == ten);
}

TEST_CASE("even schedules") {
    const auto s = CampaignSchedule::even(8000, 4);
    CHECK(s.batch_sizes == std::vector<std::size_t>{2000, 2000, 2000, 2000});
    CHECK(CampaignSchedule::even(10, 3).batch_sizes == std::vector<std::size_t>{3, 3, 4});
    CHECK(CampaignSchedule::even(8000, 64).batch_sizes.front() == 125);
    CHECK_THROWS_AS(CampaignSchedule::even(10, 0), ConfigError);
    CHECK_THROWS_AS(CampaignSchedule::even(3, 4), ConfigError);

    CampaignSchedule bad{10, 2, {4, 5}};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.batch_sizes = {0, 10};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.batch_sizes = {5, 5, 0};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("initial batch is class balanced") {
    const auto ds = make_synthetic({30, 2, 1, 1.0}, derive_seed(1, {}));
    const auto b = draw_initial_batch(ds, 10, derive_seed(2, {}));
    REQUIRE(b.size() == 10);
    std::size_t mal = 0;
    for (auto id : b) mal += ds[id].label == Label::malicious;
    CHECK(mal == 5);
    CHECK(std::set<SampleId>(b.begin(), b.end()).size() == 10);
    CHECK(draw_initial_batch(ds, 7, derive_seed(2, {})).size() == 7);
    CHECK_THROWS_AS(draw_initial_batch(ds, 61, derive_seed(2, {})), ConfigError);
}

TEST_CASE("pool state moves ids and keeps partitions") {
    const auto ds = make_synthetic({10, 2, 1, 1.0}, derive_seed(1, {}));
    const auto split = split_holdout(ds, 0.2, derive_seed(1, {}));
    auto pools = PoolState::start(split.train, split.eval);
    const auto first = split.train.ids();
    const std::vector<SampleId> batch{first[3], first[0]};
    pools.label(batch);
    CHECK(pools.labeled.ids() == std::vector<SampleId>{first[0], first[3]});
    CHECK(pools.unlabeled.size() == split.train.size() - 2);
    CHECK_NOTHROW(pools.check_disjoint());
    CHECK_THROWS_AS(pools.label(batch), DataError);
    const std::vector<SampleId> twice{first[5], first[5]};
    CHECK_THROWS_AS(pools.label(twice), DataError);
    pools.label({});
    CHECK(pools.labeled.size() == 2);

    CHECK_THROWS_AS(PoolState::start(split.train, split.train), DataError);
}

TEST_CASE("campaign conservation over randomized campaigns") {
    std::mt19937_64 gen(77);
    for (int round = 0; round < 25; ++round) {
        const auto ds = make_synthetic({50, 4, 2, 1.0}, derive_seed(round, {}));
        const auto split = split_holdout(ds, 0.2, derive_seed(round, {1}));
        const auto original = ids_of(split.train);
        const auto train_ids = split.train.ids();
        const auto eval_ids = ids_of(split.eval);

        const std::size_t budget = std::uniform_int_distribution<std::size_t>(4, split.train.size())(gen);
        const std::size_t iters = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(8, budget))(gen);
        const auto schedule = CampaignSchedule::even(budget, iters);

        std::size_t last = 0;
        std::size_t calls = 0;
        auto observer = [&](const PoolState& p, const IterationRecord& rec) {
            ++calls;
            auto l = ids_of(p.labeled), u = ids_of(p.unlabeled);
            REQUIRE(l.size() + u.size() == original.size());
            std::set<SampleId> both = l;
            both.insert(u.begin(), u.end());
            REQUIRE(both == original);
            for (auto id : eval_ids) REQUIRE_FALSE(both.count(id));
            REQUIRE(rec.cumulative_labeled == p.labeled.size());
            REQUIRE(rec.cumulative_labeled > last);
            last = rec.cumulative_labeled;
            for (const auto& s : p.labeled.samples()) {
                const auto pos = std::find(train_ids.begin(), train_ids.end(), s.id);
                REQUIRE(pos != train_ids.end());
                REQUIRE(split.train[static_cast<std::size_t>(pos - train_ids.begin())].label == s.label);
            }
        };
        auto cfg = small_forest();
        const auto trace = run_campaign(PoolState::start(split.train, split.eval), schedule, cfg,
                                        derive_seed(round, {6}), observer);
        CHECK(calls == iters);
        CHECK(trace.iterations.size() == iters);
        CHECK(trace.iterations.back().cumulative_labeled == budget);
        CHECK(trace.final_labeled_ids.size() == budget);
        for (std::size_t i = 0; i < iters; ++i) {
            CHECK(trace.iterations[i].iteration == i + 1);
            CHECK(trace.iterations[i].selected_ids.size() == schedule.batch_sizes[i]);
        }
    }
}

TEST_CASE("terminal labeled set is the whole pool for every schedule") {
    const auto ds = make_synthetic({13, 3, 2, 1.0}, derive_seed(4, {}));
    const auto split = split_holdout(ds, 0.2, derive_seed(4, {1}));
    REQUIRE(split.train.size() == 20);
    const auto cfg = small_forest();
    for (std::size_t iters : {1u, 2u, 4u, 5u, 7u, 20u}) {
        const auto trace = run_campaign(PoolState::start(split.train, split.eval),
                                        CampaignSchedule::even(20, iters), cfg, derive_seed(9, {}));
        CHECK(trace.final_labeled_ids == split.train.ids());
    }
}

TEST_CASE("campaigns are deterministic") {
    const auto ds = make_synthetic({40, 4, 2, 1.0}, derive_seed(5, {}));
    const auto split = split_holdout(ds, 0.25, derive_seed(5, {1}));
    const auto sched = CampaignSchedule::even(40, 4);
    const auto cfg = small_forest();
    const auto a = run_campaign(PoolState::start(split.train, split.eval), sched, cfg, derive_seed(1, {}));
    const auto b = run_campaign(PoolState::start(split.train, split.eval), sched, cfg, derive_seed(1, {}));
    REQUIRE(a.iterations.size() == b.iterations.size());
    for (std::size_t i = 0; i < a.iterations.size(); ++i) {
        CHECK(a.iterations[i].selected_ids == b.iterations[i].selected_ids);
        CHECK(a.iterations[i].metrics == b.iterations[i].metrics);
    }
}

TEST_CASE("campaign preconditions") {
    const auto ds = make_synthetic({10, 2, 1, 1.0}, derive_seed(1, {}));
    const auto split = split_holdout(ds, 0.2, derive_seed(1, {}));
    const auto cfg = small_forest();
    auto pools = PoolState::start(split.train, split.eval);
    CHECK_THROWS_AS(run_campaign(pools, CampaignSchedule::even(17, 1), cfg, derive_seed(0, {})), ConfigError);
    CampaignSchedule mismatch{16, 3, {8, 8}};
    CHECK_THROWS_AS(run_campaign(pools, mismatch, cfg, derive_seed(0, {})), ConfigError);
    pools.label(std::vector<SampleId>{split.train.ids().front()});
    CHECK_THROWS_AS(run_campaign(pools, CampaignSchedule::even(4, 1), cfg, derive_seed(0, {})), ConfigError);
}
