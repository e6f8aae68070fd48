#include "labelsim/active.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "labelsim/errors.hpp"

namespace labelsim {

namespace {

constexpr std::uint64_t kInitialBatchStream = 0xA1;
constexpr std::uint64_t kModelStream = 0xA2;

void check_disjoint_ids(const Dataset& a, const Dataset& b, const char* what) {
    for (const auto& s : a.samples()) {
        if (b.contains(s.id)) throw DataError(std::string(what) + " share sample id " + std::to_string(s.id));
    }
}

Dataset sorted_by_id(std::vector<Sample> samples, const Dataset& like) {
    std::sort(samples.begin(), samples.end(), [](const Sample& x, const Sample& y) { return x.id < y.id; });
    Dataset out = like.empty_like();
    for (auto& s : samples) out.add(std::move(s));
    return out;
}

}  // namespace

PoolState PoolState::start(const Dataset& training_pool, const Dataset& eval) {
    if (training_pool.n_features() != eval.n_features()) {
        throw DataError("training pool and evaluation set have different feature counts");
    }
    PoolState p{training_pool.empty_like(), training_pool, eval};
    p.check_disjoint();
    return p;
}

void PoolState::check_disjoint() const {
    check_disjoint_ids(labeled, unlabeled, "labeled and unlabeled pools");
    check_disjoint_ids(eval, labeled, "evaluation and labeled pools");
    check_disjoint_ids(eval, unlabeled, "evaluation and unlabeled pools");
}

void PoolState::label(std::span<const SampleId> ids) {
    std::vector<SampleId> wanted(ids.begin(), ids.end());
    std::sort(wanted.begin(), wanted.end());
    if (std::adjacent_find(wanted.begin(), wanted.end()) != wanted.end()) {
        throw DataError("batch selects the same sample twice");
    }
    std::vector<Sample> keep, move = labeled.samples();
    keep.reserve(unlabeled.size());
    std::size_t found = 0;
    for (const auto& s : unlabeled.samples()) {
        if (std::binary_search(wanted.begin(), wanted.end(), s.id)) {
            // The simulated annotator always assigns the ground truth, which U still carries.
            move.push_back(s);
            ++found;
        } else {
            keep.push_back(s);
        }
    }
    if (found != wanted.size()) throw DataError("batch selects ids that are not in the unlabeled pool");
    labeled = sorted_by_id(std::move(move), labeled);
    unlabeled = sorted_by_id(std::move(keep), unlabeled);
}

CampaignSchedule CampaignSchedule::even(std::size_t total_budget, std::size_t iterations) {
    if (iterations == 0) throw ConfigError("a campaign needs at least one iteration");
    if (total_budget < iterations) {
        throw ConfigError("budget " + std::to_string(total_budget) + " cannot be split into " +
                          std::to_string(iterations) + " non-empty batches");
    }
    CampaignSchedule s{total_budget, iterations, std::vector<std::size_t>(iterations, total_budget / iterations)};
    s.batch_sizes.back() += total_budget % iterations;
    return s;
}

void CampaignSchedule::validate() const {
    if (iterations == 0) throw ConfigError("a campaign needs at least one iteration");
    if (batch_sizes.size() != iterations) {
        throw ConfigError("schedule lists " + std::to_string(batch_sizes.size()) + " batches for " +
                          std::to_string(iterations) + " iterations");
    }
    if (batch_sizes.front() == 0) throw ConfigError("the initial random batch must be non-empty");
    const auto sum = std::accumulate(batch_sizes.begin(), batch_sizes.end(), std::size_t{0});
    if (sum != total_budget) {
        throw ConfigError("batch sizes sum to " + std::to_string(sum) + ", budget is " + std::to_string(total_budget));
    }
}

double uncertainty(double p_malicious) {
    if (std::isnan(p_malicious) || p_malicious < 0.0 || p_malicious > 1.0) {
        throw ConfigError("probability out of [0, 1]: " + std::to_string(p_malicious));
    }
    return std::fabs(p_malicious - 0.5);
}

std::vector<SampleId> rank_unlabeled(const Forest& model, const PoolState& pool) {
    if (pool.unlabeled.empty()) throw DataError("cannot rank an empty unlabeled pool");
    const auto n_trees = static_cast<long long>(model.trees().size());
    std::vector<std::pair<long long, SampleId>> scored;
    scored.reserve(pool.unlabeled.size());
    for (const auto& s : pool.unlabeled.samples()) {
        const auto votes = static_cast<long long>(model.malicious_votes(s.features));
        // |2v - n| = 2n * |v/n - 0.5|: same order as uncertainty(), without rounding.
        scored.emplace_back(std::llabs(2 * votes - n_trees), s.id);
    }
    std::sort(scored.begin(), scored.end());
    std::vector<SampleId> out;
    out.reserve(scored.size());
    for (const auto& [score, id] : scored) out.push_back(id);
    return out;
}

std::vector<SampleId> select_batch(std::span<const SampleId> ranking, std::size_t k) {
    if (k > ranking.size()) {
        throw ConfigError("batch of " + std::to_string(k) + " exceeds pool of " + std::to_string(ranking.size()));
    }
    return {ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(k)};
}

std::vector<SampleId> draw_initial_batch(const Dataset& unlabeled, std::size_t k, const Seed& seed) {
    if (k > unlabeled.size()) {
        throw ConfigError("initial batch of " + std::to_string(k) + " exceeds pool of " +
                          std::to_string(unlabeled.size()));
    }
    std::vector<char> taken(unlabeled.size(), 0);
    std::vector<SampleId> out;
    out.reserve(k);
    for (Label l : kLabels) {
        const auto positions = unlabeled.positions_of(l);
        const auto want = std::min(k / 2, positions.size());
        Rng rng(seed.child(index_of(l)));
        for (auto p : sample_without_replacement(positions.size(), want, rng)) {
            taken[positions[p]] = 1;
            out.push_back(unlabeled[positions[p]].id);
        }
    }
    if (out.size() < k) {
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < unlabeled.size(); ++i) {
            if (!taken[i]) rest.push_back(i);
        }
        Rng rng(seed.child(2));
        for (auto p : sample_without_replacement(rest.size(), k - out.size(), rng)) {
            out.push_back(unlabeled[rest[p]].id);
        }
    }
    return out;
}

MetricsRecord evaluate(const Forest& model, const Dataset& eval) {
    std::vector<Label> truth;
    truth.reserve(eval.size());
    for (const auto& s : eval.samples()) truth.push_back(s.label);
    return compute_metrics(confusion(model.predict_all(eval), truth));
}

CampaignTrace run_campaign(PoolState pools, const CampaignSchedule& schedule, const ForestConfig& cfg,
                           const Seed& seed, const CampaignObserver& observer) {
    schedule.validate();
    if (!pools.labeled.empty()) throw ConfigError("a campaign must start with an empty labeled pool");
    if (schedule.total_budget > pools.unlabeled.size()) {
        throw ConfigError("budget " + std::to_string(schedule.total_budget) + " exceeds pool of " +
                          std::to_string(pools.unlabeled.size()));
    }
    pools.check_disjoint();

    CampaignTrace trace;
    trace.iterations.reserve(schedule.iterations);
    std::optional<Forest> model;
    for (std::size_t it = 0; it < schedule.iterations; ++it) {
        const auto k = schedule.batch_sizes[it];
        std::vector<SampleId> batch;
        if (it == 0) {
            batch = draw_initial_batch(pools.unlabeled, k, seed.child(kInitialBatchStream));
        } else if (k > 0) {
            batch = select_batch(rank_unlabeled(*model, pools), k);
        }
        pools.label(batch);

        ForestConfig iteration_cfg = cfg;
        iteration_cfg.seed = seed.child(kModelStream).child(it);
        model = train_forest(pools.labeled, iteration_cfg);

        IterationRecord rec{it + 1, pools.labeled.size(), evaluate(*model, pools.eval), std::move(batch)};
        if (observer) observer(pools, rec);
        trace.iterations.push_back(std::move(rec));
    }
    trace.final_labeled_ids = pools.labeled.ids();
    return trace;
}

}  // namespace labelsim
