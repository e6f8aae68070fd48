#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "labelsim/dataset.hpp"
#include "labelsim/forest.hpp"
#include "labelsim/metrics.hpp"
#include "labelsim/seed.hpp"

namespace labelsim {

/// The three pools of a pool-based simulation: labelled L, unlabelled U
/// (ground truth kept for the simulated annotator, never used for ranking),
/// and the evaluation holdout E.
struct PoolState {
    Dataset labeled;
    Dataset unlabeled;
    Dataset eval;

    /// Empty L; U = training pool; E = holdout. Throws DataError when the
    /// pools share ids or have different feature layouts.
    static PoolState start(const Dataset& training_pool, const Dataset& eval);

    /// Moves the given ids from U to L with their ground-truth labels.
    void label(std::span<const SampleId> ids);

    /// Checks L and U are disjoint and E is disjoint from both.
    void check_disjoint() const;
};

/// Fixed labelling budget split across iterations. The first batch is the
/// random initialisation batch.
struct CampaignSchedule {
    std::size_t total_budget = 0;
    std::size_t iterations = 0;
    std::vector<std::size_t> batch_sizes;

    /// budget / iterations per batch, remainder added to the last batch.
    static CampaignSchedule even(std::size_t total_budget, std::size_t iterations);

    /// Throws ConfigError unless the batches sum to the budget, the first batch
    /// is non-empty and batch count equals `iterations`.
    void validate() const;
};

struct IterationRecord {
    std::size_t iteration = 0;  // 1-based
    std::size_t cumulative_labeled = 0;
    MetricsRecord metrics;
    std::vector<SampleId> selected_ids;  // in selection order
};

struct CampaignTrace {
    std::vector<IterationRecord> iterations;
    std::vector<SampleId> final_labeled_ids;  // ascending
};

/// |p - 0.5|; lower means more uncertain.
double uncertainty(double p_malicious);

/// U ids from most to least uncertain, ties by ascending id. Scores are
/// compared as exact vote margins |2 * votes - n_trees|.
std::vector<SampleId> rank_unlabeled(const Forest& model, const PoolState& pool);

/// First k ids of a ranking; ConfigError if k exceeds the ranking.
std::vector<SampleId> select_batch(std::span<const SampleId> ranking, std::size_t k);

/// Random initial batch of k ids from U: floor(k/2) per class where
/// available, the remainder uniformly from what is left.
std::vector<SampleId> draw_initial_batch(const Dataset& unlabeled, std::size_t k, const Seed& seed);

/// Evaluates a model on E.
MetricsRecord evaluate(const Forest& model, const Dataset& eval);

/// Runs one uncertainty-sampling campaign. Iteration 1 labels a random
/// balanced batch; each later iteration ranks U with the current model and
/// labels the least confident batch. A fresh forest is trained on L after
/// every batch and scored on E. `pools.labeled` must start empty.
///
/// `observer`, when set, sees the pools after each iteration's batch moves.
using CampaignObserver = std::function<void(const PoolState&, const IterationRecord&)>;

CampaignTrace run_campaign(PoolState pools, const CampaignSchedule& schedule, const ForestConfig& cfg,
                           const Seed& seed, const CampaignObserver& observer = {});

}  // namespace labelsim
