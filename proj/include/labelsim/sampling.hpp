#pragma once

#include <span>
#include <vector>

#include "labelsim/dataset.hpp"
#include "labelsim/seed.hpp"

namespace labelsim {

/// Training pool T and evaluation holdout E.
struct SplitResult {
    Dataset train;
    Dataset eval;
    Seed seed;
};

/// Stratified holdout: each class contributes round(fraction * count_c)
/// samples to `eval`, drawn uniformly without replacement; the rest go to
/// `train`. Both outputs keep the input order.
SplitResult split_holdout(const Dataset& ds, double holdout_fraction, const Seed& seed);

/// Class-balanced subset with floor(fraction * |train| / 2) samples per class.
Dataset sample_balanced_subset(const Dataset& train, double fraction, const Seed& seed);

/// Per-class label-flip ratios. Table-style "poisoning %" labels are the sum
/// of both ratios, so (0.10, 0.10) is nominally 20% even though only 10% of
/// a balanced set is flipped.
struct FlipSpec {
    double malicious_ratio = 0.0;
    double benign_ratio = 0.0;

    double ratio(Label l) const noexcept { return l == Label::malicious ? malicious_ratio : benign_ratio; }
    int nominal_poison_pct() const noexcept;
    bool is_clean() const noexcept { return malicious_ratio == 0.0 && benign_ratio == 0.0; }
    void validate() const;

    friend bool operator==(const FlipSpec&, const FlipSpec&) = default;
};

/// The five rows of the reference flip table: clean, then (mal, ben) =
/// (0.1,0.1), (0.1,0.2), (0.2,0.1), (0.2,0.2).
std::vector<FlipSpec> reference_flip_specs();

struct FlipAudit {
    std::vector<SampleId> flipped_ids;  // ascending
    ClassCounts per_class;              // keyed by the original label

    /// Flipped samples over all samples, i.e. the real poisoning rate.
    double flipped_fraction(std::size_t total) const noexcept {
        return total == 0 ? 0.0 : static_cast<double>(flipped_ids.size()) / static_cast<double>(total);
    }
};

/// floor(ratio * count) with a small tolerance so that e.g. 0.29 * 100 is 29.
std::size_t ratio_count(double ratio, std::size_t count) noexcept;

/// Inverts floor(ratio_c * count_c) labels per class, chosen uniformly
/// without replacement. Features are untouched.
std::pair<Dataset, FlipAudit> flip_labels(const Dataset& set, const FlipSpec& spec, const Seed& seed);

/// Inverts the labels of exactly the given ids (ids absent from `set` are an error).
Dataset flip_ids(const Dataset& set, std::span<const SampleId> ids);

}  // namespace labelsim
