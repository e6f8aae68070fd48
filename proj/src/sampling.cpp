#include "labelsim/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "labelsim/errors.hpp"

namespace labelsim {

namespace {

// Stream components keep the two classes' draws independent.
constexpr std::uint64_t kClassStream[2] = {0xB0, 0xB1};

std::vector<std::size_t> draw_per_class(const Dataset& ds, Label l, std::size_t k, const Seed& seed) {
    const auto positions = ds.positions_of(l);
    Rng rng(seed.child(kClassStream[index_of(l)]));
    auto picks = sample_without_replacement(positions.size(), k, rng);
    std::vector<std::size_t> out;
    out.reserve(k);
    for (auto p : picks) out.push_back(positions[p]);
    return out;
}

void check_fraction(double f, const char* what, bool allow_one) {
    const bool ok = std::isfinite(f) && f > 0.0 && (allow_one ? f <= 1.0 : f < 1.0);
    if (!ok) {
        throw ConfigError(std::string(what) + " must be in (0, 1" + (allow_one ? "]" : ")") + ", got " +
                          std::to_string(f));
    }
}

}  // namespace

SplitResult split_holdout(const Dataset& ds, double holdout_fraction, const Seed& seed) {
    check_fraction(holdout_fraction, "holdout_fraction", false);

    std::vector<char> in_eval(ds.size(), 0);
    for (Label l : kLabels) {
        const std::size_t count = ds.class_counts()[l];
        const auto k = static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(count)));
        if (k == 0 || k >= count) {
            throw DataError("class " + std::to_string(index_of(l)) + " has " + std::to_string(count) +
                            " samples, too few for a holdout fraction of " + std::to_string(holdout_fraction));
        }
        for (auto p : draw_per_class(ds, l, k, seed)) in_eval[p] = 1;
    }

    std::vector<std::size_t> train_pos, eval_pos;
    for (std::size_t i = 0; i < ds.size(); ++i) (in_eval[i] ? eval_pos : train_pos).push_back(i);
    return SplitResult{ds.select(train_pos), ds.select(eval_pos), seed};
}

Dataset sample_balanced_subset(const Dataset& train, double fraction, const Seed& seed) {
    check_fraction(fraction, "subset fraction", true);
    const auto per_class = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(train.size()) / 2.0 + 1e-9));
    for (Label l : kLabels) {
        if (train.class_counts()[l] < per_class) {
            throw DataError("balanced subset needs " + std::to_string(per_class) + " samples of class " +
                            std::to_string(index_of(l)) + ", only " + std::to_string(train.class_counts()[l]) +
                            " available");
        }
    }
    std::vector<std::size_t> picks;
    for (Label l : kLabels) {
        auto p = draw_per_class(train, l, per_class, seed);
        picks.insert(picks.end(), p.begin(), p.end());
    }
    std::sort(picks.begin(), picks.end());
    return train.select(picks);
}

int FlipSpec::nominal_poison_pct() const noexcept {
    return static_cast<int>(std::lround(100.0 * (malicious_ratio + benign_ratio)));
}

void FlipSpec::validate() const {
    auto ok = [](double r) { return std::isfinite(r) && r >= 0.0 && r <= 1.0; };
    if (!ok(malicious_ratio) || !ok(benign_ratio)) {
        throw ConfigError("flip ratios must be in [0, 1], got (" + std::to_string(malicious_ratio) + ", " +
                          std::to_string(benign_ratio) + ")");
    }
}

std::vector<FlipSpec> reference_flip_specs() {
    return {{0.0, 0.0}, {0.10, 0.10}, {0.10, 0.20}, {0.20, 0.10}, {0.20, 0.20}};
}

std::size_t ratio_count(double ratio, std::size_t count) noexcept {
    return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(count) + 1e-9));
}

std::pair<Dataset, FlipAudit> flip_labels(const Dataset& set, const FlipSpec& spec, const Seed& seed) {
    spec.validate();
    FlipAudit audit;
    for (Label l : kLabels) {
        const std::size_t k = ratio_count(spec.ratio(l), set.class_counts()[l]);
        for (auto p : draw_per_class(set, l, k, seed)) audit.flipped_ids.push_back(set[p].id);
        audit.per_class[l] = k;
    }
    std::sort(audit.flipped_ids.begin(), audit.flipped_ids.end());
    return {flip_ids(set, audit.flipped_ids), std::move(audit)};
}

Dataset flip_ids(const Dataset& set, std::span<const SampleId> ids) {
    std::vector<SampleId> sorted(ids.begin(), ids.end());
    std::sort(sorted.begin(), sorted.end());
    for (auto id : sorted) {
        if (!set.contains(id)) throw DataError("cannot flip unknown sample id " + std::to_string(id));
    }
    Dataset out = set.empty_like();
    for (const auto& s : set.samples()) {
        Sample copy = s;
        if (std::binary_search(sorted.begin(), sorted.end(), s.id)) copy.label = opposite(s.label);
        out.add(std::move(copy));
    }
    return out;
}

}  // namespace labelsim
