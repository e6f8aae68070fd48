#include "labelsim/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "labelsim/errors.hpp"

namespace labelsim {

Dataset::Dataset(std::vector<std::string> feature_names) : feature_names_(std::move(feature_names)) {}

void Dataset::add(Sample sample) {
    if (sample.features.size() != feature_names_.size()) {
        throw DataError("sample " + std::to_string(sample.id) + " has " +
                        std::to_string(sample.features.size()) + " features, expected " +
                        std::to_string(feature_names_.size()));
    }
    for (double v : sample.features) {
        if (!std::isfinite(v)) {
            throw DataError("sample " + std::to_string(sample.id) + " has a non-finite feature value");
        }
    }
    if (sample.label != Label::benign && sample.label != Label::malicious) {
        throw DataError("sample " + std::to_string(sample.id) + " has a non-binary label");
    }
    if (sorted_ids_.empty() || sample.id > sorted_ids_.back()) {
        sorted_ids_.push_back(sample.id);
    } else {
        auto it = std::lower_bound(sorted_ids_.begin(), sorted_ids_.end(), sample.id);
        if (it != sorted_ids_.end() && *it == sample.id) {
            throw DataError("duplicate sample id " + std::to_string(sample.id));
        }
        sorted_ids_.insert(it, sample.id);
    }
    ++counts_[sample.label];
    samples_.push_back(std::move(sample));
}

bool Dataset::contains(SampleId id) const {
    return std::binary_search(sorted_ids_.begin(), sorted_ids_.end(), id);
}

std::vector<std::size_t> Dataset::positions_of(Label l) const {
    std::vector<std::size_t> out;
    out.reserve(counts_[l]);
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (samples_[i].label == l) out.push_back(i);
    }
    return out;
}

std::vector<SampleId> Dataset::ids() const {
    std::vector<SampleId> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_) out.push_back(s.id);
    return out;
}

Dataset Dataset::select(std::span<const std::size_t> positions) const {
    Dataset out(feature_names_);
    out.samples_.reserve(positions.size());
    for (std::size_t p : positions) out.add(samples_.at(p));
    return out;
}

}  // namespace labelsim
