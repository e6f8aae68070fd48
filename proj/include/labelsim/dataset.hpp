#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace labelsim {

enum class Label : std::uint8_t { benign = 0, malicious = 1 };

constexpr Label opposite(Label l) noexcept {
    return l == Label::benign ? Label::malicious : Label::benign;
}

constexpr std::size_t index_of(Label l) noexcept { return static_cast<std::size_t>(l); }

constexpr std::array<Label, 2> kLabels{Label::benign, Label::malicious};

using SampleId = std::size_t;

struct Sample {
    SampleId id = 0;
    std::vector<double> features;
    Label label = Label::benign;
};

/// Per-class totals, indexed by index_of(Label).
struct ClassCounts {
    std::size_t benign = 0;
    std::size_t malicious = 0;

    std::size_t operator[](Label l) const noexcept { return l == Label::benign ? benign : malicious; }
    std::size_t& operator[](Label l) noexcept { return l == Label::benign ? benign : malicious; }
    std::size_t total() const noexcept { return benign + malicious; }

    friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

/// Ordered collection of labelled samples sharing one feature layout.
/// Invariants (checked on insertion): identical feature length, finite
/// feature values, unique ids.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<std::string> feature_names);

    /// Throws DataError when a sample violates the dataset invariants.
    void add(Sample sample);

    const std::vector<Sample>& samples() const noexcept { return samples_; }
    const Sample& operator[](std::size_t i) const noexcept { return samples_[i]; }
    const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
    std::size_t n_features() const noexcept { return feature_names_.size(); }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }
    const ClassCounts& class_counts() const noexcept { return counts_; }

    bool contains(SampleId id) const;

    /// Positions (not ids) of the samples of one class, in dataset order.
    std::vector<std::size_t> positions_of(Label l) const;

    std::vector<SampleId> ids() const;

    /// New dataset made of the samples at the given positions, in the given order.
    Dataset select(std::span<const std::size_t> positions) const;

    /// Same schema, no samples.
    Dataset empty_like() const { return Dataset(feature_names_); }

private:
    std::vector<std::string> feature_names_;
    std::vector<Sample> samples_;
    std::vector<SampleId> sorted_ids_;
    ClassCounts counts_;
};

}  // namespace labelsim
