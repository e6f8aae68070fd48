#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "labelsim/dataset.hpp"
#include "labelsim/seed.hpp"

namespace labelsim {

/// How many features are examined at each node.
struct FeatureRule {
    enum class Kind : std::uint8_t { sqrt, all, fixed };
    Kind kind = Kind::sqrt;
    std::size_t k = 0;  // only for Kind::fixed

    static FeatureRule sqrt_rule() { return {Kind::sqrt, 0}; }
    static FeatureRule all() { return {Kind::all, 0}; }
    static FeatureRule fixed(std::size_t k) { return {Kind::fixed, k}; }

    /// Number of features for a dataset with n_features columns (at least 1).
    std::size_t resolve(std::size_t n_features) const;
    std::string to_string() const;
    static FeatureRule parse(const std::string& text);

    friend bool operator==(const FeatureRule&, const FeatureRule&) = default;
};

struct ForestConfig {
    std::size_t n_trees = 100;
    std::optional<std::size_t> max_depth;  // nullopt = unlimited
    std::size_t min_samples_split = 2;
    FeatureRule features_per_split = FeatureRule::sqrt_rule();
    bool bootstrap = true;
    Seed seed;
    /// Worker threads for tree training; 0 or 1 = serial. Never affects results.
    std::size_t workers = 1;

    void validate(std::size_t n_features) const;
};

/// Gini impurity 1 - sum_c p_c^2. Throws ConfigError on an empty node.
double gini(std::span<const std::size_t> class_counts);

/// Column-major view of a training set used by the split search.
class TrainingMatrix {
public:
    explicit TrainingMatrix(const Dataset& ds);

    std::size_t rows() const noexcept { return labels_.size(); }
    std::size_t cols() const noexcept { return columns_.size(); }
    double value(std::size_t row, std::size_t col) const noexcept { return columns_[col][row]; }
    Label label(std::size_t row) const noexcept { return labels_[row]; }

private:
    std::vector<std::vector<double>> columns_;
    std::vector<Label> labels_;
};

struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;        // samples with value <= threshold go left
    double impurity_decrease = 0;  // parent gini minus weighted child gini
};

/// Exhaustive search over midpoints of consecutive distinct values of each
/// candidate feature. Rows may repeat (bootstrap multiplicity). Returns the
/// split with the largest Gini decrease, ties broken by lower feature index
/// then lower threshold; nullopt when nothing strictly decreases impurity.
std::optional<Split> best_split(const TrainingMatrix& m, std::span<const std::size_t> rows,
                                std::span<const std::size_t> candidate_features);

class Tree {
public:
    struct Node {
        std::int32_t feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint32_t counts[2] = {0, 0};  // training class counts reaching this node

        bool is_leaf() const noexcept { return feature < 0; }
        friend bool operator==(const Node& a, const Node& b) noexcept {
            return a.feature == b.feature && a.threshold == b.threshold && a.left == b.left &&
                   a.right == b.right && a.counts[0] == b.counts[0] && a.counts[1] == b.counts[1];
        }
    };

    Tree() = default;
    explicit Tree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    std::size_t depth() const;
    std::size_t leaf_count() const;

    /// Index of the leaf a feature vector routes to.
    std::size_t leaf_for(std::span<const double> features) const;

    /// Majority class of the reached leaf; an even leaf votes benign.
    Label vote(std::span<const double> features) const;

    friend bool operator==(const Tree&, const Tree&) = default;

private:
    std::vector<Node> nodes_;
};

/// Grows one CART tree on the given rows of `m` (repeats allowed).
/// Per-node feature subsets are drawn from `seed`.
Tree grow_tree(const TrainingMatrix& m, std::span<const std::size_t> rows, const ForestConfig& cfg,
               const Seed& seed);

/// Grows one tree on every sample of `set`, no bootstrap.
Tree train_tree(const Dataset& set, const ForestConfig& cfg, const Seed& seed);

class Forest {
public:
    Forest() = default;
    Forest(std::vector<Tree> trees, ForestConfig config, std::size_t n_features);

    const std::vector<Tree>& trees() const noexcept { return trees_; }
    const ForestConfig& config() const noexcept { return config_; }
    std::size_t n_features() const noexcept { return n_features_; }

    /// Number of trees voting malicious.
    std::size_t malicious_votes(std::span<const double> features) const;

    /// Fraction of trees voting malicious.
    double predict_proba(std::span<const double> features) const;
    double predict_proba(const Sample& s) const { return predict_proba(s.features); }

    /// Malicious iff strictly more than half the trees say so.
    Label predict(std::span<const double> features) const;
    Label predict(const Sample& s) const { return predict(s.features); }

    std::vector<Label> predict_all(const Dataset& ds) const;

    /// Text format "labelsim-forest 1": thresholds in hex-float so that a
    /// save/load round trip is exact.
    void save(std::ostream& out) const;
    static Forest load(std::istream& in);

    friend bool operator==(const Forest& a, const Forest& b) {
        return a.trees_ == b.trees_ && a.n_features_ == b.n_features_;
    }

private:
    void check_dims(std::span<const double> features) const;

    std::vector<Tree> trees_;
    ForestConfig config_;
    std::size_t n_features_ = 0;
};

/// Rows each tree trains on: a seeded bootstrap draw when cfg.bootstrap,
/// otherwise every row once.
std::vector<std::size_t> tree_rows(std::size_t n, const ForestConfig& cfg, std::size_t tree_index);

Forest train_forest(const Dataset& set, const ForestConfig& cfg);

/// Label decision for a malicious vote fraction (ties go benign).
Label decide(double p_malicious) noexcept;

}  // namespace labelsim
