#include "labelsim/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "labelsim/errors.hpp"
#include "labelsim/parallel.hpp"

namespace labelsim {

// ---------------------------------------------------------------------------
// Configuration

std::size_t FeatureRule::resolve(std::size_t n_features) const {
    switch (kind) {
        case Kind::all:
            return std::max<std::size_t>(1, n_features);
        case Kind::fixed:
            return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(1, n_features));
        case Kind::sqrt:
        default:
            return std::max<std::size_t>(
                1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n_features)))));
    }
}

std::string FeatureRule::to_string() const {
    switch (kind) {
        case Kind::all:
            return "all";
        case Kind::fixed:
            return std::to_string(k);
        case Kind::sqrt:
        default:
            return "sqrt";
    }
}

FeatureRule FeatureRule::parse(const std::string& text) {
    if (text == "sqrt") return sqrt_rule();
    if (text == "all") return all();
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(text, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != text.size() || pos == 0 || v < 1) {
        throw ConfigError("features_per_split must be 'sqrt', 'all', or a positive integer, got '" + text + "'");
    }
    return fixed(static_cast<std::size_t>(v));
}

void ForestConfig::validate(std::size_t n_features) const {
    if (n_trees < 1) throw ConfigError("n_trees must be >= 1");
    if (min_samples_split < 1) throw ConfigError("min_samples_split must be >= 1");
    if (features_per_split.kind == FeatureRule::Kind::fixed &&
        (features_per_split.k < 1 || features_per_split.k > n_features)) {
        throw ConfigError("features_per_split k=" + std::to_string(features_per_split.k) + " exceeds feature count " +
                          std::to_string(n_features));
    }
}

// ---------------------------------------------------------------------------
// Impurity and split search

double gini(std::span<const std::size_t> class_counts) {
    const double total = std::accumulate(class_counts.begin(), class_counts.end(), 0.0);
    if (total <= 0.0) throw ConfigError("gini impurity of an empty node is undefined");
    double sum_sq = 0.0;
    for (auto c : class_counts) {
        const double p = static_cast<double>(c) / total;
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

TrainingMatrix::TrainingMatrix(const Dataset& ds) : columns_(ds.n_features()), labels_(ds.size()) {
    for (auto& col : columns_) col.resize(ds.size());
    for (std::size_t r = 0; r < ds.size(); ++r) {
        const auto& s = ds[r];
        for (std::size_t c = 0; c < columns_.size(); ++c) columns_[c][r] = s.features[c];
        labels_[r] = s.label;
    }
}

namespace {

__extension__ using i128 = __int128;

// A split's quality as the exact rational sum_c(l_c^2)/n_l + sum_c(r_c^2)/n_r.
// Weighted child Gini is 1 - score/n, so a larger score is a better split.
// Integer arithmetic keeps ties exact across features.
struct Score {
    i128 num = 0;
    i128 den = 1;

    friend bool operator>(const Score& a, const Score& b) { return a.num * b.den > b.num * a.den; }
};

struct Candidate {
    Split split;
    Score score;
};

struct NodeCounts {
    std::uint64_t c[2] = {0, 0};
    std::uint64_t total() const { return c[0] + c[1]; }
};

NodeCounts count_rows(const TrainingMatrix& m, std::span<const std::size_t> rows) {
    NodeCounts n;
    for (auto r : rows) ++n.c[index_of(m.label(r))];
    return n;
}

Score parent_score(const NodeCounts& n) {
    return {static_cast<i128>(n.c[0] * n.c[0] + n.c[1] * n.c[1]), static_cast<i128>(n.total())};
}

double midpoint(double a, double b) {
    double mid = (a + b) / 2.0;
    if (!std::isfinite(mid)) mid = a / 2.0 + b / 2.0;
    if (mid >= b || mid < a) mid = a;
    return mid;
}

struct Scratch {
    std::vector<double> values[2];  // per-class feature values at the node
};

// Best threshold for one feature. `non_constant` reports whether the feature
// takes more than one value among the rows.
std::optional<Candidate> best_on_feature(const TrainingMatrix& m, std::span<const std::size_t> rows,
                                         std::size_t feature, const NodeCounts& node, Scratch& scratch,
                                         bool& non_constant) {
    auto& v0 = scratch.values[0];
    auto& v1 = scratch.values[1];
    v0.clear();
    v1.clear();
    for (auto r : rows) (m.label(r) == Label::benign ? v0 : v1).push_back(m.value(r, feature));
    std::sort(v0.begin(), v0.end());
    std::sort(v1.begin(), v1.end());

    constexpr double kInf = std::numeric_limits<double>::infinity();
    const double lo = std::min(v0.empty() ? kInf : v0.front(), v1.empty() ? kInf : v1.front());
    const double hi = std::max(v0.empty() ? -kInf : v0.back(), v1.empty() ? -kInf : v1.back());
    non_constant = lo < hi;
    if (!non_constant) return std::nullopt;

    const Score parent = parent_score(node);
    std::optional<Candidate> best;
    std::uint64_t left[2] = {0, 0};
    const std::uint64_t n = node.total();
    std::size_t i = 0, j = 0;
    // Merge-walk both sorted arrays one distinct value at a time.
    while (i < v0.size() || j < v1.size()) {
        const double x = std::min(i < v0.size() ? v0[i] : kInf, j < v1.size() ? v1[j] : kInf);
        while (i < v0.size() && v0[i] == x) ++i, ++left[0];
        while (j < v1.size() && v1[j] == x) ++j, ++left[1];
        if (i == v0.size() && j == v1.size()) break;
        const double next = std::min(i < v0.size() ? v0[i] : kInf, j < v1.size() ? v1[j] : kInf);

        const std::uint64_t nl = left[0] + left[1];
        const std::uint64_t nr = n - nl;
        const std::uint64_t right[2] = {node.c[0] - left[0], node.c[1] - left[1]};
        const auto sl = static_cast<i128>(left[0] * left[0] + left[1] * left[1]);
        const auto sr = static_cast<i128>(right[0] * right[0] + right[1] * right[1]);
        const Score s{sl * nr + sr * nl, static_cast<i128>(nl) * nr};
        if (!(s > parent)) continue;
        if (!best || s > best->score) {
            const double score_value = static_cast<double>(s.num) / static_cast<double>(s.den);
            const double parent_value = static_cast<double>(parent.num) / static_cast<double>(parent.den);
            best = Candidate{{feature, midpoint(x, next), (score_value - parent_value) / static_cast<double>(n)}, s};
        }
    }
    return best;
}

// Keeps the better candidate; equal scores prefer the lower feature index
// (thresholds within a feature are already scanned in ascending order).
void keep_better(std::optional<Candidate>& best, std::optional<Candidate> c) {
    if (!c) return;
    if (!best || c->score > best->score ||
        (!(best->score > c->score) && c->split.feature < best->split.feature)) {
        best = std::move(c);
    }
}

}  // namespace

std::optional<Split> best_split(const TrainingMatrix& m, std::span<const std::size_t> rows,
                                std::span<const std::size_t> candidate_features) {
    if (rows.size() < 2) return std::nullopt;
    const auto node = count_rows(m, rows);
    Scratch scratch;
    std::optional<Candidate> best;
    for (auto f : candidate_features) {
        bool non_constant = false;
        keep_better(best, best_on_feature(m, rows, f, node, scratch, non_constant));
    }
    if (!best) return std::nullopt;
    return best->split;
}

// ---------------------------------------------------------------------------
// Tree

std::size_t Tree::depth() const {
    if (nodes_.empty()) return 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    std::size_t deepest = 0;
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (!nodes_[i].is_leaf()) {
            stack.emplace_back(static_cast<std::size_t>(nodes_[i].left), d + 1);
            stack.emplace_back(static_cast<std::size_t>(nodes_[i].right), d + 1);
        }
    }
    return deepest;
}

std::size_t Tree::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

std::size_t Tree::leaf_for(std::span<const double> features) const {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const auto& n = nodes_[i];
        i = static_cast<std::size_t>(features[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return i;
}

Label Tree::vote(std::span<const double> features) const {
    const auto& leaf = nodes_[leaf_for(features)];
    return leaf.counts[1] > leaf.counts[0] ? Label::malicious : Label::benign;
}

namespace {

class TreeBuilder {
public:
    TreeBuilder(const TrainingMatrix& m, const ForestConfig& cfg, const Seed& seed)
        : m_(m), cfg_(cfg), rng_(seed), per_node_(cfg.features_per_split.resolve(m.cols())),
          order_(m.cols()) {
        std::iota(order_.begin(), order_.end(), std::size_t{0});
    }

    Tree build(std::vector<std::size_t> rows) {
        grow(std::move(rows), 0);
        return Tree(std::move(nodes_));
    }

private:
    std::int32_t grow(std::vector<std::size_t> rows, std::size_t depth) {
        const auto counts = count_rows(m_, rows);
        const auto index = static_cast<std::int32_t>(nodes_.size());
        Tree::Node node;
        node.counts[0] = static_cast<std::uint32_t>(counts.c[0]);
        node.counts[1] = static_cast<std::uint32_t>(counts.c[1]);
        nodes_.push_back(node);

        const bool pure = counts.c[0] == 0 || counts.c[1] == 0;
        const bool too_deep = cfg_.max_depth && depth >= *cfg_.max_depth;
        const bool too_small = rows.size() < std::max<std::size_t>(2, cfg_.min_samples_split);
        if (pure || too_deep || too_small) return index;

        auto split = search(rows, counts);
        if (!split) return index;

        std::vector<std::size_t> left, right;
        for (auto r : rows) {
            (m_.value(r, split->feature) <= split->threshold ? left : right).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        const auto l = grow(std::move(left), depth + 1);
        const auto r = grow(std::move(right), depth + 1);
        auto& n = nodes_[static_cast<std::size_t>(index)];
        n.feature = static_cast<std::int32_t>(split->feature);
        n.threshold = split->threshold;
        n.left = l;
        n.right = r;
        return index;
    }

    // Visits features in a fresh random order and stops once `per_node_`
    // non-constant features were examined. Constant features do not count
    // toward the quota, so a node is only left unsplit when no examined
    // variable feature helps.
    std::optional<Split> search(std::span<const std::size_t> rows, const NodeCounts& counts) {
        std::optional<Candidate> best;
        if (per_node_ >= m_.cols()) {
            for (std::size_t f = 0; f < m_.cols(); ++f) {
                bool nc = false;
                keep_better(best, best_on_feature(m_, rows, f, counts, scratch_, nc));
            }
        } else {
            std::size_t examined = 0;
            for (std::size_t i = 0; i < order_.size() && examined < per_node_; ++i) {
                const auto j = i + static_cast<std::size_t>(rng_.below(order_.size() - i));
                std::swap(order_[i], order_[j]);
                bool nc = false;
                keep_better(best, best_on_feature(m_, rows, order_[i], counts, scratch_, nc));
                if (nc) ++examined;
            }
        }
        if (!best) return std::nullopt;
        return best->split;
    }

    const TrainingMatrix& m_;
    const ForestConfig& cfg_;
    Rng rng_;
    std::size_t per_node_;
    std::vector<std::size_t> order_;
    std::vector<Tree::Node> nodes_;
    Scratch scratch_;
};

}  // namespace

Tree grow_tree(const TrainingMatrix& m, std::span<const std::size_t> rows, const ForestConfig& cfg,
               const Seed& seed) {
    if (rows.empty()) throw DataError("cannot train a tree on an empty set");
    return TreeBuilder(m, cfg, seed).build(std::vector<std::size_t>(rows.begin(), rows.end()));
}

Tree train_tree(const Dataset& set, const ForestConfig& cfg, const Seed& seed) {
    if (set.empty()) throw DataError("cannot train a tree on an empty set");
    cfg.validate(set.n_features());
    TrainingMatrix m(set);
    std::vector<std::size_t> rows(set.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return grow_tree(m, rows, cfg, seed);
}

// ---------------------------------------------------------------------------
// Forest

Forest::Forest(std::vector<Tree> trees, ForestConfig config, std::size_t n_features)
    : trees_(std::move(trees)), config_(std::move(config)), n_features_(n_features) {}

void Forest::check_dims(std::span<const double> features) const {
    if (features.size() != n_features_) {
        throw DataError("feature vector has " + std::to_string(features.size()) + " values, forest expects " +
                        std::to_string(n_features_));
    }
    if (trees_.empty()) throw DataError("forest has no trees");
}

std::size_t Forest::malicious_votes(std::span<const double> features) const {
    check_dims(features);
    std::size_t votes = 0;
    for (const auto& t : trees_) votes += t.vote(features) == Label::malicious ? 1 : 0;
    return votes;
}

double Forest::predict_proba(std::span<const double> features) const {
    return static_cast<double>(malicious_votes(features)) / static_cast<double>(trees_.size());
}

Label Forest::predict(std::span<const double> features) const {
    return 2 * malicious_votes(features) > trees_.size() ? Label::malicious : Label::benign;
}

std::vector<Label> Forest::predict_all(const Dataset& ds) const {
    std::vector<Label> out;
    out.reserve(ds.size());
    for (const auto& s : ds.samples()) out.push_back(predict(s.features));
    return out;
}

Label decide(double p_malicious) noexcept { return p_malicious > 0.5 ? Label::malicious : Label::benign; }

std::vector<std::size_t> tree_rows(std::size_t n, const ForestConfig& cfg, std::size_t tree_index) {
    std::vector<std::size_t> rows(n);
    if (cfg.bootstrap) {
        Rng rng(cfg.seed.child(tree_index).child(0));
        for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
        std::sort(rows.begin(), rows.end());
    } else {
        std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    return rows;
}

Forest train_forest(const Dataset& set, const ForestConfig& cfg) {
    if (set.empty()) throw DataError("cannot train a forest on an empty set");
    cfg.validate(set.n_features());
    const TrainingMatrix m(set);
    std::vector<Tree> trees(cfg.n_trees);
    parallel_for(cfg.n_trees, cfg.workers, [&](std::size_t t) {
        const auto rows = tree_rows(set.size(), cfg, t);
        trees[t] = grow_tree(m, rows, cfg, cfg.seed.child(t).child(1));
    });
    return Forest(std::move(trees), cfg, set.n_features());
}

// ---------------------------------------------------------------------------
// Serialization

void Forest::save(std::ostream& out) const {
    out << "labelsim-forest 1\n";
    out << "n_features " << n_features_ << "\n";
    out << "n_trees " << trees_.size() << "\n";
    char buf[64];
    for (const auto& t : trees_) {
        out << "tree " << t.nodes().size() << "\n";
        for (const auto& n : t.nodes()) {
            std::snprintf(buf, sizeof buf, "%a", n.threshold);
            out << n.feature << ' ' << buf << ' ' << n.left << ' ' << n.right << ' ' << n.counts[0] << ' '
                << n.counts[1] << "\n";
        }
    }
}

Forest Forest::load(std::istream& in) {
    auto fail = [](const std::string& what) -> Forest { throw DataError("malformed forest file: " + what); };
    std::string magic, key;
    int version = 0;
    if (!(in >> magic >> version) || magic != "labelsim-forest") return fail("bad magic");
    if (version != 1) return fail("unsupported version " + std::to_string(version));
    std::size_t n_features = 0, n_trees = 0;
    if (!(in >> key >> n_features) || key != "n_features") return fail("expected n_features");
    if (!(in >> key >> n_trees) || key != "n_trees") return fail("expected n_trees");
    std::vector<Tree> trees;
    trees.reserve(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) {
        std::size_t count = 0;
        if (!(in >> key >> count) || key != "tree" || count == 0) return fail("expected tree header");
        std::vector<Tree::Node> nodes(count);
        for (auto& n : nodes) {
            std::string thr;
            if (!(in >> n.feature >> thr >> n.left >> n.right >> n.counts[0] >> n.counts[1])) {
                return fail("truncated node");
            }
            char* end = nullptr;
            n.threshold = std::strtod(thr.c_str(), &end);
            if (end != thr.c_str() + thr.size()) return fail("bad threshold '" + thr + "'");
            const auto limit = static_cast<std::int32_t>(count);
            if (!n.is_leaf() && (n.feature >= static_cast<std::int32_t>(n_features) || n.left <= 0 ||
                                 n.right <= 0 || n.left >= limit || n.right >= limit)) {
                return fail("node index out of range");
            }
        }
        trees.emplace_back(std::move(nodes));
    }
    ForestConfig cfg;
    cfg.n_trees = n_trees;
    return Forest(std::move(trees), cfg, n_features);
}

}  // namespace labelsim
