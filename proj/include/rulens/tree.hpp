#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "rulens/dataset.hpp"
#include "rulens/random.hpp"
#include "rulens/rule.hpp"

namespace rulens {

struct TreeConfig {
    double mean_leaves = 20.0;        // mean of the exponential leaf-count draw
    std::size_t min_node_count = 5;   // both children need at least this many rows
    double min_impurity = 1e-12;      // nodes with lower variance are terminal
    double attr_sample_fraction = 1.0 / 3.0;

    void validate() const {
        if (!(mean_leaves > 1.0)) throw UsageError("mean_leaves must exceed 1");
        if (min_node_count < 1) throw UsageError("min_node_count must be at least 1");
        if (!(min_impurity >= 0.0)) throw UsageError("min_impurity must be non-negative");
        if (!(attr_sample_fraction > 0.0 && attr_sample_fraction <= 1.0))
            throw UsageError("attr_sample_fraction must lie in (0, 1]");
    }
};

// Inverse-CDF exponential draw -mean*ln(u), rounded to nearest, floor 2.
inline std::size_t tree_size_from_uniform(double mean_leaves, double u) {
    const double draw = -mean_leaves * std::log(u);
    return std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(draw)));
}

inline std::size_t sample_tree_size(double mean_leaves, Rng& rng) {
    if (!(mean_leaves > 1.0)) throw UsageError("mean_leaves must exceed 1");
    return tree_size_from_uniform(mean_leaves, uniform_open01(rng));
}

struct Split {
    std::size_t attribute = 0;
    double threshold = 0.0;
    double impurity_sum = 0.0;  // n_left*var_left + n_right*var_right
};

// Candidate splits closer than this (relative to the parent's SSE) count as
// ties and keep the earlier (attribute, threshold).
inline constexpr double kSplitTieTolerance = 1e-12;

inline double midpoint_threshold(double lo, double hi) {
    const double mid = lo + (hi - lo) / 2.0;
    return mid > lo ? mid : hi;
}

/// Best variance-reducing split of `rows` (dataset row indices, with
/// `targets` parallel to them). Thresholds are midpoints between consecutive
/// distinct values; left is x < threshold.
inline std::optional<Split> best_split(std::span<const std::size_t> rows, std::span<const double> targets,
                                       std::span<const std::size_t> candidate_attrs, const Matrix& data,
                                       const TreeConfig& config) {
    const std::size_t n = rows.size();
    if (n < 2 || targets.size() != n) return std::nullopt;

    double sum = 0.0, sum_sq = 0.0;
    for (double t : targets) { sum += t; sum_sq += t * t; }
    const double mean = sum / static_cast<double>(n);
    double parent_sse = 0.0;
    for (double t : targets) parent_sse += (t - mean) * (t - mean);
    if (parent_sse / static_cast<double>(n) < config.min_impurity) return std::nullopt;

    std::vector<std::size_t> attrs(candidate_attrs.begin(), candidate_attrs.end());
    std::sort(attrs.begin(), attrs.end());
    const double tie = kSplitTieTolerance * std::max(1.0, parent_sse);
    const std::size_t min_count = std::max<std::size_t>(1, config.min_node_count);

    std::optional<Split> best;
    std::vector<std::pair<double, double>> pairs(n);
    for (std::size_t a : attrs) {
        for (std::size_t i = 0; i < n; ++i)
            pairs[i] = {data(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(a)), targets[i]};
        std::sort(pairs.begin(), pairs.end(),
                  [](const auto& l, const auto& r) { return l.first < r.first; });
        double left_sum = 0.0, left_sq = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_sum += pairs[i].second;
            left_sq += pairs[i].second * pairs[i].second;
            if (pairs[i].first == pairs[i + 1].first) continue;
            const std::size_t nl = i + 1, nr = n - nl;
            if (nl < min_count || nr < min_count) continue;
            const double right_sum = sum - left_sum;
            const double right_sq = sum_sq - left_sq;
            const double sse_l = std::max(0.0, left_sq - left_sum * left_sum / static_cast<double>(nl));
            const double sse_r = std::max(0.0, right_sq - right_sum * right_sum / static_cast<double>(nr));
            const double impurity = sse_l + sse_r;
            if (!best || impurity < best->impurity_sum - tie)
                best = Split{a, midpoint_threshold(pairs[i].first, pairs[i + 1].first), impurity};
        }
    }
    return best;
}

struct TreeNode {
    int attribute = -1;  // -1 for a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int parent = -1;
    double mean = 0.0;
    std::size_t count = 0;
    double impurity = 0.0;  // node variance
};

/// Regression tree; node 0 is the root and children always follow parents.
class Tree {
public:
    explicit Tree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    const std::vector<TreeNode>& nodes() const { return nodes_; }

    std::size_t terminal_count() const {
        return static_cast<std::size_t>(
            std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.attribute < 0; }));
    }

    template <class Row>
    int leaf_of(const Row& x) const {
        int id = 0;
        while (nodes_[id].attribute >= 0) {
            const auto& node = nodes_[id];
            id = x[node.attribute] < node.threshold ? node.left : node.right;
        }
        return id;
    }

    template <class Row>
    double predict(const Row& x) const { return nodes_[leaf_of(x)].mean; }

    /// One rule per non-root node, in node order. Repeated constraints on an
    /// attribute along a path intersect into a single interval.
    std::vector<Rule> extract_rules() const {
        std::vector<Rule> node_rule(nodes_.size());
        std::vector<Rule> out;
        for (std::size_t id = 1; id < nodes_.size(); ++id) {
            const auto& node = nodes_[id];
            const auto& parent = nodes_[static_cast<std::size_t>(node.parent)];
            Rule r = node_rule[static_cast<std::size_t>(node.parent)];
            const auto attr = static_cast<std::size_t>(parent.attribute);
            if (parent.left == static_cast<int>(id))
                r.below(attr, parent.threshold);
            else
                r.at_least(attr, parent.threshold);
            node_rule[id] = r;
            out.push_back(std::move(r));
        }
        return out;
    }

private:
    std::vector<TreeNode> nodes_;
};

/// Best-first CART growth on (rows, targets) up to `max_leaves` terminal
/// nodes. The frontier node with the largest count-weighted impurity is split
/// first; nodes that cannot split become permanent leaves. Each split draws
/// ceil(attr_sample_fraction * |pool|) attributes from `rng`. An empty
/// `attribute_pool` means every attribute.
inline Tree grow_tree(std::span<const std::size_t> rows, std::span<const double> targets, std::size_t max_leaves,
                      const Matrix& data, const TreeConfig& config, Rng& rng,
                      std::span<const std::size_t> attribute_pool = {}) {
    if (rows.empty() || rows.size() != targets.size())
        throw UsageError("grow_tree needs matching non-empty rows and targets");
    std::vector<std::size_t> pool(attribute_pool.begin(), attribute_pool.end());
    if (pool.empty()) pool = RuleSet::all_attributes(static_cast<std::size_t>(data.cols()));
    const std::size_t draw_count = std::min(
        pool.size(), std::max<std::size_t>(
                         1, static_cast<std::size_t>(std::ceil(config.attr_sample_fraction *
                                                               static_cast<double>(pool.size()) - 1e-9))));

    struct Pending {
        std::vector<std::size_t> positions;  // into rows/targets
        double sse;
    };
    std::vector<TreeNode> nodes;
    std::vector<Pending> pending;  // parallel to nodes; emptied once resolved
    std::vector<std::size_t> frontier;

    auto make_node = [&](std::vector<std::size_t> positions, int parent) {
        TreeNode node;
        node.parent = parent;
        node.count = positions.size();
        double s = 0.0;
        for (auto p : positions) s += targets[p];
        node.mean = s / static_cast<double>(node.count);
        double sse = 0.0;
        for (auto p : positions) sse += (targets[p] - node.mean) * (targets[p] - node.mean);
        node.impurity = sse / static_cast<double>(node.count);
        nodes.push_back(node);
        pending.push_back({std::move(positions), sse});
        frontier.push_back(nodes.size() - 1);
        return static_cast<int>(nodes.size() - 1);
    };

    std::vector<std::size_t> all(rows.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    make_node(std::move(all), -1);
    std::size_t settled_leaves = 0;

    std::vector<std::size_t> sub_rows;
    std::vector<double> sub_targets;
    while (!frontier.empty() && settled_leaves + frontier.size() < max_leaves) {
        auto pick = std::max_element(frontier.begin(), frontier.end(), [&](std::size_t a, std::size_t b) {
            return pending[a].sse < pending[b].sse || (pending[a].sse == pending[b].sse && a > b);
        });
        const std::size_t id = *pick;
        frontier.erase(pick);
        auto positions = std::move(pending[id].positions);

        sub_rows.clear();
        sub_targets.clear();
        for (auto p : positions) {
            sub_rows.push_back(rows[p]);
            sub_targets.push_back(targets[p]);
        }
        std::vector<std::size_t> candidates;
        for (auto i : sample_without_replacement(rng, pool.size(), draw_count)) candidates.push_back(pool[i]);
        const auto split = best_split(sub_rows, sub_targets, candidates, data, config);
        if (!split) {
            ++settled_leaves;
            continue;
        }
        std::vector<std::size_t> left, right;
        for (auto p : positions) {
            const double x = data(static_cast<Eigen::Index>(rows[p]), static_cast<Eigen::Index>(split->attribute));
            (x < split->threshold ? left : right).push_back(p);
        }
        nodes[id].attribute = static_cast<int>(split->attribute);
        nodes[id].threshold = split->threshold;
        const int l = make_node(std::move(left), static_cast<int>(id));
        const int r = make_node(std::move(right), static_cast<int>(id));
        nodes[id].left = l;
        nodes[id].right = r;
    }
    return Tree(std::move(nodes));
}

} // namespace rulens
