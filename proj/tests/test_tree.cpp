#include <gtest/gtest.h>

#include <numeric>

#include "rulens/tree.hpp"
#include "support/oracles.hpp"

using namespace rulens;

TEST(TreeSize, InverseCdf) {
    EXPECT_EQ(tree_size_from_uniform(20.0, 1.0), 2u);
    EXPECT_EQ(tree_size_from_uniform(20.0, std::exp(-1.0)), 20u);
    EXPECT_EQ(tree_size_from_uniform(20.0, std::exp(-5.0)), 100u);
    EXPECT_EQ(tree_size_from_uniform(20.0, 0.999), 2u);
}

TEST(TreeSize, ExponentialDrawStatistics) {
    Rng rng(123);
    double sum = 0.0;
    std::size_t minimum = 1000;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto t = sample_tree_size(20.0, rng);
        sum += static_cast<double>(t);
        minimum = std::min(minimum, t);
    }
    EXPECT_GE(sum / n, 19.4);
    EXPECT_LE(sum / n, 20.6);
    EXPECT_EQ(minimum, 2u);
}

TEST(BestSplit, SeparatesTwoGroups) {
    Matrix x(6, 2);
    x << 0, 5, 1, 4, 2, 3, 10, 2, 11, 1, 12, 0;
    std::vector<std::size_t> rows(6);
    std::iota(rows.begin(), rows.end(), 0);
    std::vector<double> t{1, 1, 1, -1, -1, -1};
    std::vector<std::size_t> attrs{0, 1};
    TreeConfig cfg;
    cfg.min_node_count = 1;
    const auto s = best_split(rows, t, attrs, x, cfg);
    ASSERT_TRUE(s);
    EXPECT_EQ(s->attribute, 0u);  // both attributes separate perfectly; the lower index wins
    EXPECT_DOUBLE_EQ(s->threshold, 6.0);
    EXPECT_NEAR(s->impurity_sum, 0.0, 1e-12);
}

TEST(BestSplit, RespectsMinNodeCountAndImpurity) {
    Matrix x(4, 1);
    x << 0, 1, 2, 3;
    std::vector<std::size_t> rows{0, 1, 2, 3};
    std::vector<double> t{5, 0, 0, 0};
    std::vector<std::size_t> attrs{0};
    TreeConfig cfg;
    cfg.min_node_count = 2;
    const auto s = best_split(rows, t, attrs, x, cfg);
    ASSERT_TRUE(s);
    EXPECT_DOUBLE_EQ(s->threshold, 1.5);
    cfg.min_node_count = 3;
    EXPECT_FALSE(best_split(rows, t, attrs, x, cfg));
    std::vector<double> flat{2, 2, 2, 2};
    cfg.min_node_count = 1;
    EXPECT_FALSE(best_split(rows, flat, attrs, x, cfg));
}

TEST(BestSplit, MatchesBruteForce) {
    Rng rng(2024);
    for (int inst = 0; inst < 100; ++inst) {
        const std::size_t n = 2 + uniform_index(rng, 49), k = 1 + uniform_index(rng, 5);
        Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            for (Eigen::Index j = 0; j < x.cols(); ++j)
                x(i, j) = inst % 2 ? std::round(10.0 * uniform01(rng)) : standard_normal(rng);
        std::vector<std::size_t> rows(n);
        std::iota(rows.begin(), rows.end(), 0);
        std::vector<double> t(n);
        for (auto& v : t) v = standard_normal(rng);
        std::vector<std::size_t> attrs(k);
        std::iota(attrs.begin(), attrs.end(), 0);
        TreeConfig cfg;
        cfg.min_node_count = 1 + uniform_index(rng, 3);
        const auto got = best_split(rows, t, attrs, x, cfg);
        const auto want = oracle::brute_force_split(rows, t, attrs, x, cfg.min_node_count, cfg.min_impurity);
        ASSERT_EQ(got.has_value(), want.has_value()) << "instance " << inst;
        if (!got) continue;
        EXPECT_EQ(got->attribute, want->attribute) << "instance " << inst;
        EXPECT_EQ(got->threshold, want->threshold) << "instance " << inst;
    }
}

TEST(GrowTree, ReachesRequestedLeavesAndExtractsNodeRules) {
    Rng data_rng(1);
    Matrix x(200, 3);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = standard_normal(data_rng);
    std::vector<std::size_t> rows(200);
    std::iota(rows.begin(), rows.end(), 0);
    std::vector<double> t(200);
    for (std::size_t i = 0; i < 200; ++i)
        t[i] = x(static_cast<Eigen::Index>(i), 0) > 0 ? 1.0 + 0.1 * x(static_cast<Eigen::Index>(i), 1) : -1.0;
    TreeConfig cfg;
    cfg.attr_sample_fraction = 1.0;
    Rng rng(7);
    const Tree tree = grow_tree(rows, t, 8, x, cfg, rng);
    EXPECT_EQ(tree.terminal_count(), 8u);
    const auto rules = tree.extract_rules();
    EXPECT_EQ(rules.size(), tree.nodes().size() - 1);
    // the first split separates on the informative attribute
    EXPECT_EQ(tree.nodes()[0].attribute, 0);

    // Each node's rule fires exactly on the rows routed through that node.
    std::vector<std::size_t> through(tree.nodes().size(), 0);
    for (std::size_t i = 0; i < 200; ++i) {
        int id = 0;
        ++through[0];
        while (tree.nodes()[static_cast<std::size_t>(id)].attribute >= 0) {
            const auto& nd = tree.nodes()[static_cast<std::size_t>(id)];
            id = x(static_cast<Eigen::Index>(i), nd.attribute) < nd.threshold ? nd.left : nd.right;
            ++through[static_cast<std::size_t>(id)];
        }
    }
    for (std::size_t id = 1; id < tree.nodes().size(); ++id) {
        std::size_t fires = 0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) fires += rules[id - 1].evaluate(x.row(i));
        EXPECT_EQ(fires, through[id]);
        EXPECT_EQ(tree.nodes()[id].count, through[id]);
    }
}

TEST(GrowTree, SmallestLeafHonoursMinNodeCount) {
    Rng data_rng(3);
    Matrix x(60, 2);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = standard_normal(data_rng);
    std::vector<std::size_t> rows(60);
    std::iota(rows.begin(), rows.end(), 0);
    std::vector<double> t(60);
    for (auto& v : t) v = standard_normal(data_rng);
    TreeConfig cfg;
    cfg.min_node_count = 7;
    Rng rng(1);
    const Tree tree = grow_tree(rows, t, 100, x, cfg, rng);
    for (const auto& nd : tree.nodes()) EXPECT_GE(nd.count, 7u);
    EXPECT_LT(tree.terminal_count(), 100u);  // ran out of admissible splits
}

TEST(GrowTree, DeterministicForSeed) {
    Rng data_rng(5);
    Matrix x(80, 4);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = standard_normal(data_rng);
    std::vector<std::size_t> rows(80);
    std::iota(rows.begin(), rows.end(), 0);
    std::vector<double> t(80);
    for (auto& v : t) v = standard_normal(data_rng);
    TreeConfig cfg;
    Rng a(9), b(9);
    EXPECT_EQ(grow_tree(rows, t, 10, x, cfg, a).extract_rules(), grow_tree(rows, t, 10, x, cfg, b).extract_rules());
}
