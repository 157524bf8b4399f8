#include <gtest/gtest.h>

#include "rulens/rule.hpp"

using namespace rulens;

TEST(Rule, EvaluatesHalfOpenIntervals) {
    Rule r;
    r.at_least(0, 1.0).below(2, 5.0);
    Eigen::VectorXd x(3);
    x << 1.0, 100.0, 4.999;
    EXPECT_TRUE(r.evaluate(x));
    x[2] = 5.0;
    EXPECT_FALSE(r.evaluate(x));
    x << 0.999, 0.0, 0.0;
    EXPECT_FALSE(r.evaluate(x));
    EXPECT_TRUE(Rule{}.evaluate(x));
}

TEST(Rule, RepeatedAttributeIntersects) {
    Rule r;
    r.below(1, 3.0).at_least(1, -1.0).below(1, 2.0);
    ASSERT_EQ(r.constraints().size(), 1u);
    EXPECT_DOUBLE_EQ(r.constraints()[0].lo, -1.0);
    EXPECT_DOUBLE_EQ(r.constraints()[0].hi, 2.0);
    EXPECT_THROW(r.at_least(1, 2.0), UsageError);
}

TEST(Rule, ConstraintsSortedByAttribute) {
    Rule r;
    r.below(4, 1.0).below(0, 1.0).at_least(2, 0.0);
    std::vector<std::size_t> attrs;
    for (const auto& c : r.constraints()) attrs.push_back(c.attribute);
    EXPECT_EQ(attrs, (std::vector<std::size_t>{0, 2, 4}));
}

TEST(Rule, Describe) {
    Rule r;
    r.at_least(1, -0.315).restrict(0, 0.25, 1.5);
    EXPECT_EQ(r.describe(), "0.250 <= x1 < 1.500 & x2 >= -0.315");
    EXPECT_EQ(r.describe({"mag", "color"}), "0.250 <= mag < 1.500 & color >= -0.315");
    EXPECT_EQ(Rule{}.describe(), "(always)");
}

TEST(RuleSet, FeatureMatrixLayout) {
    RuleSet rs;
    rs.rules.push_back(Rule{}.below(0, 0.0));
    rs.rules.push_back(Rule{}.at_least(1, 1.0));
    rs.linear_terms = {1};
    Matrix x(3, 2);
    x << -1, 2, 1, 0, -2, 1;
    const Matrix f = build_feature_matrix(rs, x);
    Matrix expected(3, 3);
    expected << 1, 1, 2, 0, 0, 0, 1, 1, 1;
    EXPECT_EQ(f, expected);
    EXPECT_EQ(rs.term_attributes(1), (std::vector<std::size_t>{1}));
    EXPECT_EQ(rs.term_attributes(2), (std::vector<std::size_t>{1}));
    EXPECT_EQ(rs.describe_term(2, {"a", "b"}), "linear(b)");
    const auto support = rule_supports(rs, x);
    EXPECT_DOUBLE_EQ(support[0], 2.0 / 3.0);
}

TEST(RuleSet, DedupeKeepsFirstOccurrence) {
    RuleSet rs;
    rs.rules.push_back(Rule{}.below(0, 0.0));
    rs.rules.push_back(Rule{}.at_least(1, 1.0));
    rs.rules.push_back(Rule{}.below(0, 0.0));
    rs.rules.push_back(Rule{}.below(0, 0.5));
    const auto d = dedupe(rs);
    EXPECT_EQ(d.removed, 1u);
    ASSERT_EQ(d.rules.rules.size(), 3u);
    EXPECT_EQ(d.rules.rules[0], rs.rules[0]);
    EXPECT_EQ(d.rules.rules[1], rs.rules[1]);
    EXPECT_EQ(d.rules.rules[2], rs.rules[3]);
}
