#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "rulens/dataset.hpp"

namespace rulens {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Half-open interval [lo, hi) on one attribute.
struct Constraint {
    std::size_t attribute = 0;
    double lo = -kInf;
    double hi = kInf;

    bool contains(double x) const { return x >= lo && x < hi; }
    friend bool operator==(const Constraint&, const Constraint&) = default;
};

/// Conjunction of interval constraints, at most one per attribute, sorted by
/// attribute index. An empty rule is true everywhere.
class Rule {
public:
    Rule() = default;

    // Intersects [lo, hi) into the constraint on `attribute`.
    Rule& restrict(std::size_t attribute, double lo, double hi) {
        auto it = std::lower_bound(constraints_.begin(), constraints_.end(), attribute,
                                   [](const Constraint& c, std::size_t a) { return c.attribute < a; });
        if (it == constraints_.end() || it->attribute != attribute)
            it = constraints_.insert(it, Constraint{attribute, -kInf, kInf});
        it->lo = std::max(it->lo, lo);
        it->hi = std::min(it->hi, hi);
        if (!(it->lo < it->hi)) throw UsageError("rule constraint has an empty interval");
        return *this;
    }
    Rule& below(std::size_t attribute, double threshold) { return restrict(attribute, -kInf, threshold); }
    Rule& at_least(std::size_t attribute, double threshold) { return restrict(attribute, threshold, kInf); }

    const std::vector<Constraint>& constraints() const { return constraints_; }
    bool empty() const { return constraints_.empty(); }

    template <class Row>
    bool evaluate(const Row& x) const {
        for (const auto& c : constraints_)
            if (!c.contains(x[static_cast<Eigen::Index>(c.attribute)])) return false;
        return true;
    }

    std::string describe(const std::vector<std::string>& names = {}) const {
        if (constraints_.empty()) return "(always)";
        std::string out;
        for (const auto& c : constraints_) {
            if (!out.empty()) out += " & ";
            const std::string name =
                c.attribute < names.size() ? names[c.attribute] : "x" + std::to_string(c.attribute + 1);
            if (std::isfinite(c.lo) && std::isfinite(c.hi))
                out += format_number(c.lo) + " <= " + name + " < " + format_number(c.hi);
            else if (std::isfinite(c.lo))
                out += name + " >= " + format_number(c.lo);
            else
                out += name + " < " + format_number(c.hi);
        }
        return out;
    }

    friend bool operator==(const Rule&, const Rule&) = default;

private:
    static std::string format_number(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", v);
        return buf;
    }

    std::vector<Constraint> constraints_;
};

/// Rules in generation order followed by optional linear terms.
struct RuleSet {
    std::vector<Rule> rules;
    std::vector<std::size_t> linear_terms;  // attribute indices

    std::size_t size() const { return rules.size() + linear_terms.size(); }
    bool include_linear() const { return !linear_terms.empty(); }

    static std::vector<std::size_t> all_attributes(std::size_t k) {
        std::vector<std::size_t> out(k);
        for (std::size_t i = 0; i < k; ++i) out[i] = i;
        return out;
    }

    // Attributes referenced by term `index` (rule or linear term).
    std::vector<std::size_t> term_attributes(std::size_t index) const {
        if (index < rules.size()) {
            std::vector<std::size_t> out;
            for (const auto& c : rules[index].constraints()) out.push_back(c.attribute);
            return out;
        }
        return {linear_terms.at(index - rules.size())};
    }

    std::string describe_term(std::size_t index, const std::vector<std::string>& names = {}) const {
        if (index < rules.size()) return rules[index].describe(names);
        const auto a = linear_terms.at(index - rules.size());
        return "linear(" + (a < names.size() ? names[a] : "x" + std::to_string(a + 1)) + ")";
    }

    friend bool operator==(const RuleSet&, const RuleSet&) = default;
};

// Column k is rule k evaluated on every row (0/1), followed by the linear
// terms' attribute values.
inline Matrix build_feature_matrix(const RuleSet& rs, const Matrix& observations) {
    const Eigen::Index n = observations.rows();
    Matrix f(n, static_cast<Eigen::Index>(rs.size()));
    for (std::size_t k = 0; k < rs.rules.size(); ++k)
        for (Eigen::Index i = 0; i < n; ++i)
            f(i, static_cast<Eigen::Index>(k)) = rs.rules[k].evaluate(observations.row(i)) ? 1.0 : 0.0;
    for (std::size_t j = 0; j < rs.linear_terms.size(); ++j) {
        const auto a = rs.linear_terms[j];
        if (a >= static_cast<std::size_t>(observations.cols()))
            throw DataError("linear term references a missing attribute");
        f.col(static_cast<Eigen::Index>(rs.rules.size() + j)) = observations.col(static_cast<Eigen::Index>(a));
    }
    return f;
}

inline Matrix build_feature_matrix(const RuleSet& rs, const Dataset& d) {
    return build_feature_matrix(rs, d.observations);
}

// Fraction of rows on which each rule fires.
inline std::vector<double> rule_supports(const RuleSet& rs, const Matrix& observations) {
    std::vector<double> out;
    out.reserve(rs.rules.size());
    for (const auto& r : rs.rules) {
        std::size_t hits = 0;
        for (Eigen::Index i = 0; i < observations.rows(); ++i) hits += r.evaluate(observations.row(i));
        out.push_back(observations.rows() ? static_cast<double>(hits) / static_cast<double>(observations.rows()) : 0.0);
    }
    return out;
}

struct DedupeResult {
    RuleSet rules;
    std::size_t removed = 0;
};

// Drops rules whose constraint lists repeat an earlier rule exactly.
inline DedupeResult dedupe(const RuleSet& rs) {
    DedupeResult out;
    out.rules.linear_terms = rs.linear_terms;
    std::vector<const Rule*> sorted;
    for (const auto& r : rs.rules) {
        const auto less = [](const Rule* a, const Rule* b) {
            const auto& ca = a->constraints();
            const auto& cb = b->constraints();
            return std::lexicographical_compare(
                ca.begin(), ca.end(), cb.begin(), cb.end(), [](const Constraint& x, const Constraint& y) {
                    return std::tie(x.attribute, x.lo, x.hi) < std::tie(y.attribute, y.lo, y.hi);
                });
        };
        const auto it = std::lower_bound(sorted.begin(), sorted.end(), &r, less);
        if (it != sorted.end() && **it == r) {
            ++out.removed;
            continue;
        }
        sorted.insert(it, &r);
        out.rules.rules.push_back(r);
    }
    return out;
}

} // namespace rulens
