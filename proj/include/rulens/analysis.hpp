#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "rulens/model.hpp"

namespace rulens {

/// Binary confusion counts; +1 is positive. Rates whose denominator class is
/// absent from the labels are left empty.
struct Metrics {
    std::size_t true_positives = 0, true_negatives = 0, false_positives = 0, false_negatives = 0;
    double error_rate = 0.0;
    std::optional<double> false_positive_rate;
    std::optional<double> false_negative_rate;

    std::size_t count() const { return true_positives + true_negatives + false_positives + false_negatives; }
};

inline Metrics confusion_metrics(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size()) throw UsageError("predictions and labels differ in length");
    Metrics m;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool pred = predictions[i] > 0, truth = labels[i] > 0;
        if (truth) (pred ? m.true_positives : m.false_negatives)++;
        else (pred ? m.false_positives : m.true_negatives)++;
    }
    const auto n = m.count();
    const auto negatives = m.false_positives + m.true_negatives;
    const auto positives = m.true_positives + m.false_negatives;
    if (n) m.error_rate = static_cast<double>(m.false_positives + m.false_negatives) / static_cast<double>(n);
    if (negatives) m.false_positive_rate = static_cast<double>(m.false_positives) / static_cast<double>(negatives);
    if (positives) m.false_negative_rate = static_cast<double>(m.false_negatives) / static_cast<double>(positives);
    return m;
}

// ---------------------------------------------------------------------------
// Rule importance

// Identifies a rule universe so rankings from different rule sets are not
// mixed. FNV-1a over the constraint bytes.
inline std::uint64_t ruleset_fingerprint(const RuleSet& rs) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](const void* p, std::size_t len) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    };
    for (const auto& r : rs.rules) {
        const std::uint64_t count = r.constraints().size();
        mix(&count, sizeof count);
        for (const auto& c : r.constraints()) {
            const std::uint64_t a = c.attribute;
            mix(&a, sizeof a);
            mix(&c.lo, sizeof c.lo);
            mix(&c.hi, sizeof c.hi);
        }
    }
    const std::uint64_t marker = ~0ULL;
    mix(&marker, sizeof marker);
    for (auto a : rs.linear_terms) {
        const std::uint64_t v = a;
        mix(&v, sizeof v);
    }
    return h;
}

struct RankedTerm {
    std::size_t index = 0;  // rule index, or rules.size() + j for linear term j
    double importance = 0.0;  // |a_k|
    double coefficient = 0.0;
    std::string description;
};

struct RuleRanking {
    std::vector<RankedTerm> entries;
    std::uint64_t universe = 0;
};

/// Top `top_k` terms by |a_k|, zeros excluded, ties to the lower index.
inline RuleRanking rank_rules(const RuleSet& rs, const Coefficients& c, std::size_t top_k,
                              const std::vector<std::string>& names = {}) {
    if (top_k < 1) throw UsageError("top_k must be at least 1");
    if (static_cast<std::size_t>(c.a.size()) != rs.size()) throw UsageError("coefficients do not match the rule set");
    std::vector<std::size_t> order;
    for (Eigen::Index k = 0; k < c.a.size(); ++k)
        if (c.a[k] != 0.0) order.push_back(static_cast<std::size_t>(k));
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return std::abs(c.a[static_cast<Eigen::Index>(i)]) > std::abs(c.a[static_cast<Eigen::Index>(j)]);
    });
    if (order.size() > top_k) order.resize(top_k);
    RuleRanking out;
    out.universe = ruleset_fingerprint(rs);
    for (auto k : order) {
        const double a = c.a[static_cast<Eigen::Index>(k)];
        out.entries.push_back({k, std::abs(a), a, rs.describe_term(k, names)});
    }
    return out;
}

// Rule thresholds mapped back from standardized to original attribute units.
inline RuleSet original_units(const RuleSet& rs, const ScalingParams& scaling) {
    RuleSet out;
    out.linear_terms = rs.linear_terms;
    for (const auto& r : rs.rules) {
        Rule u;
        for (const auto& c : r.constraints()) {
            const auto a = static_cast<Eigen::Index>(c.attribute);
            u.restrict(c.attribute, c.lo * scaling.stds[a] + scaling.means[a], c.hi * scaling.stds[a] + scaling.means[a]);
        }
        out.rules.push_back(std::move(u));
    }
    return out;
}

// Descriptions are in original units; the universe is the model's own rule set.
inline RuleRanking rank_rules(const EnsembleModel& m, std::size_t top_k = 20) {
    RuleRanking r = rank_rules(m.ruleset, m.coefficients, top_k, m.attribute_names);
    const RuleSet shown = original_units(m.ruleset, m.scaling);
    for (auto& e : r.entries) e.description = shown.describe_term(e.index, m.attribute_names);
    return r;
}

// Text table: rank, importance, rule.
inline std::string format_ranking(const RuleRanking& r) {
    std::string out = "rank  importance  rule\n";
    char buf[64];
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%4zu  %10.4f  ", i + 1, r.entries[i].importance);
        out += buf;
        out += r.entries[i].description;
        out += '\n';
    }
    return out;
}

struct VoteTally {
    std::map<std::size_t, std::size_t> votes;  // term index -> number of rankings it appears in
    std::size_t context = 0;                    // number of rankings
    std::uint64_t universe = 0;
};

inline VoteTally vote_rules(std::span<const RuleRanking> rankings) {
    VoteTally t;
    t.context = rankings.size();
    if (rankings.empty()) return t;
    t.universe = rankings.front().universe;
    for (const auto& r : rankings) {
        if (r.universe != t.universe) throw DataError("rankings come from different rule sets");
        std::set<std::size_t> seen;
        for (const auto& e : r.entries)
            if (seen.insert(e.index).second) ++t.votes[e.index];
    }
    return t;
}

inline std::string tally_csv(const VoteTally& t, const RuleSet& rs, const std::vector<std::string>& names = {}) {
    std::string out = "term,votes,rule\n";
    for (const auto& [k, v] : t.votes)
        out += std::to_string(k) + "," + std::to_string(v) + ",\"" + rs.describe_term(k, names) + "\"\n";
    return out;
}

/// Terms that survived voting in one repetition, with their universe.
struct VotedTerms {
    RuleSet ruleset;
    std::vector<std::size_t> terms;
};

inline VotedTerms voted_terms(const VoteTally& t, const RuleSet& rs, std::size_t min_votes = 1) {
    if (t.context && t.universe != ruleset_fingerprint(rs)) throw DataError("tally does not belong to this rule set");
    VotedTerms out;
    out.ruleset = rs;
    for (const auto& [k, v] : t.votes)
        if (v >= min_votes) out.terms.push_back(k);
    return out;
}

/// Attributes constrained by voted terms in at least `min_votes`
/// repetitions. Each element of `repetitions` lists one repetition's voted
/// term sets (one per class for OVA); their attributes are pooled.
inline std::vector<std::size_t> select_attributes(std::span<const std::vector<VotedTerms>> repetitions,
                                                  std::size_t min_votes) {
    if (min_votes < 1) throw UsageError("min_votes must be at least 1");
    std::map<std::size_t, std::size_t> counts;
    for (const auto& rep : repetitions) {
        std::set<std::size_t> attrs;
        for (const auto& vt : rep)
            for (auto k : vt.terms)
                for (auto a : vt.ruleset.term_attributes(k)) attrs.insert(a);
        for (auto a : attrs) ++counts[a];
    }
    std::vector<std::size_t> out;
    for (const auto& [a, c] : counts)
        if (c >= min_votes) out.push_back(a);
    return out;
}

inline std::vector<std::size_t> select_attributes(std::span<const VotedTerms> repetitions, std::size_t min_votes) {
    std::vector<std::vector<VotedTerms>> wrapped;
    for (const auto& r : repetitions) wrapped.push_back({r});
    return select_attributes(std::span<const std::vector<VotedTerms>>(wrapped), min_votes);
}

} // namespace rulens
