#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "rulens/dataset.hpp"
#include "rulens/loss.hpp"
#include "rulens/random.hpp"
#include "rulens/rule.hpp"
#include "rulens/tree.hpp"

namespace rulens {

struct BoostConfig {
    std::size_t max_rules = 600;
    SubsampleSize eta{0.25};
    double nu = 0.01;  // shrinkage
    double residual_tolerance = 1e-6;
    std::size_t max_trees = 100000;
    TreeConfig tree{};
    LossKind loss = LossKind::squared_ramp;
    std::uint64_t seed = 0;

    void validate() const {
        if (max_rules < 1) throw UsageError("max_rules must be at least 1");
        if (!(nu >= 0.0 && nu <= 1.0)) throw UsageError("nu must lie in [0, 1]");
        if (std::isnan(residual_tolerance)) throw UsageError("residual_tolerance is NaN");
        tree.validate();
    }
};

// Per-iteration diagnostics of the boosting loop.
struct BoostTrace {
    std::vector<double> memory_risk;     // risk of F_m on all rows, index 0 is F_0
    std::vector<double> residual_norm;   // ||rho_m||_inf on the subsample
    std::vector<std::size_t> tree_sizes; // t_m drawn
    std::size_t trees = 0;
};

// Attributes with at least two distinct values; the others never split.
inline std::vector<std::size_t> varying_attributes(const Matrix& x) {
    std::vector<std::size_t> out;
    for (Eigen::Index c = 0; c < x.cols(); ++c)
        if ((x.col(c).array() != x(0, c)).any()) out.push_back(static_cast<std::size_t>(c));
    return out;
}

/// Gradient-boosted rule generation.
///
/// F_0 is the risk-minimizing constant. Iteration m draws the subsample and
/// t_m from an rng stream derived from (seed, m), fits a tree to the pseudo
/// residuals on the subsample, appends its node rules and moves the memory
/// F on all rows by nu * T_m. Stops once max_rules is reached (the last tree's
/// rules are truncated) or the residuals fall below tolerance.
inline RuleSet generate_rules(const Matrix& x, const Vector& labels, const BoostConfig& cfg,
                              BoostTrace* trace = nullptr) {
    cfg.validate();
    const auto n = static_cast<std::size_t>(x.rows());
    if (n == 0 || static_cast<std::size_t>(labels.size()) != n)
        throw DataError("rule generation needs matching non-empty observations and labels");
    for (Eigen::Index i = 0; i < labels.size(); ++i)
        if (labels[i] != 1.0 && labels[i] != -1.0) throw DataError("rule generation needs labels in {-1,+1}");
    if ((labels.array() == labels[0]).all()) throw DataError("all labels are equal; nothing to learn");

    const auto pool = varying_attributes(x);
    Vector memory = Vector::Constant(static_cast<Eigen::Index>(n), optimal_constant(cfg.loss, labels));
    if (trace) {
        *trace = {};
        trace->memory_risk.push_back(risk(cfg.loss, labels, memory));
    }

    RuleSet out;
    if (pool.empty()) throw DataError("every attribute is constant; no rules can be generated");
    std::vector<double> targets;
    for (std::size_t m = 0; m < cfg.max_trees && out.rules.size() < cfg.max_rules; ++m) {
        Rng rng(derive_seed(cfg.seed, m));
        const auto rows = subsample(n, cfg.eta, rng);
        const std::size_t leaves = sample_tree_size(cfg.tree.mean_leaves, rng);

        targets.resize(rows.size());
        double norm = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto r = static_cast<Eigen::Index>(rows[i]);
            targets[i] = negative_gradient(cfg.loss, labels[r], memory[r]);
            norm = std::max(norm, std::abs(targets[i]));
        }
        if (trace) trace->residual_norm.push_back(norm);
        if (norm < cfg.residual_tolerance) break;

        const Tree tree = grow_tree(rows, targets, leaves, x, cfg.tree, rng, pool);
        for (auto& r : tree.extract_rules()) {
            if (out.rules.size() >= cfg.max_rules) break;
            out.rules.push_back(std::move(r));
        }
        if (cfg.nu > 0.0)
            for (Eigen::Index i = 0; i < x.rows(); ++i) memory[i] += cfg.nu * tree.predict(x.row(i));
        if (trace) {
            ++trace->trees;
            trace->tree_sizes.push_back(leaves);
            trace->memory_risk.push_back(risk(cfg.loss, labels, memory));
        }
    }
    if (out.rules.empty()) throw DataError("rule generation produced no rules");
    return out;
}

inline RuleSet generate_rules(const Dataset& d, const BoostConfig& cfg, BoostTrace* trace = nullptr) {
    if (d.classes() != 2) throw DataError("rule generation needs a binary dataset");
    return generate_rules(d.observations, d.signed_labels(), cfg, trace);
}

} // namespace rulens
