#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "rulens/error.hpp"

namespace rulens {

enum class LossKind { squared_error, squared_ramp };

inline std::string_view to_string(LossKind kind) {
    return kind == LossKind::squared_ramp ? "squared_ramp" : "squared_error";
}

inline LossKind loss_from_string(std::string_view name) {
    if (name == "squared_ramp") return LossKind::squared_ramp;
    if (name == "squared_error") return LossKind::squared_error;
    throw DataError("unknown loss kind: " + std::string(name));
}

// Clamp to [-1, 1].
inline double ramp(double f) { return std::max(-1.0, std::min(1.0, f)); }

inline double loss(LossKind kind, double y, double f) {
    const double r = y - (kind == LossKind::squared_ramp ? ramp(f) : f);
    return r * r;
}

// -dL/dF. The ramp indicator is strict, so |F| = 1 counts as saturated.
inline double negative_gradient(LossKind kind, double y, double f) {
    if (kind == LossKind::squared_ramp) return std::abs(f) < 1.0 ? 2.0 * (y - f) : 0.0;
    return 2.0 * (y - f);
}

inline double risk(LossKind kind, const Eigen::Ref<const Eigen::VectorXd>& labels,
                   const Eigen::Ref<const Eigen::VectorXd>& scores) {
    if (labels.size() != scores.size()) throw UsageError("risk: labels and scores differ in length");
    if (labels.size() == 0) throw UsageError("risk: empty input");
    double total = 0.0;
    for (Eigen::Index i = 0; i < labels.size(); ++i) total += loss(kind, labels[i], scores[i]);
    return total / static_cast<double>(labels.size());
}

inline Eigen::VectorXd pseudo_residuals(LossKind kind, const Eigen::Ref<const Eigen::VectorXd>& labels,
                                        const Eigen::Ref<const Eigen::VectorXd>& memory_scores) {
    if (labels.size() != memory_scores.size())
        throw UsageError("pseudo_residuals: labels and scores differ in length");
    Eigen::VectorXd rho(labels.size());
    for (Eigen::Index i = 0; i < labels.size(); ++i)
        rho[i] = negative_gradient(kind, labels[i], memory_scores[i]);
    return rho;
}

// argmin_c sum_i L(y_i, c). For either loss on labels in [-1,1] this is the mean.
inline double optimal_constant(LossKind kind, const Eigen::Ref<const Eigen::VectorXd>& labels) {
    if (labels.size() == 0) throw UsageError("optimal_constant: empty labels");
    const double mean = labels.mean();
    return kind == LossKind::squared_ramp ? ramp(mean) : mean;
}

} // namespace rulens
