#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "rulens/error.hpp"

namespace rulens {

// Proximal operator of gamma*|.|: sign(z) * max(|z| - gamma, 0).
inline double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

/// Euclidean projection onto the l1 ball of radius sigma. Sort-based: finds
/// theta with sum_i max(|v_i| - theta, 0) = sigma.
inline Eigen::VectorXd project_l1(const Eigen::Ref<const Eigen::VectorXd>& v, double sigma) {
    if (!(sigma >= 0.0)) throw UsageError("project_l1: sigma must be non-negative");
    if (v.lpNorm<1>() <= sigma) return v;
    if (sigma == 0.0) return Eigen::VectorXd::Zero(v.size());
    std::vector<double> mags(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(v[i]);
    std::sort(mags.begin(), mags.end(), std::greater<>());
    double cumulative = 0.0, theta = 0.0;
    for (std::size_t j = 0; j < mags.size(); ++j) {
        cumulative += mags[j];
        const double candidate = (cumulative - sigma) / static_cast<double>(j + 1);
        if (j + 1 == mags.size() || mags[j + 1] <= candidate) {
            theta = candidate;
            break;
        }
    }
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = soft_threshold(v[i], theta);
    return out;
}

} // namespace rulens
