#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rulens/dataset.hpp"
#include "rulens/loss.hpp"

namespace rulens {

struct Coefficients {
    double a0 = 0.0;
    Vector a;

    std::size_t nonzero_count() const {
        return static_cast<std::size_t>((a.array() != 0.0).count());
    }
};

struct PathStep {
    double parameter = 0.0;  // tau/iteration, lambda, mu or sigma
    double objective = 0.0;
    double risk = 0.0;
    std::size_t nonzeros = 0;
    Coefficients coefficients;
};

struct SolverReport {
    std::string solver;
    std::string parameter_name;
    std::vector<PathStep> steps;

    std::string to_csv() const {
        std::string out = "step," + parameter_name + ",objective,risk,nonzeros\n";
        char buf[160];
        for (std::size_t i = 0; i < steps.size(); ++i) {
            const auto& s = steps[i];
            std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g,%.10g,%zu\n", i, s.parameter, s.objective, s.risk,
                          s.nonzeros);
            out += buf;
        }
        return out;
    }
};

struct SolverResult {
    Coefficients coefficients;
    SolverReport report;
};

inline double fit_intercept(const Eigen::Ref<const Vector>& labels, LossKind kind) {
    return optimal_constant(kind, labels);
}

/// Least-squares problem in centered, unit-second-moment coordinates, shared
/// by the elastic net, FPC and SPG solvers so their objectives coincide.
///
/// Columns without variation get scale 0; their coefficients stay at zero.
/// Cross moments are cached, so every solver step costs O(K^2) rather than
/// O(NK).
struct StandardizedProblem {
    std::size_t n = 0;
    Vector col_mean;
    Vector col_scale;
    double y_mean = 0.0;
    Matrix gram;  // Xs^T Xs
    Vector xty;   // Xs^T (y - y_mean)
    double yty = 0.0;

    static StandardizedProblem build(const Matrix& x, const Eigen::Ref<const Vector>& y, bool standardize = true) {
        if (x.rows() != y.size()) throw UsageError("feature rows and labels differ in length");
        if (x.rows() == 0 || x.cols() == 0) throw UsageError("empty feature matrix");
        if (!x.allFinite()) throw DataError("feature matrix has non-finite entries");
        StandardizedProblem p;
        p.n = static_cast<std::size_t>(x.rows());
        const double nn = static_cast<double>(p.n);
        p.col_mean = x.colwise().mean().transpose();
        p.y_mean = y.mean();
        Matrix xs = x.rowwise() - p.col_mean.transpose();
        p.col_scale.resize(x.cols());
        for (Eigen::Index k = 0; k < x.cols(); ++k) {
            const double ss = xs.col(k).squaredNorm() / nn;
            const bool constant = (x.col(k).array() == x(0, k)).all();
            if (constant || ss <= 0.0) {
                p.col_scale[k] = 0.0;
                xs.col(k).setZero();
            } else {
                p.col_scale[k] = standardize ? std::sqrt(ss) : 1.0;
                xs.col(k) /= p.col_scale[k];
            }
        }
        const Vector yc = y.array() - p.y_mean;
        p.gram = Matrix::Zero(x.cols(), x.cols());
        p.gram.selfadjointView<Eigen::Lower>().rankUpdate(xs.transpose());
        p.gram.triangularView<Eigen::StrictlyUpper>() = p.gram.transpose();
        p.xty = xs.transpose() * yc;
        p.yty = yc.squaredNorm();
        return p;
    }

    Eigen::Index dim() const { return gram.rows(); }
    bool active(Eigen::Index k) const { return col_scale[k] > 0.0; }

    double rss(const Vector& b) const { return std::max(0.0, yty - 2.0 * b.dot(xty) + b.dot(gram * b)); }

    // (1/N)||Xb - y||^2 + lambda ||b||_1; the common lasso objective.
    double lasso_objective(const Vector& b, double lambda) const {
        return rss(b) / static_cast<double>(n) + lambda * b.lpNorm<1>();
    }

    Coefficients to_original(const Vector& b) const {
        Coefficients c;
        c.a = Vector::Zero(b.size());
        c.a0 = y_mean;
        for (Eigen::Index k = 0; k < b.size(); ++k) {
            if (!active(k) || b[k] == 0.0) continue;
            c.a[k] = b[k] / col_scale[k];
            c.a0 -= c.a[k] * col_mean[k];
        }
        return c;
    }

    Vector to_standardized(const Coefficients& c) const {
        return (c.a.array() * col_scale.array()).matrix();
    }
};

} // namespace rulens
