#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rulens/loss.hpp"
#include "rulens/solvers/common.hpp"

namespace rulens {

struct PathbuildOptions {
    double tau = 0.0;      // fraction of max |g| a coordinate needs to move
    double delta = 0.01;   // step scale
    std::size_t max_iter = 5000;
    double grad_tolerance = 1e-6;
    std::size_t report_every = 100;

    void validate() const {
        if (!(tau >= 0.0 && tau <= 1.0)) throw UsageError("tau must lie in [0, 1]");
        if (!(delta > 0.0)) throw UsageError("delta must be positive");
    }
};

/// Negative risk gradient under squared ramp loss, maintained incrementally.
///
/// With v_i = I(|F_i| < 1) and u(p, q) = (2/N) sum_i p_i q_i v_i the gradient
/// is g_k = u(y, x_k) - a0 u(1, x_k) - sum_j a_j u(x_j, x_k). The state caches
/// both u vectors and the K x K matrix u(x_j, x_k). A step whose indicators
/// stay fixed costs one column of the cache per moved coordinate; rows whose
/// indicator flips (z_i = +1 turning on, -1 turning off) add a rank-one
/// correction to the cache and to g.
class PathbuildState {
public:
    PathbuildState(const Matrix& x, const Vector& y, double a0)
        : x_(x), y_(y), a0_(a0), n_(static_cast<double>(x.rows())) {
        if (x.rows() != y.size()) throw UsageError("pathbuild: feature rows and labels differ in length");
        const Eigen::Index k = x.cols();
        a_ = Vector::Zero(k);
        f_ = Vector::Constant(x.rows(), a0);
        v_.resize(static_cast<std::size_t>(x.rows()));
        z_.assign(static_cast<std::size_t>(x.rows()), 0);
        row_nonzeros_.resize(static_cast<std::size_t>(x.rows()));
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            for (Eigen::Index j = 0; j < k; ++j)
                if (x(i, j) != 0.0) row_nonzeros_[static_cast<std::size_t>(i)].push_back(j);

        Matrix weighted = x;
        Vector vy(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const bool on = std::abs(f_[i]) < 1.0;
            v_[static_cast<std::size_t>(i)] = on;
            if (!on) weighted.row(i).setZero();
            vy[i] = on ? y[i] : 0.0;
        }
        const double scale = 2.0 / n_;
        cross_ = Matrix::Zero(k, k);
        cross_.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose(), scale);
        cross_.triangularView<Eigen::StrictlyUpper>() = cross_.transpose();
        u_y_ = scale * (x.transpose() * vy);
        u_one_ = scale * weighted.colwise().sum().transpose();
        g_ = u_y_ - a0_ * u_one_;
    }

    const Vector& gradient() const { return g_; }
    const Vector& coefficients() const { return a_; }
    const Vector& scores() const { return f_; }
    double intercept() const { return a0_; }
    std::size_t last_flip_count() const { return last_flips_; }
    // z from the most recent step: -1 turned off, +1 turned on, 0 unchanged.
    const std::vector<int>& last_indicator_changes() const { return z_; }

    double risk() const { return rulens::risk(LossKind::squared_ramp, y_, f_); }

    /// Adds increments[(k, d_k)] to the coefficients and updates F, v, the
    /// caches and g without recomputing anything from scratch.
    void apply_step(std::span<const std::pair<Eigen::Index, double>> increments) {
        const double scale = 2.0 / n_;
        Vector f_old = f_;
        for (const auto& [k, d] : increments) {
            if (d == 0.0) continue;
            a_[k] += d;
            f_ += d * x_.col(k);
        }
        last_flips_ = 0;
        for (Eigen::Index i = 0; i < x_.rows(); ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const bool on = std::abs(f_[i]) < 1.0;
            z_[ui] = static_cast<int>(on) - static_cast<int>(v_[ui]);
            if (z_[ui] == 0) continue;
            ++last_flips_;
            v_[ui] = on;
            const double z = static_cast<double>(z_[ui]);
            const auto& nz = row_nonzeros_[ui];
            // Rank-one corrections for the observation entering/leaving the sums.
            const double residual_old = y_[i] - f_old[i];
            for (Eigen::Index k : nz) {
                const double xik = x_(i, k);
                g_[k] += scale * z * residual_old * xik;
                u_y_[k] += scale * z * y_[i] * xik;
                u_one_[k] += scale * z * xik;
                for (Eigen::Index j : nz) cross_(j, k) += scale * z * x_(i, j) * xik;
            }
        }
        for (const auto& [k, d] : increments)
            if (d != 0.0) g_ -= d * cross_.col(k);
    }

    // Gradient evaluated directly from the data, ignoring all caches.
    static Vector naive_gradient(const Matrix& x, const Vector& y, double a0, const Vector& a) {
        const Vector f = (x * a).array() + a0;
        Vector w(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i) w[i] = std::abs(f[i]) < 1.0 ? y[i] - f[i] : 0.0;
        return (2.0 / static_cast<double>(x.rows())) * (x.transpose() * w);
    }

private:
    const Matrix& x_;
    const Vector& y_;
    double a0_;
    double n_;
    Vector a_, f_, g_, u_y_, u_one_;
    Matrix cross_;
    std::vector<char> v_;
    std::vector<int> z_;
    std::vector<std::vector<Eigen::Index>> row_nonzeros_;
    std::size_t last_flips_ = 0;
};

/// Thresholded gradient descent under squared ramp loss.
///
/// Starts from a = 0 with the intercept fixed at its optimal constant. Each
/// iteration moves every coordinate with |g_k| >= tau * max|g| by delta * g_k.
/// Stops when the risk rises (returning the best iterate seen), when max|g|
/// drops below tolerance, or after max_iter iterations.
inline SolverResult pathbuild(const Matrix& x, const Vector& y, const PathbuildOptions& opt = {}) {
    opt.validate();
    if (x.cols() == 0 || (x.array() == 0.0).all()) throw DataError("pathbuild: feature matrix is all zero");
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y[i] != 1.0 && y[i] != -1.0) throw DataError("pathbuild needs labels in {-1,+1}");

    const double a0 = fit_intercept(y, LossKind::squared_ramp);
    PathbuildState state(x, y, a0);
    SolverResult result;
    result.report.solver = "pathbuild";
    result.report.parameter_name = "iteration";

    auto record = [&](std::size_t iter, const Vector& a, double r) {
        PathStep step;
        step.parameter = static_cast<double>(iter);
        step.risk = r;
        step.objective = r;
        step.coefficients = Coefficients{a0, a};
        step.nonzeros = step.coefficients.nonzero_count();
        result.report.steps.push_back(std::move(step));
    };

    double current_risk = state.risk();
    double best_risk = current_risk;
    Vector best_a = state.coefficients();
    std::size_t best_iter = 0;
    record(0, best_a, best_risk);

    std::vector<std::pair<Eigen::Index, double>> increments;
    for (std::size_t iter = 1; iter <= opt.max_iter; ++iter) {
        const Vector& g = state.gradient();
        const double gmax = g.lpNorm<Eigen::Infinity>();
        if (gmax < opt.grad_tolerance) break;
        increments.clear();
        const double cutoff = opt.tau * gmax;
        for (Eigen::Index k = 0; k < g.size(); ++k)
            if (std::abs(g[k]) >= cutoff && g[k] != 0.0) increments.emplace_back(k, opt.delta * g[k]);
        state.apply_step(increments);
        const double r = state.risk();
        if (r > current_risk) break;
        current_risk = r;
        if (r <= best_risk) {
            best_risk = r;
            best_a = state.coefficients();
            best_iter = iter;
        }
        if (opt.report_every && iter % opt.report_every == 0) record(iter, state.coefficients(), r);
    }
    if (result.report.steps.back().parameter != static_cast<double>(best_iter)) record(best_iter, best_a, best_risk);
    result.coefficients = Coefficients{a0, best_a};
    return result;
}

} // namespace rulens
