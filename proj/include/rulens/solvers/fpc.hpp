#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

#include "rulens/solvers/common.hpp"
#include "rulens/solvers/prox.hpp"

namespace rulens {

struct FpcOptions {
    double mu_max = 1.0;
    std::size_t n_steps = 13;
    double eta = 0.99;            // mu_0 = eta / ||X^T y||_inf
    double tolerance = 1e-7;      // iterate change, relative to max(1, ||b||_inf)
    std::size_t max_iter = 20000; // per continuation stage
    bool barzilai_borwein = true;
    std::size_t nonmonotone_memory = 5;
    bool standardize = true;

    void validate() const {
        if (!(mu_max > 0.0)) throw UsageError("mu_max must be positive");
        if (n_steps < 1) throw UsageError("n_steps must be at least 1");
        if (!(eta > 0.0)) throw UsageError("eta must be positive");
    }
};

// ||b||_1 + (mu/2) ||Xb - y||^2
inline double fpc_objective(const StandardizedProblem& p, const Vector& b, double mu) {
    return b.lpNorm<1>() + 0.5 * mu * p.rss(b);
}

inline double fpc_initial_mu(const StandardizedProblem& p, double eta) {
    const double bound = p.xty.lpNorm<Eigen::Infinity>();
    return bound > 0.0 ? eta / bound : 1.0;
}

namespace detail {

inline Vector shrink(const Vector& v, double threshold) {
    Vector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = soft_threshold(v[i], threshold);
    return out;
}

inline double largest_eigenvalue(const Matrix& g) {
    if (g.rows() == 0) return 0.0;
    Vector v = Vector::Ones(g.rows()).normalized();
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
        const Vector w = g * v;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        const double next = v.dot(w);
        v = w / norm;
        if (std::abs(next - lambda) <= 1e-10 * std::abs(next)) { lambda = next; break; }
        lambda = next;
    }
    return lambda;
}

// Fixed-point iterations b <- shrink(b - t * grad H(b), t / mu) with
// H = (1/2)||Xb - y||^2. Barzilai-Borwein step lengths are accepted when the
// objective stays below the recent maximum; otherwise the step backtracks
// from 1/L until the quadratic upper bound holds.
inline void fpc_stage(const StandardizedProblem& p, double mu, double lipschitz, const FpcOptions& opt, Vector& b) {
    Vector grad = p.gram * b - p.xty;
    double objective = fpc_objective(p, b, mu);
    std::deque<double> recent{objective};
    double step = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;
    const double base_step = step;

    for (std::size_t iter = 0; iter < opt.max_iter; ++iter) {
        Vector next = shrink(b - step * grad, step / mu);
        double next_objective = fpc_objective(p, next, mu);
        const double reference = *std::max_element(recent.begin(), recent.end());
        if (!(next_objective <= reference)) {
            double t = base_step;
            const double h = 0.5 * p.rss(b);
            for (int bt = 0; bt < 60; ++bt) {
                next = shrink(b - t * grad, t / mu);
                const Vector d = next - b;
                const double h_next = 0.5 * p.rss(next);
                if (h_next <= h + grad.dot(d) + d.squaredNorm() / (2.0 * t) + 1e-12 * std::abs(h)) break;
                t *= 0.5;
            }
            next_objective = fpc_objective(p, next, mu);
        }
        const Vector s = next - b;
        const Vector next_grad = p.gram * next - p.xty;
        const double change = s.lpNorm<Eigen::Infinity>();
        b = std::move(next);
        objective = next_objective;
        recent.push_back(objective);
        while (recent.size() > std::max<std::size_t>(1, opt.nonmonotone_memory)) recent.pop_front();
        if (change < opt.tolerance * std::max(1.0, b.lpNorm<Eigen::Infinity>())) break;

        if (opt.barzilai_borwein) {
            const double sy = s.dot(next_grad - grad);
            step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, base_step * 1e-3, base_step * 1e3) : base_step;
        } else {
            step = base_step;
        }
        grad = next_grad;
    }
}

} // namespace detail

/// Fixed point continuation for min ||b||_1 + (mu/2)||Xb - y||^2. mu grows
/// geometrically from eta/||X^T y||_inf to mu_max over n_steps stages, each
/// warm-started from the previous solution.
inline SolverResult fpc(const StandardizedProblem& p, const FpcOptions& opt = {}) {
    opt.validate();
    SolverResult result;
    result.report.solver = "fpc";
    result.report.parameter_name = "mu";

    const double mu0 = fpc_initial_mu(p, opt.eta);
    std::vector<double> mus;
    if (opt.mu_max <= mu0 || opt.n_steps == 1) {
        mus.push_back(opt.mu_max);
    } else {
        const double ratio = opt.mu_max / mu0;
        for (std::size_t s = 0; s < opt.n_steps; ++s)
            mus.push_back(mu0 * std::pow(ratio, static_cast<double>(s) / static_cast<double>(opt.n_steps - 1)));
        mus.back() = opt.mu_max;
    }

    const double lipschitz = 1.01 * detail::largest_eigenvalue(p.gram);
    Vector b = Vector::Zero(p.dim());
    for (double mu : mus) {
        detail::fpc_stage(p, mu, lipschitz, opt, b);
        PathStep step;
        step.parameter = mu;
        step.objective = fpc_objective(p, b, mu);
        step.risk = p.rss(b) / static_cast<double>(p.n);
        step.coefficients = p.to_original(b);
        step.nonzeros = step.coefficients.nonzero_count();
        result.report.steps.push_back(std::move(step));
    }
    result.coefficients = result.report.steps.back().coefficients;
    return result;
}

inline SolverResult fpc(const Matrix& x, const Vector& y, const FpcOptions& opt = {}) {
    return fpc(StandardizedProblem::build(x, y, opt.standardize), opt);
}

} // namespace rulens
