#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "rulens/solvers/common.hpp"
#include "rulens/solvers/prox.hpp"

namespace rulens {

struct ElasticNetOptions {
    double alpha = 1.0;
    double lambda_min = 1e-3;
    std::size_t n_steps = 100;
    double tolerance = 1e-7;  // max coefficient change per sweep
    std::size_t max_sweeps = 100000;
    bool standardize = true;

    void validate() const {
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw UsageError("alpha must lie in [0, 1]");
        if (!(lambda_min > 0.0)) throw UsageError("lambda_min must be positive");
        if (n_steps < 1) throw UsageError("n_steps must be at least 1");
    }
};

// (1/N)||Xb - y||^2 + lambda (alpha ||b||_1 + (1 - alpha) ||b||_2^2)
inline double elastic_net_objective(const StandardizedProblem& p, const Vector& b, double alpha, double lambda) {
    return p.rss(b) / static_cast<double>(p.n) + lambda * (alpha * b.lpNorm<1>() + (1.0 - alpha) * b.squaredNorm());
}

// Smallest lambda whose solution is all zero.
inline double elastic_net_lambda_max(const StandardizedProblem& p, double alpha) {
    return 2.0 * p.xty.lpNorm<Eigen::Infinity>() / (static_cast<double>(p.n) * std::max(alpha, 1e-3));
}

namespace detail {

// Minimizes the elastic net objective at fixed lambda by cyclic coordinate
// descent, warm-started from b. `corr` holds X^T y - G b and is kept in sync.
inline void coordinate_descent(const StandardizedProblem& p, double alpha, double lambda, const ElasticNetOptions& opt,
                               Vector& b, Vector& corr, std::vector<double>* sweep_objectives = nullptr) {
    const double nn = static_cast<double>(p.n);
    const double l1 = lambda * alpha / 2.0;
    const double l2 = lambda * (1.0 - alpha);
    const Eigen::Index k_total = p.dim();

    auto update = [&](Eigen::Index k) {
        if (!p.active(k)) return 0.0;
        const double gkk = p.gram(k, k);
        const double rho = (corr[k] + gkk * b[k]) / nn;
        const double next = soft_threshold(rho, l1) / (gkk / nn + l2);
        const double change = next - b[k];
        if (change != 0.0) {
            corr -= change * p.gram.col(k);
            b[k] = next;
        }
        return std::abs(change);
    };

    std::vector<Eigen::Index> active;
    for (std::size_t sweep = 0; sweep < opt.max_sweeps;) {
        double full_change = 0.0;
        for (Eigen::Index k = 0; k < k_total; ++k) full_change = std::max(full_change, update(k));
        ++sweep;
        if (sweep_objectives) sweep_objectives->push_back(elastic_net_objective(p, b, alpha, lambda));
        if (full_change < opt.tolerance) break;

        active.clear();
        for (Eigen::Index k = 0; k < k_total; ++k)
            if (b[k] != 0.0) active.push_back(k);
        while (sweep < opt.max_sweeps) {
            double change = 0.0;
            for (Eigen::Index k : active) change = std::max(change, update(k));
            ++sweep;
            if (sweep_objectives) sweep_objectives->push_back(elastic_net_objective(p, b, alpha, lambda));
            if (change < opt.tolerance) break;
        }
    }
}

} // namespace detail

/// Elastic net by coordinate descent along a geometric lambda path from
/// lambda_max down to lambda_min, each step warm-started from the previous.
inline SolverResult cd_elastic_net(const StandardizedProblem& p, const ElasticNetOptions& opt = {}) {
    opt.validate();
    SolverResult result;
    result.report.solver = "cdnet";
    result.report.parameter_name = "lambda";

    const double lambda_max = elastic_net_lambda_max(p, opt.alpha);
    std::vector<double> lambdas;
    if (opt.lambda_min >= lambda_max || opt.n_steps == 1) {
        lambdas.push_back(opt.lambda_min);
    } else {
        const double ratio = opt.lambda_min / lambda_max;
        for (std::size_t s = 0; s < opt.n_steps; ++s)
            lambdas.push_back(lambda_max * std::pow(ratio, static_cast<double>(s) / static_cast<double>(opt.n_steps - 1)));
        lambdas.back() = opt.lambda_min;
    }

    Vector b = Vector::Zero(p.dim());
    Vector corr = p.xty;
    for (double lambda : lambdas) {
        detail::coordinate_descent(p, opt.alpha, lambda, opt, b, corr);
        PathStep step;
        step.parameter = lambda;
        step.objective = elastic_net_objective(p, b, opt.alpha, lambda);
        step.risk = p.rss(b) / static_cast<double>(p.n);
        step.coefficients = p.to_original(b);
        step.nonzeros = step.coefficients.nonzero_count();
        result.report.steps.push_back(std::move(step));
    }
    result.coefficients = result.report.steps.back().coefficients;
    return result;
}

inline SolverResult cd_elastic_net(const Matrix& x, const Vector& y, const ElasticNetOptions& opt = {}) {
    return cd_elastic_net(StandardizedProblem::build(x, y, opt.standardize), opt);
}

} // namespace rulens
