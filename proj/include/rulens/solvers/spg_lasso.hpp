#pragma once

#include <algorithm>
#include <cmath>
#include <deque>

#include "rulens/solvers/common.hpp"
#include "rulens/solvers/prox.hpp"

namespace rulens {

struct SpgOptions {
    double sigma = 1.0;
    std::size_t max_iter = 10000;
    double tolerance = 1e-6;         // projected gradient, inf-norm
    std::size_t line_search_memory = 1;
    double sufficient_decrease = 1e-4;
    bool standardize = true;

    void validate() const {
        if (!(sigma >= 0.0)) throw UsageError("sigma must be non-negative");
        if (line_search_memory < 1) throw UsageError("line search memory must be at least 1");
    }
};

struct SpgTrace {
    std::vector<double> objectives;  // f at every accepted iterate
    std::vector<double> l1_norms;
};

/// Least squares over the l1 ball: min ||Xb - y||_2 subject to ||b||_1 <= sigma,
/// in standardized coordinates. Spectral projected gradient: the search
/// direction is P(b - alpha g) - b with a Barzilai-Borwein alpha, followed by
/// an Armijo backtrack against the max of the last `line_search_memory`
/// objective values. With memory 1 the objective never increases.
inline SolverResult spg_lasso(const StandardizedProblem& p, const SpgOptions& opt = {}, SpgTrace* trace = nullptr) {
    opt.validate();
    const double nn = static_cast<double>(p.n);
    auto f = [&](const Vector& b) { return 0.5 * p.rss(b) / nn; };
    auto gradient = [&](const Vector& b) -> Vector { return (p.gram * b - p.xty) / nn; };

    Vector b = Vector::Zero(p.dim());
    Vector g = gradient(b);
    double fb = f(b);
    std::deque<double> recent{fb};
    double alpha = 1.0;
    {
        const double gnorm = g.lpNorm<Eigen::Infinity>();
        if (gnorm > 0.0) alpha = 1.0 / gnorm;
    }
    if (trace) {
        trace->objectives.push_back(fb);
        trace->l1_norms.push_back(b.lpNorm<1>());
    }

    for (std::size_t iter = 0; iter < opt.max_iter; ++iter) {
        const Vector pg = project_l1(b - g, opt.sigma) - b;
        if (pg.lpNorm<Eigen::Infinity>() < opt.tolerance) break;

        const Vector d = project_l1(b - alpha * g, opt.sigma) - b;
        const double gtd = g.dot(d);
        if (!(gtd < 0.0)) break;
        const double reference = *std::max_element(recent.begin(), recent.end());
        double lambda = 1.0;
        Vector next = b + d;
        double fnext = f(next);
        for (int bt = 0; bt < 60 && fnext > reference + opt.sufficient_decrease * lambda * gtd; ++bt) {
            const double trial = -0.5 * lambda * lambda * gtd / (fnext - fb - lambda * gtd);
            lambda = (trial >= 0.1 * lambda && trial <= 0.9 * lambda) ? trial : 0.5 * lambda;
            next = b + lambda * d;
            fnext = f(next);
        }
        if (fnext > reference) break;  // no acceptable step left at machine precision

        const Vector next_g = gradient(next);
        const Vector s = next - b;
        const Vector yv = next_g - g;
        const double sy = s.dot(yv);
        alpha = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-10, 1e10) : 1e10;
        b = next;
        g = next_g;
        fb = fnext;
        recent.push_back(fb);
        while (recent.size() > opt.line_search_memory) recent.pop_front();
        if (trace) {
            trace->objectives.push_back(fb);
            trace->l1_norms.push_back(b.lpNorm<1>());
        }
    }

    SolverResult result;
    result.report.solver = "spg";
    result.report.parameter_name = "sigma";
    PathStep step;
    step.parameter = opt.sigma;
    step.objective = std::sqrt(p.rss(b));
    step.risk = p.rss(b) / nn;
    step.coefficients = p.to_original(b);
    step.nonzeros = step.coefficients.nonzero_count();
    result.report.steps.push_back(step);
    result.coefficients = step.coefficients;
    return result;
}

inline SolverResult spg_lasso(const Matrix& x, const Vector& y, const SpgOptions& opt = {}, SpgTrace* trace = nullptr) {
    return spg_lasso(StandardizedProblem::build(x, y, opt.standardize), opt, trace);
}

} // namespace rulens
