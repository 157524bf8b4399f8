#include <gtest/gtest.h>

#include "rulens/solvers.hpp"
#include "support/oracles.hpp"

using namespace rulens;

TEST(Prox, SoftThresholdExamples) {
    EXPECT_DOUBLE_EQ(soft_threshold(3.0, 1.0), 2.0);
    EXPECT_DOUBLE_EQ(soft_threshold(-0.5, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(soft_threshold(-2.5, 1.0), -1.5);
    EXPECT_DOUBLE_EQ(soft_threshold(1.0, 1.0), 0.0);
}

TEST(Prox, SoftThresholdMatchesGridSearch) {
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
        const double z = 16.0 * uniform01(rng) - 8.0, gamma = 3.0 * uniform01(rng);
        EXPECT_NEAR(soft_threshold(z, gamma), oracle::grid_prox(z, gamma), 1e-6) << z << " " << gamma;
    }
}

TEST(Prox, ProjectL1Examples) {
    Eigen::VectorXd v(2);
    v << 3, 0;
    EXPECT_TRUE(project_l1(v, 1.0).isApprox(Eigen::Vector2d(1, 0)));
    v << 2, 1;
    EXPECT_TRUE(project_l1(v, 2.0).isApprox(Eigen::Vector2d(1.5, 0.5)));
    v << 0.3, -0.2;
    EXPECT_EQ(project_l1(v, 1.0), v);
    EXPECT_EQ(project_l1(v, 0.0), Eigen::Vector2d::Zero());
    EXPECT_THROW(project_l1(v, -1.0), UsageError);
}

TEST(Prox, ProjectL1MatchesBisection) {
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        Eigen::VectorXd v(1 + static_cast<Eigen::Index>(uniform_index(rng, 30)));
        for (auto& e : v) e = 4.0 * standard_normal(rng);
        const double sigma = 5.0 * uniform01(rng);
        const auto p = project_l1(v, sigma);
        EXPECT_LE((p - oracle::bisection_project_l1(v, sigma)).lpNorm<Eigen::Infinity>(), 1e-9);
        EXPECT_LE(p.lpNorm<1>(), sigma + 1e-9);
    }
}

TEST(Pathbuild, SingleObservationGradient) {
    Matrix x(1, 1);
    x << 1.0;
    Vector y(1);
    y << 1.0;
    PathbuildState s(x, y, 0.0);
    EXPECT_DOUBLE_EQ(s.gradient()[0], 2.0);
}

TEST(Pathbuild, IncrementalGradientMatchesNaive) {
    const auto inst = oracle::make_rule_like_instance(200, 50, 0.3, 21);
    const double a0 = optimal_constant(LossKind::squared_ramp, inst.y);
    PathbuildState s(inst.x, inst.y, a0);
    std::size_t flip_iterations = 0;
    for (int iter = 0; iter < 200; ++iter) {
        const Vector g = s.gradient();
        std::vector<std::pair<Eigen::Index, double>> inc;
        const double cutoff = 0.5 * g.lpNorm<Eigen::Infinity>();
        for (Eigen::Index k = 0; k < g.size(); ++k)
            if (std::abs(g[k]) >= cutoff) inc.emplace_back(k, 0.2 * g[k]);
        s.apply_step(inc);
        flip_iterations += s.last_flip_count() > 0;
        const Vector naive = PathbuildState::naive_gradient(inst.x, inst.y, a0, s.coefficients());
        ASSERT_LE((s.gradient() - naive).lpNorm<Eigen::Infinity>(), 1e-10) << "iteration " << iter;
    }
    EXPECT_GE(flip_iterations, 20u);
}

TEST(Pathbuild, RiskNeverRisesAlongReportedPath) {
    const auto inst = oracle::make_rule_like_instance(150, 20, 0.3, 2);
    PathbuildOptions opt;
    opt.report_every = 1;
    opt.max_iter = 300;
    const auto r = pathbuild(inst.x, inst.y, opt);
    ASSERT_GT(r.report.steps.size(), 2u);
    for (std::size_t i = 1; i + 1 < r.report.steps.size(); ++i)
        EXPECT_LE(r.report.steps[i].risk, r.report.steps[i - 1].risk);
    EXPECT_EQ(r.report.solver, "pathbuild");
}

TEST(Pathbuild, TauOneMovesOneCoordinateAtATime) {
    const auto inst = oracle::make_rule_like_instance(150, 20, 0.3, 6);
    PathbuildOptions opt;
    opt.tau = 1.0;
    opt.max_iter = 3;
    opt.report_every = 1;
    const auto r = pathbuild(inst.x, inst.y, opt);
    for (std::size_t i = 0; i < r.report.steps.size(); ++i) EXPECT_LE(r.report.steps[i].nonzeros, i);
}

TEST(ElasticNet, LambdaMaxGivesZero) {
    const auto inst = oracle::make_regression_instance(80, 10, 1);
    const auto p = StandardizedProblem::build(inst.x, inst.y);
    ElasticNetOptions opt;
    opt.lambda_min = elastic_net_lambda_max(p, 1.0);
    opt.n_steps = 1;
    EXPECT_EQ(cd_elastic_net(p, opt).coefficients.nonzero_count(), 0u);
    opt.lambda_min *= 0.99;
    EXPECT_GT(cd_elastic_net(p, opt).coefficients.nonzero_count(), 0u);
}

TEST(ElasticNet, SinglePredictorClosedForm) {
    const auto inst = oracle::make_regression_instance(50, 1, 7);
    const auto p = StandardizedProblem::build(inst.x, inst.y);
    const double n = static_cast<double>(p.n);
    for (double lambda : {0.01, 0.1, 0.5}) {
        ElasticNetOptions opt;
        opt.lambda_min = lambda;
        opt.n_steps = 1;
        const auto r = cd_elastic_net(p, opt);
        EXPECT_NEAR(p.to_standardized(r.coefficients)[0], soft_threshold(p.xty[0] / n, lambda / 2.0), 1e-9);
    }
}

TEST(ElasticNet, SmallLambdaApproachesLeastSquares) {
    const auto inst = oracle::make_regression_instance(120, 8, 3);
    ElasticNetOptions opt;
    opt.lambda_min = 1e-7;
    opt.tolerance = 1e-12;
    const auto r = cd_elastic_net(inst.x, inst.y, opt);
    double a0 = 0.0;
    const Vector ls = oracle::least_squares_with_intercept(inst.x, inst.y, &a0);
    EXPECT_LE((r.coefficients.a - ls).lpNorm<Eigen::Infinity>(), 1e-3);
    EXPECT_NEAR(r.coefficients.a0, a0, 1e-3);
}

TEST(ElasticNet, SweepObjectivesNonIncreasing) {
    const auto inst = oracle::make_regression_instance(100, 15, 5);
    const auto p = StandardizedProblem::build(inst.x, inst.y);
    for (double alpha : {1.0, 0.5}) {
        ElasticNetOptions opt;
        opt.alpha = alpha;
        const double lambda = 0.05 * elastic_net_lambda_max(p, alpha);
        Vector b = Vector::Zero(p.dim());
        Vector corr = p.xty;
        std::vector<double> objectives;
        detail::coordinate_descent(p, alpha, lambda, opt, b, corr, &objectives);
        ASSERT_GE(objectives.size(), 2u);
        for (std::size_t i = 1; i < objectives.size(); ++i) EXPECT_LE(objectives[i], objectives[i - 1] + 1e-12);
        EXPECT_LE((corr - (p.xty - p.gram * b)).lpNorm<Eigen::Infinity>(), 1e-9);
    }
}

TEST(ElasticNet, RidgeLimitMatchesClosedForm) {
    const auto inst = oracle::make_regression_instance(60, 5, 9);
    const auto p = StandardizedProblem::build(inst.x, inst.y);
    ElasticNetOptions opt;
    opt.alpha = 0.0;
    opt.lambda_min = 0.3;
    opt.n_steps = 1;
    opt.tolerance = 1e-13;
    const auto r = cd_elastic_net(p, opt);
    const double n = static_cast<double>(p.n);
    const Matrix a = p.gram / n + opt.lambda_min * Matrix::Identity(p.dim(), p.dim());
    const Vector want = a.ldlt().solve(p.xty / n);
    EXPECT_LE((p.to_standardized(r.coefficients) - want).lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST(Fpc, TinyMuGivesZero) {
    const auto inst = oracle::make_regression_instance(80, 10, 2);
    const auto p = StandardizedProblem::build(inst.x, inst.y);
    FpcOptions opt;
    opt.mu_max = 0.5 / p.xty.lpNorm<Eigen::Infinity>();
    EXPECT_EQ(fpc(p, opt).coefficients.nonzero_count(), 0u);
}

TEST(Fpc, LargeMuApproachesLeastSquares) {
    const auto inst = oracle::make_regression_instance(120, 8, 3);
    FpcOptions opt;
    opt.mu_max = 1e8;
    opt.n_steps = 20;
    opt.tolerance = 1e-12;
    const auto r = fpc(inst.x, inst.y, opt);
    double a0 = 0.0;
    const Vector ls = oracle::least_squares_with_intercept(inst.x, inst.y, &a0);
    EXPECT_LE((r.coefficients.a - ls).lpNorm<Eigen::Infinity>(), 1e-3);
    ASSERT_EQ(r.report.steps.size(), 20u);
    EXPECT_EQ(r.report.parameter_name, "mu");
}

TEST(Spg, ZeroSigmaGivesZero) {
    const auto inst = oracle::make_regression_instance(80, 10, 2);
    SpgOptions opt;
    opt.sigma = 0.0;
    EXPECT_EQ(spg_lasso(inst.x, inst.y, opt).coefficients.nonzero_count(), 0u);
}

TEST(Spg, LargeSigmaApproachesLeastSquares) {
    const auto inst = oracle::make_regression_instance(120, 8, 3);
    SpgOptions opt;
    opt.sigma = 1e3;
    opt.tolerance = 1e-10;
    const auto r = spg_lasso(inst.x, inst.y, opt);
    double a0 = 0.0;
    const Vector ls = oracle::least_squares_with_intercept(inst.x, inst.y, &a0);
    EXPECT_LE((r.coefficients.a - ls).lpNorm<Eigen::Infinity>(), 1e-3);
}

TEST(Spg, TraceIsMonotoneAndFeasible) {
    const auto inst = oracle::make_regression_instance(100, 20, 4);
    SpgOptions opt;
    opt.sigma = 2.0;
    SpgTrace trace;
    spg_lasso(inst.x, inst.y, opt, &trace);
    ASSERT_GE(trace.objectives.size(), 2u);
    for (std::size_t i = 1; i < trace.objectives.size(); ++i)
        EXPECT_LE(trace.objectives[i], trace.objectives[i - 1] + 1e-15);
    for (double l1 : trace.l1_norms) EXPECT_LE(l1, opt.sigma + 1e-9);
}

TEST(CrossSolver, LassoSolutionsAgree) {
    const auto inst = oracle::make_regression_instance(100, 20, 42);
    const auto p = StandardizedProblem::build(inst.x, inst.y);
    const double n = static_cast<double>(p.n);
    const double lmax = elastic_net_lambda_max(p, 1.0);
    for (double frac : {0.5, 0.2, 0.1, 0.03, 0.01}) {
        const double lambda = frac * lmax;
        ElasticNetOptions cd;
        cd.lambda_min = lambda;
        cd.tolerance = 1e-13;
        const Vector b_cd = p.to_standardized(cd_elastic_net(p, cd).coefficients);

        FpcOptions fo;
        fo.mu_max = 2.0 / (n * lambda);
        fo.tolerance = 1e-13;
        const Vector b_fpc = p.to_standardized(fpc(p, fo).coefficients);

        SpgOptions so;
        so.sigma = b_cd.lpNorm<1>();
        so.tolerance = 1e-12;
        const Vector b_spg = p.to_standardized(spg_lasso(p, so).coefficients);

        const double obj = p.lasso_objective(b_cd, lambda);
        EXPECT_LE(std::abs(p.lasso_objective(b_fpc, lambda) - obj) / obj, 1e-6) << frac;
        EXPECT_LE(std::abs(p.lasso_objective(b_spg, lambda) - obj) / obj, 1e-6) << frac;
        EXPECT_LE((b_fpc - b_cd).lpNorm<Eigen::Infinity>(), 1e-5) << frac;
        EXPECT_LE((b_spg - b_cd).lpNorm<Eigen::Infinity>(), 1e-5) << frac;
    }
}

TEST(SolverSpec, NamesAndParameters) {
    for (std::string name : {"pathbuild", "cdnet", "fpc", "spg"}) EXPECT_EQ(solver_name(solver_from_name(name)), name);
    EXPECT_THROW(solver_from_name("lbfgs"), UsageError);
    auto spec = solver_from_name("cdnet");
    set_solver_parameter(spec, "alpha", 0.5);
    EXPECT_DOUBLE_EQ(std::get<ElasticNetOptions>(spec).alpha, 0.5);
    EXPECT_THROW(set_solver_parameter(spec, "tau", 0.5), UsageError);
    EXPECT_EQ(solver_loss(solver_from_name("pathbuild")), LossKind::squared_ramp);
    EXPECT_EQ(solver_loss(spec), LossKind::squared_error);
}
