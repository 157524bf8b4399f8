#pragma once

#include <cstdint>
#include <exception>
#include <map>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "rulens/dataset.hpp"
#include "rulens/random.hpp"
#include "rulens/rule.hpp"
#include "rulens/rulegen.hpp"
#include "rulens/solvers.hpp"

namespace rulens {

enum class TermMode { rules, linear, both };

inline std::string_view to_string(TermMode m) {
    switch (m) {
    case TermMode::rules: return "rules";
    case TermMode::linear: return "linear";
    default: return "both";
    }
}

inline TermMode term_mode_from_string(std::string_view s) {
    if (s == "rules") return TermMode::rules;
    if (s == "linear") return TermMode::linear;
    if (s == "both") return TermMode::both;
    throw UsageError("unknown term mode '" + std::string(s) + "' (expected rules, linear or both)");
}

struct FitConfig {
    BoostConfig boost{};
    SolverSpec solver = PathbuildOptions{};
    TermMode terms = TermMode::rules;
    bool standardize = true;
    std::size_t threads = 1;  // OVA submodels trained concurrently
};

/// F(x) = a0 + sum_k a_k f_k(x) over a rule set, applied to raw observations
/// through the stored scaling.
struct EnsembleModel {
    std::vector<std::string> attribute_names;
    std::vector<std::string> class_names;  // {negative, positive}
    ScalingParams scaling;
    RuleSet ruleset;
    Coefficients coefficients;
    std::string solver;
    std::map<std::string, double> solver_params;
    LossKind loss = LossKind::squared_error;
    std::uint64_t seed = 0;

    std::size_t attributes() const { return scaling.size(); }

    double score_standardized(const Eigen::Ref<const Vector>& z) const {
        double f = coefficients.a0;
        for (std::size_t k = 0; k < ruleset.rules.size(); ++k) {
            const double a = coefficients.a[static_cast<Eigen::Index>(k)];
            if (a != 0.0 && ruleset.rules[k].evaluate(z)) f += a;
        }
        for (std::size_t j = 0; j < ruleset.linear_terms.size(); ++j) {
            const double a = coefficients.a[static_cast<Eigen::Index>(ruleset.rules.size() + j)];
            if (a != 0.0) f += a * z[static_cast<Eigen::Index>(ruleset.linear_terms[j])];
        }
        return f;
    }

    void validate() const {
        if (static_cast<std::size_t>(coefficients.a.size()) != ruleset.size())
            throw DataError("coefficient count does not match the rule set");
        if (attribute_names.size() != attributes()) throw DataError("attribute names do not match the scaling");
        for (const auto& r : ruleset.rules)
            for (const auto& c : r.constraints())
                if (c.attribute >= attributes()) throw DataError("rule references a missing attribute");
        for (auto a : ruleset.linear_terms)
            if (a >= attributes()) throw DataError("linear term references a missing attribute");
    }
};

inline double predict_score(const EnsembleModel& m, const Eigen::Ref<const Vector>& x) {
    if (static_cast<std::size_t>(x.size()) != m.attributes())
        throw DataError("observation has " + std::to_string(x.size()) + " attributes, model expects " +
                        std::to_string(m.attributes()));
    return m.score_standardized(m.scaling.transform_row(x));
}

inline int sign_label(double score) { return score >= 0.0 ? 1 : -1; }

inline int predict_label(const EnsembleModel& m, const Eigen::Ref<const Vector>& x) {
    return sign_label(predict_score(m, x));
}

inline Vector predict_scores(const EnsembleModel& m, const Matrix& x) {
    Vector out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = predict_score(m, x.row(i).transpose());
    return out;
}

/// Everything a solver needs: the model shell (scaling, rules) plus the
/// feature matrix and labels it was built from.
struct PreparedProblem {
    EnsembleModel shell;
    Matrix features;
    Vector labels;
};

inline PreparedProblem prepare_binary(const Matrix& x, const Vector& labels, const FitConfig& cfg,
                                      std::vector<std::string> attribute_names = {}) {
    PreparedProblem p;
    EnsembleModel& m = p.shell;
    m.attribute_names = std::move(attribute_names);
    if (m.attribute_names.empty())
        for (Eigen::Index c = 0; c < x.cols(); ++c) m.attribute_names.push_back("x" + std::to_string(c + 1));
    m.class_names = {"-1", "1"};
    m.scaling = cfg.standardize ? fit_scaling(x) : ScalingParams::identity(static_cast<std::size_t>(x.cols()));
    const Matrix z = m.scaling.transform(x);

    if (cfg.terms != TermMode::linear) m.ruleset = dedupe(generate_rules(z, labels, cfg.boost)).rules;
    if (cfg.terms != TermMode::rules) m.ruleset.linear_terms = varying_attributes(z);
    if (m.ruleset.size() == 0) throw DataError("model has no terms: every attribute is constant");
    m.seed = cfg.boost.seed;
    p.features = build_feature_matrix(m.ruleset, z);
    p.labels = labels;
    return p;
}

inline EnsembleModel finish_binary(const PreparedProblem& p, const SolverSpec& solver, SolverReport* report = nullptr) {
    EnsembleModel m = p.shell;
    SolverResult r = solve(solver, p.features, p.labels);
    m.coefficients = r.coefficients;
    m.solver = solver_name(solver);
    m.solver_params = solver_parameters(solver);
    m.loss = solver_loss(solver);
    if (report) *report = std::move(r.report);
    return m;
}

/// Fits one binary model on raw observations with labels in {-1,+1}.
inline EnsembleModel fit_binary(const Matrix& x, const Vector& labels, const FitConfig& cfg,
                                std::vector<std::string> attribute_names = {}) {
    return finish_binary(prepare_binary(x, labels, cfg, std::move(attribute_names)), cfg.solver);
}

/// Binary dataset: class index 1 is the positive class.
inline EnsembleModel fit_binary(const Dataset& d, const FitConfig& cfg) {
    d.validate();
    if (d.classes() != 2) throw DataError("binary fit needs exactly two classes");
    EnsembleModel m = fit_binary(d.observations, d.signed_labels(1), cfg, d.attribute_names);
    m.class_names = d.class_names;
    return m;
}

/// J one-versus-all models; model j separates class j (+1) from the rest.
struct OvaModel {
    std::vector<std::string> class_names;
    std::vector<EnsembleModel> binary_models;

    std::size_t classes() const { return class_names.size(); }
};

inline std::uint64_t class_seed(std::uint64_t master, std::size_t j) { return derive_seed(master, j); }

inline OvaModel fit_ova(const Dataset& d, const FitConfig& cfg) {
    d.validate();
    if (d.classes() < 2) throw DataError("OVA needs at least two classes");
    const auto counts = d.class_counts();
    for (std::size_t j = 0; j < counts.size(); ++j)
        if (counts[j] < 2) throw DataError("class '" + d.class_names[j] + "' has fewer than 2 observations");

    OvaModel out;
    out.class_names = d.class_names;
    out.binary_models.resize(d.classes());
    std::vector<std::exception_ptr> errors(d.classes());
    auto fit_one = [&](std::size_t j) {
        try {
            FitConfig c = cfg;
            c.boost.seed = class_seed(cfg.boost.seed, j);
            EnsembleModel m = fit_binary(d.observations, d.signed_labels(static_cast<int>(j)), c, d.attribute_names);
            m.class_names = {"not " + d.class_names[j], d.class_names[j]};
            out.binary_models[j] = std::move(m);
        } catch (...) {
            errors[j] = std::current_exception();
        }
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(cfg.threads, d.classes()));
    if (threads == 1) {
        for (std::size_t j = 0; j < d.classes(); ++j) fit_one(j);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t j = t; j < d.classes(); j += threads) fit_one(j);
            });
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

// Index of the largest score; ties go to the lowest index.
inline std::size_t argmax_class(const Vector& scores) {
    std::size_t best = 0;
    for (Eigen::Index j = 1; j < scores.size(); ++j)
        if (scores[j] > scores[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(j);
    return best;
}

inline Vector class_scores(const OvaModel& m, const Eigen::Ref<const Vector>& x) {
    Vector s(static_cast<Eigen::Index>(m.classes()));
    for (std::size_t j = 0; j < m.classes(); ++j) s[static_cast<Eigen::Index>(j)] = predict_score(m.binary_models[j], x);
    return s;
}

inline std::size_t predict_class(const OvaModel& m, const Eigen::Ref<const Vector>& x) {
    return argmax_class(class_scores(m, x));
}

/// A fitted classifier: one binary model for two classes, OVA otherwise.
using Model = std::variant<EnsembleModel, OvaModel>;

inline Model fit_model(const Dataset& d, const FitConfig& cfg) {
    if (d.classes() == 2) return fit_binary(d, cfg);
    return fit_ova(d, cfg);
}

inline const std::vector<std::string>& class_names(const Model& m) {
    return std::visit([](const auto& v) -> const std::vector<std::string>& { return v.class_names; }, m);
}

// Predicted class index into class_names(m).
inline std::size_t predict_index(const Model& m, const Eigen::Ref<const Vector>& x) {
    if (const auto* b = std::get_if<EnsembleModel>(&m)) return predict_label(*b, x) > 0 ? 1 : 0;
    return predict_class(std::get<OvaModel>(m), x);
}

inline std::vector<std::size_t> predict_indices(const Model& m, const Matrix& x) {
    std::vector<std::size_t> out(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = predict_index(m, x.row(i).transpose());
    return out;
}

inline std::size_t nonzero_count(const Model& m) {
    if (const auto* b = std::get_if<EnsembleModel>(&m)) return b->coefficients.nonzero_count();
    std::size_t total = 0;
    for (const auto& b : std::get<OvaModel>(m).binary_models) total += b.coefficients.nonzero_count();
    return total;
}

} // namespace rulens
