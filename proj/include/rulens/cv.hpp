#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "rulens/analysis.hpp"
#include "rulens/dataset.hpp"
#include "rulens/model.hpp"

namespace rulens {

struct CvProtocol {
    std::size_t folds = 2;
    std::size_t repetitions = 5;
    std::uint64_t seed = 0;  // repetition r splits with seed + r

    void validate() const {
        if (folds < 2) throw UsageError("need at least 2 folds");
        if (repetitions < 1) throw UsageError("need at least 1 repetition");
    }
};

/// Test-set scores of one fitted model. For more than two classes the rates
/// are macro averages of the per-class one-versus-all rates.
struct EvalScore {
    double error = 0.0;
    std::optional<double> fp_rate;
    std::optional<double> fn_rate;
    std::size_t nonzeros = 0;
    std::vector<Metrics> per_class;  // one-versus-all, class j positive
};

inline EvalScore evaluate(const Model& m, const Dataset& test) {
    if (class_names(m) != test.class_names) throw DataError("test data classes do not match the model");
    const auto pred = predict_indices(m, test.observations);
    EvalScore s;
    s.nonzeros = nonzero_count(m);
    const std::size_t j_total = test.classes();
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) wrong += static_cast<int>(pred[i]) != test.labels[i];
    s.error = pred.empty() ? 0.0 : static_cast<double>(wrong) / static_cast<double>(pred.size());
    for (std::size_t j = 0; j < j_total; ++j) {
        std::vector<int> p(pred.size()), y(pred.size());
        for (std::size_t i = 0; i < pred.size(); ++i) {
            p[i] = pred[i] == j ? 1 : -1;
            y[i] = test.labels[i] == static_cast<int>(j) ? 1 : -1;
        }
        s.per_class.push_back(confusion_metrics(p, y));
    }
    if (j_total == 2) {
        s.fp_rate = s.per_class[1].false_positive_rate;
        s.fn_rate = s.per_class[1].false_negative_rate;
    } else {
        auto macro = [&](auto member) -> std::optional<double> {
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto& pc : s.per_class)
                if (const auto& v = pc.*member) { sum += *v; ++n; }
            if (!n) return std::nullopt;
            return sum / static_cast<double>(n);
        };
        s.fp_rate = macro(&Metrics::false_positive_rate);
        s.fn_rate = macro(&Metrics::false_negative_rate);
    }
    return s;
}

struct CvRow {
    std::size_t repetition = 0;
    std::size_t fold = 0;
    EvalScore score;
};

struct Summary {
    double mean = 0.0;
    double variance = 0.0;  // sample variance, 0 with fewer than two values
    std::size_t count = 0;
};

inline Summary summarize(const std::vector<double>& v) {
    Summary s;
    s.count = v.size();
    if (v.empty()) return s;
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.variance = ss / static_cast<double>(v.size() - 1);
    }
    return s;
}

struct CvAggregate {
    Summary error, fp_rate, fn_rate, nonzeros;
};

inline CvAggregate aggregate(const std::vector<CvRow>& rows) {
    std::vector<double> e, fp, fn, nz;
    for (const auto& r : rows) {
        e.push_back(r.score.error);
        if (r.score.fp_rate) fp.push_back(*r.score.fp_rate);
        if (r.score.fn_rate) fn.push_back(*r.score.fn_rate);
        nz.push_back(static_cast<double>(r.score.nonzeros));
    }
    return {summarize(e), summarize(fp), summarize(fn), summarize(nz)};
}

struct CvResult {
    std::vector<CvRow> rows;
    CvAggregate totals;
};

inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string format_optional(const std::optional<double>& v) { return v ? format_real(*v) : "NA"; }

/// Per-fold rows followed by a mean and a sample-variance row.
inline std::string cv_csv(const CvResult& r) {
    std::string out = "repetition,fold,error,fp_rate,fn_rate,nonzeros\n";
    for (const auto& row : r.rows)
        out += std::to_string(row.repetition) + "," + std::to_string(row.fold) + "," + format_real(row.score.error) +
               "," + format_optional(row.score.fp_rate) + "," + format_optional(row.score.fn_rate) + "," +
               std::to_string(row.score.nonzeros) + "\n";
    const auto& t = r.totals;
    out += "mean,," + format_real(t.error.mean) + "," + format_real(t.fp_rate.mean) + "," + format_real(t.fn_rate.mean) +
           "," + format_real(t.nonzeros.mean) + "\n";
    out += "variance,," + format_real(t.error.variance) + "," + format_real(t.fp_rate.variance) + "," +
           format_real(t.fn_rate.variance) + "," + format_real(t.nonzeros.variance) + "\n";
    return out;
}

// Seed for the model fitted on fold f of repetition r.
inline std::uint64_t fold_model_seed(std::uint64_t seed, std::size_t r, std::size_t f, std::size_t folds) {
    return derive_seed(seed, r * folds + f);
}

/// Repeated stratified k-fold cross-validation: repetition r splits with
/// seed + r and fold f of it trains with a seed derived from (seed, r, f).
inline CvResult run_cv(const Dataset& d, const CvProtocol& protocol, const FitConfig& cfg) {
    protocol.validate();
    d.validate();
    CvResult out;
    for (std::size_t r = 0; r < protocol.repetitions; ++r) {
        const auto folds = stratified_kfold(d, protocol.folds, protocol.seed + r);
        for (std::size_t f = 0; f < folds.size(); ++f) {
            FitConfig c = cfg;
            c.boost.seed = fold_model_seed(protocol.seed, r, f, protocol.folds);
            const Model m = fit_model(d.subset(folds[f].train), c);
            out.rows.push_back({r, f, evaluate(m, d.subset(folds[f].test))});
        }
    }
    out.totals = aggregate(out.rows);
    return out;
}

// ---------------------------------------------------------------------------
// Parameter sweeps over one shared rule set per fold

// One prepared problem per binary submodel: a single one for two classes,
// J (class j positive, seed derived from j) otherwise.
inline std::vector<PreparedProblem> prepare_problems(const Dataset& d, const FitConfig& cfg) {
    d.validate();
    std::vector<PreparedProblem> out;
    if (d.classes() == 2) {
        out.push_back(prepare_binary(d.observations, d.signed_labels(1), cfg, d.attribute_names));
        out.back().shell.class_names = d.class_names;
        return out;
    }
    if (d.classes() < 2) throw DataError("need at least two classes");
    for (std::size_t j = 0; j < d.classes(); ++j) {
        FitConfig c = cfg;
        c.boost.seed = class_seed(cfg.boost.seed, j);
        out.push_back(prepare_binary(d.observations, d.signed_labels(static_cast<int>(j)), c, d.attribute_names));
        out.back().shell.class_names = {"not " + d.class_names[j], d.class_names[j]};
    }
    return out;
}

inline Model assemble(const Dataset& d, const std::vector<PreparedProblem>& problems, const SolverSpec& solver,
                      std::vector<SolverReport>* reports = nullptr) {
    if (reports) reports->assign(problems.size(), {});
    if (problems.size() == 1) return finish_binary(problems[0], solver, reports ? &(*reports)[0] : nullptr);
    OvaModel ova;
    ova.class_names = d.class_names;
    for (std::size_t j = 0; j < problems.size(); ++j)
        ova.binary_models.push_back(finish_binary(problems[j], solver, reports ? &(*reports)[j] : nullptr));
    return ova;
}

// FNV-1a over the solver inputs, to confirm every grid point saw the same problem.
inline std::uint64_t problem_hash(const std::vector<PreparedProblem>& problems) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](const double* p, std::size_t n) {
        const auto* b = reinterpret_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n * sizeof(double); ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    };
    for (const auto& p : problems) {
        mix(p.features.data(), static_cast<std::size_t>(p.features.size()));
        mix(p.labels.data(), static_cast<std::size_t>(p.labels.size()));
    }
    return h;
}

struct SweepRow {
    double parameter = 0.0;
    CvAggregate totals;
};

struct SweepResult {
    std::string parameter_name;
    std::vector<SweepRow> rows;
    std::vector<std::vector<CvRow>> fold_rows;  // [grid point][fold]
    std::vector<std::uint64_t> input_hashes;     // one per fold, same for every grid point
};

inline std::string sweep_csv(const SweepResult& s) {
    std::string out = s.parameter_name + ",mean_error,fp_rate,fn_rate,nonzeros,error_variance\n";
    for (const auto& r : s.rows)
        out += format_real(r.parameter) + "," + format_real(r.totals.error.mean) + "," +
               format_real(r.totals.fp_rate.mean) + "," + format_real(r.totals.fn_rate.mean) + "," +
               format_real(r.totals.nonzeros.mean) + "," + format_real(r.totals.error.variance) + "\n";
    return out;
}

/// Cross-validated sweep of one solver parameter. Rules are generated once
/// per fold and every grid point solves on the same feature matrices.
inline SweepResult run_sweep(const Dataset& d, const CvProtocol& protocol, const FitConfig& cfg,
                             const std::string& parameter, const std::vector<double>& grid) {
    protocol.validate();
    if (grid.empty()) throw UsageError("parameter grid is empty");
    for (double v : grid) {
        SolverSpec probe = cfg.solver;
        set_solver_parameter(probe, parameter, v);
    }
    SweepResult out;
    out.parameter_name = parameter;
    out.fold_rows.resize(grid.size());
    for (std::size_t r = 0; r < protocol.repetitions; ++r) {
        const auto folds = stratified_kfold(d, protocol.folds, protocol.seed + r);
        for (std::size_t f = 0; f < folds.size(); ++f) {
            FitConfig c = cfg;
            c.boost.seed = fold_model_seed(protocol.seed, r, f, protocol.folds);
            const Dataset train = d.subset(folds[f].train), test = d.subset(folds[f].test);
            const auto problems = prepare_problems(train, c);
            const auto hash = problem_hash(problems);
            out.input_hashes.push_back(hash);
            for (std::size_t g = 0; g < grid.size(); ++g) {
                SolverSpec s = cfg.solver;
                set_solver_parameter(s, parameter, grid[g]);
                if (problem_hash(problems) != hash) throw DataError("solver inputs changed during the sweep");
                out.fold_rows[g].push_back({r, f, evaluate(assemble(train, problems, s), test)});
            }
        }
    }
    for (std::size_t g = 0; g < grid.size(); ++g) out.rows.push_back({grid[g], aggregate(out.fold_rows[g])});
    return out;
}

// ---------------------------------------------------------------------------
// Attribute selection

struct SelectionConfig {
    std::size_t top_k = 20;
    std::size_t min_votes = 3;
};

struct SelectionResult {
    std::vector<std::vector<VotedTerms>> repetitions;  // voted terms per repetition (per class for OVA)
    std::vector<VoteTally> tallies;                    // [repetition * classes + class]
    std::vector<std::size_t> attributes;
};

/// For each repetition, fits on the first fold's training half, ranks the
/// terms at every step of the solver path and lets the steps vote; terms with
/// at least one vote form the repetition's set. Attributes used by those
/// terms in at least min_votes repetitions are selected.
inline SelectionResult select_attributes(const Dataset& d, const CvProtocol& protocol, const FitConfig& cfg,
                                         const SelectionConfig& sel = {}) {
    protocol.validate();
    SelectionResult out;
    for (std::size_t r = 0; r < protocol.repetitions; ++r) {
        const auto folds = stratified_kfold(d, protocol.folds, protocol.seed + r);
        FitConfig c = cfg;
        c.boost.seed = fold_model_seed(protocol.seed, r, 0, protocol.folds);
        const auto problems = prepare_problems(d.subset(folds[0].train), c);
        std::vector<VotedTerms> rep;
        for (const auto& p : problems) {
            SolverReport report;
            finish_binary(p, cfg.solver, &report);
            std::vector<RuleRanking> rankings;
            for (const auto& step : report.steps)
                rankings.push_back(rank_rules(p.shell.ruleset, step.coefficients, sel.top_k, p.shell.attribute_names));
            const auto tally = vote_rules(rankings);
            rep.push_back(voted_terms(tally, p.shell.ruleset, 1));
            out.tallies.push_back(tally);
        }
        out.repetitions.push_back(std::move(rep));
    }
    out.attributes = select_attributes(std::span<const std::vector<VotedTerms>>(out.repetitions), sel.min_votes);
    return out;
}

} // namespace rulens
