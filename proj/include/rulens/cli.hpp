#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rulens/analysis.hpp"
#include "rulens/cv.hpp"
#include "rulens/dataset.hpp"
#include "rulens/model.hpp"
#include "rulens/serialize.hpp"

namespace rulens::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2 };

// Flags shared by every subcommand that fits models.
struct FitFlags {
    std::string solver = "pathbuild";
    double tau = 0.0, alpha = 1.0, lambda_min = 1e-3, mu_max = 1.0, sigma = 1.0;
    double delta = 0.01;
    std::size_t max_iter = 0;  // 0: solver default
    std::size_t n_steps = 0;
    double eta = 0.25, nu = 0.01, mean_leaves = 20.0, attr_fraction = 1.0 / 3.0;
    std::size_t max_rules = 600, min_node_count = 5;
    std::string terms = "rules";
    bool include_linear = false, no_standardize = false;
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    struct Given {
        CLI::Option *tau, *alpha, *lambda_min, *mu_max, *sigma, *delta, *max_iter, *n_steps, *terms, *include_linear;
    } given{};
};

struct DataFlags {
    std::string path;
    std::string label_col;
};

inline void add_data_options(CLI::App* app, DataFlags& d, bool label_required) {
    app->add_option("--data", d.path, "CSV file with a header row")->required();
    auto* opt = app->add_option("--label-col", d.label_col, "label column name, or 0-based index");
    if (label_required) opt->required();
}

inline void add_fit_options(CLI::App* app, FitFlags& f) {
    app->add_option("--solver", f.solver, "pathbuild | cdnet | fpc | spg")
        ->capture_default_str()
        ->check(CLI::IsMember({"pathbuild", "cdnet", "fpc", "spg"}));
    f.given.tau = app->add_option("--tau", f.tau, "pathbuild gradient threshold in [0,1]")->capture_default_str();
    f.given.delta = app->add_option("--delta", f.delta, "pathbuild step scale")->capture_default_str();
    f.given.alpha = app->add_option("--alpha", f.alpha, "cdnet elastic net mixing in [0,1]")->capture_default_str();
    f.given.lambda_min = app->add_option("--lambda-min", f.lambda_min, "cdnet final penalty")->capture_default_str();
    f.given.mu_max = app->add_option("--mu-max", f.mu_max, "fpc final weight")->capture_default_str();
    f.given.sigma = app->add_option("--sigma", f.sigma, "spg l1 radius")->capture_default_str();
    f.given.max_iter = app->add_option("--max-iter", f.max_iter, "pathbuild/spg iteration cap (0: default)");
    f.given.n_steps = app->add_option("--n-steps", f.n_steps, "cdnet/fpc path length (0: default)");
    app->add_option("--eta", f.eta, "subsample per tree: fraction in (0,1] or row count")->capture_default_str();
    app->add_option("--nu", f.nu, "boosting shrinkage")->capture_default_str();
    app->add_option("--mean-leaves", f.mean_leaves, "mean terminal nodes per tree")->capture_default_str();
    app->add_option("--max-rules", f.max_rules, "rule budget")->capture_default_str();
    app->add_option("--min-node-count", f.min_node_count, "smallest node a split may create")->capture_default_str();
    app->add_option("--attr-fraction", f.attr_fraction, "attributes sampled per split")->capture_default_str();
    f.given.terms = app->add_option("--terms", f.terms, "rules | linear | both")
                        ->capture_default_str()
                        ->check(CLI::IsMember({"rules", "linear", "both"}));
    f.given.include_linear = app->add_flag("--include-linear", f.include_linear, "add linear terms (same as --terms both)");
    app->add_flag("--no-standardize", f.no_standardize, "keep attributes on their original scale");
    app->add_option("--seed", f.seed, "master random seed")->capture_default_str();
    app->add_option("--threads", f.threads, "OVA submodels trained concurrently")->capture_default_str();
}

inline FitConfig build_fit_config(const FitFlags& f) {
    FitConfig cfg;
    cfg.boost.eta = SubsampleSize{f.eta};
    cfg.boost.nu = f.nu;
    cfg.boost.tree.mean_leaves = f.mean_leaves;
    cfg.boost.max_rules = f.max_rules;
    cfg.boost.tree.min_node_count = f.min_node_count;
    cfg.boost.tree.attr_sample_fraction = f.attr_fraction;
    cfg.boost.seed = f.seed;
    cfg.standardize = !f.no_standardize;
    cfg.threads = f.threads;
    if (f.include_linear && f.given.terms->count() && f.terms != "both")
        throw UsageError("--include-linear conflicts with --terms " + f.terms);
    cfg.terms = f.include_linear ? TermMode::both : term_mode_from_string(f.terms);
    if (f.eta <= 0.0) throw UsageError("--eta must be positive");

    auto reject = [&](CLI::Option* o, const char* flag) {
        if (o->count()) throw UsageError(std::string(flag) + " does not apply to solver " + f.solver);
    };
    const bool pb = f.solver == "pathbuild", cd = f.solver == "cdnet", fp = f.solver == "fpc", sp = f.solver == "spg";
    if (!pb) { reject(f.given.tau, "--tau"); reject(f.given.delta, "--delta"); }
    if (!cd) { reject(f.given.alpha, "--alpha"); reject(f.given.lambda_min, "--lambda-min"); }
    if (!fp) reject(f.given.mu_max, "--mu-max");
    if (!sp) reject(f.given.sigma, "--sigma");
    if (!(pb || sp)) reject(f.given.max_iter, "--max-iter");
    if (!(cd || fp)) reject(f.given.n_steps, "--n-steps");

    if (pb) {
        PathbuildOptions o;
        o.tau = f.tau;
        o.delta = f.delta;
        if (f.max_iter) o.max_iter = f.max_iter;
        o.validate();
        cfg.solver = o;
    } else if (cd) {
        ElasticNetOptions o;
        o.alpha = f.alpha;
        o.lambda_min = f.lambda_min;
        if (f.n_steps) o.n_steps = f.n_steps;
        o.validate();
        cfg.solver = o;
    } else if (fp) {
        FpcOptions o;
        o.mu_max = f.mu_max;
        if (f.n_steps) o.n_steps = f.n_steps;
        o.validate();
        cfg.solver = o;
    } else {
        SpgOptions o;
        o.sigma = f.sigma;
        if (f.max_iter) o.max_iter = f.max_iter;
        o.validate();
        cfg.solver = o;
    }
    cfg.boost.validate();
    return cfg;
}

// One line naming every effective setting, for the run log.
inline std::string describe(const FitConfig& cfg) {
    std::ostringstream s;
    s << "solver=" << solver_name(cfg.solver);
    for (const auto& [k, v] : solver_parameters(cfg.solver)) s << ' ' << k << '=' << v;
    std::visit(
        [&](const auto& o) {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, PathbuildOptions>) s << " delta=" << o.delta << " max_iter=" << o.max_iter;
            else if constexpr (std::is_same_v<T, ElasticNetOptions>) s << " n_steps=" << o.n_steps;
            else if constexpr (std::is_same_v<T, FpcOptions>) s << " n_steps=" << o.n_steps;
            else s << " max_iter=" << o.max_iter;
        },
        cfg.solver);
    s << " eta=" << cfg.boost.eta.value << " nu=" << cfg.boost.nu << " mean_leaves=" << cfg.boost.tree.mean_leaves
      << " max_rules=" << cfg.boost.max_rules << " min_node_count=" << cfg.boost.tree.min_node_count
      << " attr_fraction=" << cfg.boost.tree.attr_sample_fraction << " terms=" << to_string(cfg.terms)
      << " standardize=" << (cfg.standardize ? "yes" : "no") << " seed=" << cfg.boost.seed
      << " threads=" << cfg.threads;
    return s.str();
}

inline LabelColumn parse_label_column(const CsvTable& table, const std::string& spec) {
    for (const auto& h : table.header)
        if (h == spec) return spec;
    if (!spec.empty() && spec.find_first_not_of("0123456789") == std::string::npos)
        return static_cast<std::size_t>(std::stoull(spec));
    return spec;  // resolve_label_column reports the unknown name
}

inline Dataset load_dataset(const DataFlags& d) {
    const auto table = read_csv_file(d.path);
    return dataset_from_table(table, parse_label_column(table, d.label_col));
}

// Writes to `path`, or stdout when it is empty or "-".
inline void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << text;
    if (!out) throw DataError("failed writing " + path);
}

inline std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto v = detail::parse_real(detail::trim(item));
        if (!v) throw UsageError("bad grid value '" + item + "'");
        out.push_back(*v);
    }
    if (out.empty()) throw UsageError("parameter grid is empty");
    return out;
}

inline std::string to_param_name(std::string flag) {
    if (flag.rfind("--", 0) == 0) flag = flag.substr(2);
    for (auto& c : flag)
        if (c == '-') c = '_';
    return flag;
}

// Raw attribute matrix of `table` in the model's attribute order.
inline Matrix model_inputs(const Model& m, const CsvTable& table, const std::string& label_col) {
    const auto& names = std::visit(
        [](const auto& v) -> const std::vector<std::string>& {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, EnsembleModel>) return v.attribute_names;
            else return v.binary_models.front().attribute_names;
        },
        m);
    std::optional<std::size_t> skip;
    if (!label_col.empty()) skip = resolve_label_column(table, parse_label_column(table, label_col));
    std::vector<std::string> found;
    Matrix x = table_attributes(table, skip, &found);
    if (found != names)
        throw DataError("data attributes do not match the model (expected " + std::to_string(names.size()) +
                        " attributes in the training order)");
    return x;
}

inline int run(int argc, const char* const* argv) {
    // --config may appear anywhere; CLI11 reads it at the top level.
    std::vector<std::string> args;
    std::vector<std::string> config_args;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) {
            config_args = {a, argv[++i]};
        } else if (a.rfind("--config=", 0) == 0) {
            config_args = {a};
        } else {
            args.push_back(std::move(a));
        }
    }
    args.insert(args.begin(), config_args.begin(), config_args.end());
    std::vector<const char*> cargv{argv[0]};
    for (const auto& a : args) cargv.push_back(a.c_str());

    CLI::App app{"Rule ensemble classifier: boosted tree rules with sparse linear weighting"};
    app.name("rulens");
    app.set_config("--config", "", "TOML/INI file; options go in a [subcommand] section")->check(CLI::ExistingFile);
    app.require_subcommand(1, 1);

    FitFlags train_fit, cv_fit, sweep_fit, select_fit;
    select_fit.solver = "fpc";  // the voting scheme ranks along a mu path
    DataFlags data;
    std::string out_path, model_path, grid_text, param_flag, report_path, tally_path;
    std::size_t folds = 2, reps = 5, top_k = 20, min_votes = 3;

    auto* train = app.add_subcommand("train", "fit a model and write it as JSON");
    add_data_options(train, data, true);
    add_fit_options(train, train_fit);
    train->add_option("--out", out_path, "model file")->required();
    train->add_option("--report", report_path, "solver path CSV");

    auto* predict = app.add_subcommand("predict", "score observations with a saved model");
    predict->add_option("--model", model_path, "model file")->required();
    add_data_options(predict, data, false);
    predict->add_option("--out", out_path, "predictions CSV (default stdout)");

    auto* evaluate_cmd = app.add_subcommand("evaluate", "test-set error of a saved model");
    evaluate_cmd->add_option("--model", model_path, "model file")->required();
    add_data_options(evaluate_cmd, data, true);
    evaluate_cmd->add_option("--out", out_path, "metrics CSV (default stdout)");

    auto* cv = app.add_subcommand("cv", "repeated stratified k-fold cross-validation");
    add_data_options(cv, data, true);
    add_fit_options(cv, cv_fit);
    cv->add_option("--folds", folds, "folds per repetition")->capture_default_str();
    cv->add_option("--reps", reps, "repetitions")->capture_default_str();
    cv->add_option("--out", out_path, "metrics CSV (default stdout)");

    auto* rank = app.add_subcommand("rank", "list the most important rules of a saved model");
    rank->add_option("--model", model_path, "model file")->required();
    rank->add_option("--top", top_k, "entries per model")->capture_default_str();
    rank->add_option("--out", out_path, "output file (default stdout)");

    auto* sweep = app.add_subcommand("sweep", "cross-validated error over a solver parameter grid");
    add_data_options(sweep, data, true);
    add_fit_options(sweep, sweep_fit);
    sweep->add_option("--param", param_flag, "tau | alpha | lambda-min | mu-max | sigma")->required();
    sweep->add_option("--param-grid", grid_text, "comma-separated values")->required();
    sweep->add_option("--folds", folds, "folds per repetition")->capture_default_str();
    sweep->add_option("--reps", reps, "repetitions")->capture_default_str();
    sweep->add_option("--out", out_path, "sweep CSV (default stdout)");

    auto* select = app.add_subcommand("select-attrs", "attribute subset from rule votes across repetitions");
    add_data_options(select, data, true);
    add_fit_options(select, select_fit);
    select->add_option("--folds", folds, "folds per repetition")->capture_default_str();
    select->add_option("--reps", reps, "repetitions")->capture_default_str();
    select->add_option("--top", top_k, "rules per path step that receive a vote")->capture_default_str();
    select->add_option("--min-votes", min_votes, "repetitions an attribute must appear in")->capture_default_str();
    select->add_option("--out", out_path, "selected attributes CSV (default stdout)");
    select->add_option("--tally-out", tally_path, "per-repetition vote tallies CSV");

    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        auto log_config = [](const char* cmd, const FitConfig& cfg) {
            std::cerr << "# rulens " << cmd << ": " << describe(cfg) << "\n";
        };
        if (*train) {
            const FitConfig cfg = build_fit_config(train_fit);
            log_config("train", cfg);
            const Dataset d = load_dataset(data);
            Model m;
            if (report_path.empty()) {
                m = fit_model(d, cfg);
            } else {
                std::vector<SolverReport> reports;
                m = assemble(d, prepare_problems(d, cfg), cfg.solver, &reports);
                std::string text;
                for (std::size_t j = 0; j < reports.size(); ++j) {
                    std::string csv = reports[j].to_csv();
                    if (reports.size() > 1) {
                        // prefix a class column
                        std::stringstream in(csv);
                        std::string line;
                        bool header = true;
                        while (std::getline(in, line)) {
                            if (header) {
                                if (j == 0) text += "class," + line + "\n";
                                header = false;
                            } else {
                                text += d.class_names[j] + "," + line + "\n";
                            }
                        }
                    } else {
                        text += csv;
                    }
                }
                emit(report_path, text);
            }
            save_model(m, out_path);
            std::cerr << "# wrote " << out_path << " (" << nonzero_count(m) << " nonzero coefficients)\n";
        } else if (*predict) {
            const Model m = load_model(model_path);
            const auto table = read_csv_file(data.path);
            const Matrix x = model_inputs(m, table, data.label_col);
            const auto& names = class_names(m);
            std::string text = "row_index";
            if (std::holds_alternative<EnsembleModel>(m)) text += ",score";
            else
                for (const auto& c : names) text += ",score_" + c;
            text += ",predicted_label\n";
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                const Vector row = x.row(i).transpose();
                text += std::to_string(i);
                if (const auto* b = std::get_if<EnsembleModel>(&m)) {
                    text += "," + format_real(predict_score(*b, row));
                } else {
                    const Vector s = class_scores(std::get<OvaModel>(m), row);
                    for (Eigen::Index j = 0; j < s.size(); ++j) text += "," + format_real(s[j]);
                }
                text += "," + names[predict_index(m, row)] + "\n";
            }
            emit(out_path, text);
        } else if (*evaluate_cmd) {
            const Model m = load_model(model_path);
            const auto table = read_csv_file(data.path);
            Dataset d = dataset_from_table(table, parse_label_column(table, data.label_col));
            // Map label names onto the model's class order.
            const auto& names = class_names(m);
            for (auto& l : d.labels) {
                const auto it = std::find(names.begin(), names.end(), d.class_names[static_cast<std::size_t>(l)]);
                if (it == names.end())
                    throw DataError("label '" + d.class_names[static_cast<std::size_t>(l)] + "' is not a model class");
                l = static_cast<int>(it - names.begin());
            }
            d.class_names = names;
            d.observations = model_inputs(m, table, data.label_col);
            const EvalScore s = evaluate(m, d);
            std::string text = "class,error,fp_rate,fn_rate,nonzeros\n";
            text += "all," + format_real(s.error) + "," + format_optional(s.fp_rate) + "," +
                    format_optional(s.fn_rate) + "," + std::to_string(s.nonzeros) + "\n";
            if (names.size() > 2)
                for (std::size_t j = 0; j < names.size(); ++j)
                    text += names[j] + "," + format_real(s.per_class[j].error_rate) + "," +
                            format_optional(s.per_class[j].false_positive_rate) + "," +
                            format_optional(s.per_class[j].false_negative_rate) + ",\n";
            emit(out_path, text);
        } else if (*cv) {
            const FitConfig cfg = build_fit_config(cv_fit);
            log_config("cv", cfg);
            const Dataset d = load_dataset(data);
            const CvResult r = run_cv(d, {folds, reps, cv_fit.seed}, cfg);
            emit(out_path, cv_csv(r));
        } else if (*rank) {
            const Model m = load_model(model_path);
            std::string text;
            if (const auto* b = std::get_if<EnsembleModel>(&m)) {
                text = format_ranking(rank_rules(*b, top_k));
            } else {
                const auto& ova = std::get<OvaModel>(m);
                for (std::size_t j = 0; j < ova.classes(); ++j) {
                    text += (j ? "\n" : "") + std::string("class ") + ova.class_names[j] + "\n";
                    text += format_ranking(rank_rules(ova.binary_models[j], top_k));
                }
            }
            emit(out_path, text);
        } else if (*sweep) {
            const FitConfig cfg = build_fit_config(sweep_fit);
            log_config("sweep", cfg);
            const auto grid = parse_grid(grid_text);
            const Dataset d = load_dataset(data);
            const SweepResult r = run_sweep(d, {folds, reps, sweep_fit.seed}, cfg, to_param_name(param_flag), grid);
            emit(out_path, sweep_csv(r));
        } else if (*select) {
            const FitConfig cfg = build_fit_config(select_fit);
            log_config("select-attrs", cfg);
            const Dataset d = load_dataset(data);
            const SelectionResult r = select_attributes(d, {folds, reps, select_fit.seed}, cfg, {top_k, min_votes});
            std::string text = "index,attribute\n";
            for (auto a : r.attributes) text += std::to_string(a) + "," + d.attribute_names[a] + "\n";
            emit(out_path, text);
            if (!tally_path.empty()) {
                std::string tally = "repetition,class,term,votes,rule\n";
                const std::size_t per = r.repetitions.empty() ? 0 : r.repetitions.front().size();
                for (std::size_t i = 0; i < r.tallies.size(); ++i) {
                    const auto& vt = r.repetitions[i / per][i % per];
                    const std::string cls = per == 1 ? "" : d.class_names[i % per];
                    for (const auto& [k, v] : r.tallies[i].votes)
                        tally += std::to_string(i / per) + "," + cls + "," + std::to_string(k) + "," +
                                 std::to_string(v) + ",\"" + vt.ruleset.describe_term(k, d.attribute_names) + "\"\n";
                }
                emit(tally_path, tally);
            }
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    }
    return kOk;
}

} // namespace rulens::cli
