#pragma once

#include <map>
#include <string>
#include <variant>

#include "rulens/solvers/cd_elastic_net.hpp"
#include "rulens/solvers/common.hpp"
#include "rulens/solvers/fpc.hpp"
#include "rulens/solvers/pathbuild.hpp"
#include "rulens/solvers/prox.hpp"
#include "rulens/solvers/spg_lasso.hpp"

namespace rulens {

using SolverSpec = std::variant<PathbuildOptions, ElasticNetOptions, FpcOptions, SpgOptions>;

inline std::string solver_name(const SolverSpec& spec) {
    switch (spec.index()) {
    case 0: return "pathbuild";
    case 1: return "cdnet";
    case 2: return "fpc";
    default: return "spg";
    }
}

inline SolverSpec solver_from_name(const std::string& name) {
    if (name == "pathbuild") return PathbuildOptions{};
    if (name == "cdnet") return ElasticNetOptions{};
    if (name == "fpc") return FpcOptions{};
    if (name == "spg") return SpgOptions{};
    throw UsageError("unknown solver '" + name + "' (expected pathbuild, cdnet, fpc or spg)");
}

// The loss each solver minimizes; only pathbuild uses the ramp.
inline LossKind solver_loss(const SolverSpec& spec) {
    return std::holds_alternative<PathbuildOptions>(spec) ? LossKind::squared_ramp : LossKind::squared_error;
}

// The user-facing parameters, by flag name.
inline std::map<std::string, double> solver_parameters(const SolverSpec& spec) {
    return std::visit(
        [](const auto& o) -> std::map<std::string, double> {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, PathbuildOptions>) return {{"tau", o.tau}};
            else if constexpr (std::is_same_v<T, ElasticNetOptions>) return {{"alpha", o.alpha}, {"lambda_min", o.lambda_min}};
            else if constexpr (std::is_same_v<T, FpcOptions>) return {{"mu_max", o.mu_max}};
            else return {{"sigma", o.sigma}};
        },
        spec);
}

// Sets one named parameter; throws if the solver has no such parameter.
inline void set_solver_parameter(SolverSpec& spec, const std::string& name, double value) {
    const bool ok = std::visit(
        [&](auto& o) {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, PathbuildOptions>) {
                if (name == "tau") { o.tau = value; return true; }
            } else if constexpr (std::is_same_v<T, ElasticNetOptions>) {
                if (name == "alpha") { o.alpha = value; return true; }
                if (name == "lambda_min") { o.lambda_min = value; return true; }
            } else if constexpr (std::is_same_v<T, FpcOptions>) {
                if (name == "mu_max") { o.mu_max = value; return true; }
            } else {
                if (name == "sigma") { o.sigma = value; return true; }
            }
            return false;
        },
        spec);
    if (!ok) throw UsageError("solver " + solver_name(spec) + " has no parameter '" + name + "'");
}

inline SolverResult solve(const SolverSpec& spec, const Matrix& x, const Vector& y) {
    return std::visit(
        [&](const auto& o) -> SolverResult {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, PathbuildOptions>) return pathbuild(x, y, o);
            else if constexpr (std::is_same_v<T, ElasticNetOptions>) return cd_elastic_net(x, y, o);
            else if constexpr (std::is_same_v<T, FpcOptions>) return fpc(x, y, o);
            else return spg_lasso(x, y, o);
        },
        spec);
}

} // namespace rulens
