#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rulens/model.hpp"

namespace rulens {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

using nlohmann::json;

// Interval bounds may be infinite; JSON has no literal for that.
inline json bound_to_json(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline double bound_from_json(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        throw DataError("bad interval bound '" + s + "'");
    }
    if (!j.is_number()) throw DataError("interval bound is not a number");
    return j.get<double>();
}

inline json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

inline Vector vector_from_json(const json& j) {
    if (!j.is_array()) throw DataError("expected a numeric array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw DataError("expected a numeric array");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

inline const json& field(const json& j, const char* name) {
    if (!j.is_object() || !j.contains(name)) throw DataError(std::string("model file lacks field '") + name + "'");
    return j.at(name);
}

inline json ensemble_to_json(const EnsembleModel& m) {
    json j;
    j["attribute_names"] = m.attribute_names;
    j["class_names"] = m.class_names;
    j["scaling"] = {{"means", vector_to_json(m.scaling.means)}, {"stds", vector_to_json(m.scaling.stds)}};
    json rules = json::array();
    for (const auto& r : m.ruleset.rules) {
        json cs = json::array();
        for (const auto& c : r.constraints())
            cs.push_back({{"attr", c.attribute}, {"lo", bound_to_json(c.lo)}, {"hi", bound_to_json(c.hi)}});
        rules.push_back({{"constraints", cs}});
    }
    j["rules"] = rules;
    j["linear_terms"] = m.ruleset.linear_terms;
    j["a0"] = m.coefficients.a0;
    j["coefficients"] = vector_to_json(m.coefficients.a);
    j["solver"] = {{"name", m.solver}, {"param", m.solver_params}};
    j["loss"] = std::string(to_string(m.loss));
    j["seed"] = m.seed;
    return j;
}

inline EnsembleModel ensemble_from_json(const json& j) {
    EnsembleModel m;
    m.attribute_names = field(j, "attribute_names").get<std::vector<std::string>>();
    m.class_names = field(j, "class_names").get<std::vector<std::string>>();
    const auto& sc = field(j, "scaling");
    m.scaling.means = vector_from_json(field(sc, "means"));
    m.scaling.stds = vector_from_json(field(sc, "stds"));
    if (m.scaling.means.size() != m.scaling.stds.size()) throw DataError("scaling means and stds differ in length");
    for (const auto& rj : field(j, "rules")) {
        Rule r;
        for (const auto& cj : field(rj, "constraints"))
            r.restrict(field(cj, "attr").get<std::size_t>(), bound_from_json(field(cj, "lo")),
                       bound_from_json(field(cj, "hi")));
        m.ruleset.rules.push_back(std::move(r));
    }
    m.ruleset.linear_terms = field(j, "linear_terms").get<std::vector<std::size_t>>();
    m.coefficients.a0 = field(j, "a0").get<double>();
    m.coefficients.a = vector_from_json(field(j, "coefficients"));
    const auto& sj = field(j, "solver");
    m.solver = field(sj, "name").get<std::string>();
    m.solver_params = field(sj, "param").get<std::map<std::string, double>>();
    m.loss = loss_from_string(field(j, "loss").get<std::string>());
    m.seed = field(j, "seed").get<std::uint64_t>();
    m.validate();
    return m;
}

} // namespace detail

inline std::string serialize(const Model& model) {
    nlohmann::json j;
    j["format_version"] = kModelFormatVersion;
    if (const auto* b = std::get_if<EnsembleModel>(&model)) {
        j["kind"] = "binary";
        j["model"] = detail::ensemble_to_json(*b);
    } else {
        const auto& ova = std::get<OvaModel>(model);
        j["kind"] = "ova";
        j["class_names"] = ova.class_names;
        auto& subs = j["models"] = nlohmann::json::array();
        for (const auto& m : ova.binary_models) subs.push_back(detail::ensemble_to_json(m));
    }
    return j.dump(1) + "\n";
}

inline Model deserialize(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
    try {
        const auto& version = detail::field(j, "format_version");
        if (!version.is_number_integer() || version.get<int>() != kModelFormatVersion)
            throw DataError("unsupported model format version " + version.dump() + " (expected " +
                            std::to_string(kModelFormatVersion) + ")");
        const auto kind = detail::field(j, "kind").get<std::string>();
        if (kind == "binary") return detail::ensemble_from_json(detail::field(j, "model"));
        if (kind != "ova") throw DataError("unknown model kind '" + kind + "'");
        OvaModel ova;
        ova.class_names = detail::field(j, "class_names").get<std::vector<std::string>>();
        for (const auto& mj : detail::field(j, "models")) ova.binary_models.push_back(detail::ensemble_from_json(mj));
        if (ova.class_names.size() < 2 || ova.class_names.size() != ova.binary_models.size())
            throw DataError("OVA model needs one submodel per class and at least two classes");
        return ova;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    } catch (const UsageError& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
}

inline void save_model(const Model& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << serialize(m);
    if (!out) throw DataError("failed writing " + path);
}

inline Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

} // namespace rulens
