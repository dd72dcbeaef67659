#include "optigrad/io.hpp"

#include <fstream>
#include <stdexcept>

namespace optigrad {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument("io: " + msg); }

ConeSet set_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "zero") return ConeSet::zero(j.at("dim").get<int>());
    if (type == "nonnegative") return ConeSet::nonnegative(j.at("dim").get<int>());
    if (type == "nonpositive") return ConeSet::nonpositive(j.at("dim").get<int>());
    if (type == "second_order") return ConeSet::second_order(j.at("dim").get<int>());
    if (type == "psd_triangle") return ConeSet::psd_triangle(j.at("side").get<int>());
    if (type == "equal_to") return ConeSet::equal_to(j.at("value").get<double>());
    if (type == "less_than") return ConeSet::less_than(j.at("value").get<double>());
    if (type == "greater_than") return ConeSet::greater_than(j.at("value").get<double>());
    fail("unknown set type '" + type + "'");
}

json set_to_json(const ConeSet& set) {
    json j;
    j["type"] = cone_tag_name(set.tag);
    switch (set.tag) {
        case ConeTag::EqualTo:
        case ConeTag::LessThan:
        case ConeTag::GreaterThan:
            j["value"] = set.value;
            break;
        case ConeTag::PsdTriangle:
            j["side"] = set.side;
            break;
        default:
            j["dim"] = set.dim;
            break;
    }
    return j;
}

ScalarQuadraticFunction objective_from_json(const json& j, int n_vars) {
    ScalarQuadraticFunction f;
    for (const auto& t : j.value("quadratic", json::array())) {
        if (!t.is_array() || t.size() != 3) fail("quadratic term must be [i, j, coeff]");
        f.quadratic_terms.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<double>()});
    }
    for (const auto& t : j.value("linear", json::array())) {
        if (!t.is_array() || t.size() != 2) fail("linear term must be [var, coeff]");
        f.affine.terms.push_back({t[0].get<int>(), t[1].get<double>()});
    }
    f.affine.constant = j.value("constant", 0.0);
    for (const auto& t : f.quadratic_terms) {
        if (t.var1 < 0 || t.var1 >= n_vars || t.var2 < 0 || t.var2 >= n_vars) {
            fail("quadratic term references an unknown variable");
        }
    }
    for (const auto& t : f.affine.terms) {
        if (t.var < 0 || t.var >= n_vars) fail("linear term references an unknown variable");
    }
    return f;
}

json objective_to_json(const ScalarQuadraticFunction& f) {
    json j;
    j["quadratic"] = json::array();
    for (const auto& t : f.quadratic_terms) j["quadratic"].push_back({t.var1, t.var2, t.coeff});
    j["linear"] = json::array();
    for (const auto& t : f.affine.terms) j["linear"].push_back({t.var, t.coeff});
    j["constant"] = f.affine.constant;
    return j;
}

VectorAffineFunction rows_from_json(const json& rows, const json& constants, int n_vars,
                                    int expected_dim) {
    if (!constants.is_array()) fail("'constants' must be an array");
    const int dim = expected_dim > 0 ? expected_dim : static_cast<int>(constants.size());
    if (static_cast<int>(constants.size()) != dim) fail("'constants' length does not match dim");
    VectorAffineFunction f;
    f.rows.resize(dim);
    for (int r = 0; r < dim; ++r) f.rows[r].constant = constants[r].get<double>();
    for (const auto& t : rows) {
        if (!t.is_array() || t.size() != 3) fail("row term must be [row, var, coeff]");
        const int r = t[0].get<int>();
        const int var = t[1].get<int>();
        if (r < 0 || r >= dim) fail("row index out of range");
        if (var < 0 || var >= n_vars) fail("row term references an unknown variable");
        f.rows[r].terms.push_back({var, t[2].get<double>()});
    }
    return f;
}

void rows_to_json(const VectorAffineFunction& f, json& out) {
    out["rows"] = json::array();
    out["constants"] = json::array();
    for (int r = 0; r < f.dim(); ++r) {
        for (const auto& t : f.rows[r].terms) out["rows"].push_back({r, t.var, t.coeff});
        out["constants"].push_back(f.rows[r].constant);
    }
}

}  // namespace

NamedProblem problem_from_json(const json& doc) {
    NamedProblem out;
    if (!doc.contains("variables") || !doc.at("variables").is_array()) {
        fail("'variables' must be an array of names");
    }
    for (const auto& name : doc.at("variables")) {
        out.variable_names.push_back(name.get<std::string>());
    }
    const int n_vars = static_cast<int>(out.variable_names.size());

    ScalarQuadraticFunction objective;
    if (doc.contains("objective")) objective = objective_from_json(doc.at("objective"), n_vars);

    std::vector<Constraint> constraints;
    for (const auto& cj : doc.value("constraints", json::array())) {
        Constraint cons;
        cons.id = cj.at("id").get<std::string>();
        cons.set = set_from_json(cj.at("set"));
        cons.function = rows_from_json(cj.value("rows", json::array()), cj.at("constants"),
                                       n_vars, cons.set.dim);
        constraints.push_back(std::move(cons));
    }
    out.model = build_problem(n_vars, std::move(objective), std::move(constraints));
    return out;
}

json problem_to_json(const NamedProblem& problem) {
    json doc;
    doc["variables"] = problem.variable_names;
    doc["objective"] = objective_to_json(problem.model.objective);
    doc["constraints"] = json::array();
    for (const auto& cons : problem.model.constraints) {
        json cj;
        cj["id"] = cons.id;
        rows_to_json(cons.function, cj);
        cj["set"] = set_to_json(cons.set);
        doc["constraints"].push_back(std::move(cj));
    }
    return doc;
}

TangentSpec tangent_from_json(const json& doc, const NamedProblem& problem) {
    TangentSpec spec;
    const int n_vars = problem.model.n_vars;
    if (doc.contains("seeds")) {
        for (const auto& t : doc.at("seeds")) {
            if (!t.is_array() || t.size() != 2) fail("seed must be [var, value]");
            const int var = t[0].get<int>();
            if (var < 0 || var >= n_vars) fail("seed references an unknown variable");
            spec.reverse.seeds[var] += t[1].get<double>();
        }
        return spec;
    }
    if (doc.contains("objective")) {
        spec.forward.objective = objective_from_json(doc.at("objective"), n_vars);
    }
    for (const auto& cj : doc.value("constraints", json::array())) {
        const std::string id = cj.at("id").get<std::string>();
        const Constraint* cons = problem.model.find_constraint(id);
        if (!cons) fail("tangent references unknown constraint '" + id + "'");
        spec.forward.constraints[id] =
            rows_from_json(cj.value("rows", json::array()), cj.at("constants"), n_vars,
                           cons->function.dim());
    }
    return spec;
}

json forward_tangent_to_json(const ForwardTangentSpec& spec) {
    json doc;
    doc["objective"] = objective_to_json(spec.objective);
    doc["constraints"] = json::array();
    for (const auto& [id, f] : spec.constraints) {
        json cj;
        cj["id"] = id;
        rows_to_json(f, cj);
        doc["constraints"].push_back(std::move(cj));
    }
    return doc;
}

json reverse_seeds_to_json(const ReverseSeedSpec& spec) {
    json doc;
    doc["seeds"] = json::array();
    for (const auto& [var, value] : spec.seeds) doc["seeds"].push_back({json(var), json(value)});
    return doc;
}

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& err) {
        fail("parse error in '" + path + "': " + err.what());
    }
    return doc;
}

}  // namespace

NamedProblem load_problem_file(const std::string& path) {
    return problem_from_json(load_json(path));
}

TangentSpec load_tangent_file(const std::string& path, const NamedProblem& problem) {
    return tangent_from_json(load_json(path), problem);
}

}  // namespace optigrad
