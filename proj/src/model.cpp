#include "optigrad/model.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace optigrad {

namespace {

void check_variables(const ProblemModel& model) {
    auto check = [&](VariableId v) {
        if (v < 0 || v >= model.n_vars) {
            throw std::invalid_argument("variable index out of range: " + std::to_string(v));
        }
    };
    for (const auto& t : model.objective.affine.terms) check(t.var);
    for (const auto& t : model.objective.quadratic_terms) {
        check(t.var1);
        check(t.var2);
    }
    for (const auto& cons : model.constraints) {
        for (const auto& row : cons.function.rows) {
            for (const auto& t : row.terms) check(t.var);
        }
    }
}

bool is_polyhedral(const ConeSet& set) {
    switch (set.tag) {
        case ConeTag::Zero:
        case ConeTag::Nonnegative:
        case ConeTag::Nonpositive:
        case ConeTag::EqualTo:
        case ConeTag::LessThan:
        case ConeTag::GreaterThan:
            return true;
        default:
            return false;
    }
}

}  // namespace

double ScalarAffineFunction::coefficient(VariableId var) const {
    double c = 0;
    for (const auto& t : terms) {
        if (t.var == var) c += t.coeff;
    }
    return c;
}

double ScalarAffineFunction::evaluate(const Eigen::VectorXd& x) const {
    double v = constant;
    for (const auto& t : terms) v += t.coeff * x[t.var];
    return v;
}

void ScalarAffineFunction::canonicalize() {
    std::map<VariableId, double> merged;
    for (const auto& t : terms) merged[t.var] += t.coeff;
    terms.clear();
    for (const auto& [var, coeff] : merged) {
        if (coeff != 0.0) terms.push_back({var, coeff});
    }
}

double ScalarQuadraticFunction::evaluate(const Eigen::VectorXd& x) const {
    double v = affine.evaluate(x);
    for (const auto& t : quadratic_terms) {
        const double prod = x[t.var1] * x[t.var2];
        v += t.var1 == t.var2 ? 0.5 * t.coeff * prod : t.coeff * prod;
    }
    return v;
}

void ScalarQuadraticFunction::canonicalize() {
    affine.canonicalize();
    std::map<std::pair<VariableId, VariableId>, double> merged;
    for (const auto& t : quadratic_terms) {
        auto key = std::minmax(t.var1, t.var2);
        merged[{key.first, key.second}] += t.coeff;
    }
    quadratic_terms.clear();
    for (const auto& [key, coeff] : merged) {
        if (coeff != 0.0) quadratic_terms.push_back({key.first, key.second, coeff});
    }
}

Eigen::MatrixXd ScalarQuadraticFunction::q_matrix(int n_vars) const {
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n_vars, n_vars);
    for (const auto& t : quadratic_terms) {
        q(t.var1, t.var2) += t.coeff;
        if (t.var1 != t.var2) q(t.var2, t.var1) += t.coeff;
    }
    return q;
}

Eigen::VectorXd VectorAffineFunction::evaluate(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) out[i] = rows[i].evaluate(x);
    return out;
}

const Constraint* ProblemModel::find_constraint(const std::string& id) const {
    for (const auto& c : constraints) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

ProblemModel build_problem(int n_vars, ScalarQuadraticFunction objective,
                           std::vector<Constraint> constraints) {
    ProblemModel model;
    model.n_vars = n_vars;
    model.objective = std::move(objective);
    model.constraints = std::move(constraints);

    std::set<std::string> ids;
    for (auto& cons : model.constraints) {
        if (!ids.insert(cons.id).second) {
            throw std::invalid_argument("duplicate constraint id: " + cons.id);
        }
        if (cons.function.rows.empty()) {
            throw std::invalid_argument("constraint has no rows: " + cons.id);
        }
        if (cons.function.dim() != cons.set.dim) {
            throw std::invalid_argument("constraint dimension mismatch: " + cons.id);
        }
        for (auto& row : cons.function.rows) row.canonicalize();
    }
    model.objective.canonicalize();
    check_variables(model);
    return model;
}

ProblemClass classify_problem(const ProblemModel& model) {
    bool has_conic_set = false;
    for (const auto& cons : model.constraints) {
        if (!is_polyhedral(cons.set)) has_conic_set = true;
    }
    if (!model.objective.is_affine() && has_conic_set) {
        throw std::invalid_argument(
            "unsupported problem class: quadratic objective with conic constraints");
    }
    // Purely linear programs are valid in both classes; QP is preferred.
    return has_conic_set ? ProblemClass::Conic : ProblemClass::QP;
}

QPForm compile_qp_form(const ProblemModel& model) {
    if (classify_problem(model) != ProblemClass::QP) {
        throw std::invalid_argument("compile_qp_form: model is not QP-class");
    }
    int p = 0, m = 0;
    for (const auto& cons : model.constraints) {
        switch (cons.set.tag) {
            case ConeTag::Zero: m += cons.set.dim; break;
            case ConeTag::Nonpositive: p += cons.set.dim; break;
            default:
                throw std::invalid_argument(
                    "compile_qp_form: set not lowered to Zero/Nonpositive: " + cons.id);
        }
    }
    const int n = model.n_vars;
    QPForm form;
    form.Q = model.objective.q_matrix(n);
    form.c = Eigen::VectorXd::Zero(n);
    for (const auto& t : model.objective.affine.terms) form.c[t.var] += t.coeff;
    form.G = Eigen::MatrixXd::Zero(p, n);
    form.h = Eigen::VectorXd::Zero(p);
    form.A = Eigen::MatrixXd::Zero(m, n);
    form.b = Eigen::VectorXd::Zero(m);

    int ineq_off = 0, eq_off = 0;
    for (const auto& cons : model.constraints) {
        const bool eq = cons.set.tag == ConeTag::Zero;
        const int off = eq ? eq_off : ineq_off;
        for (int r = 0; r < cons.function.dim(); ++r) {
            const auto& row = cons.function.rows[r];
            if (eq) {
                // f(x) = 0  =>  A x = b with b = -constant
                for (const auto& t : row.terms) form.A(off + r, t.var) += t.coeff;
                form.b[off + r] = -row.constant;
            } else {
                // f(x) <= 0  =>  G x <= h with h = -constant
                for (const auto& t : row.terms) form.G(off + r, t.var) += t.coeff;
                form.h[off + r] = -row.constant;
            }
        }
        form.row_map[cons.id] = {eq ? RowBlock::Equality : RowBlock::Inequality, off,
                                 cons.function.dim()};
        (eq ? eq_off : ineq_off) += cons.function.dim();
    }
    return form;
}

ConicForm compile_conic_form(const ProblemModel& model) {
    if (!model.objective.is_affine()) {
        throw std::invalid_argument("compile_conic_form: objective must be affine");
    }
    auto cone_rank = [](ConeTag tag) {
        switch (tag) {
            case ConeTag::Zero: return 0;
            case ConeTag::Nonnegative: return 1;
            case ConeTag::SecondOrder: return 2;
            case ConeTag::PsdTriangle: return 3;
            default:
                throw std::invalid_argument(
                    "compile_conic_form: set not lowered to a supported cone");
        }
    };
    // Solver-friendly ordering: Zero, Nonnegative, SecondOrder, PsdTriangle.
    std::vector<const Constraint*> ordered;
    for (const auto& cons : model.constraints) ordered.push_back(&cons);
    std::stable_sort(ordered.begin(), ordered.end(), [&](const auto* a, const auto* b) {
        return cone_rank(a->set.tag) < cone_rank(b->set.tag);
    });

    const int n = model.n_vars;
    int m = 0;
    for (const auto* cons : ordered) m += cons->set.dim;

    ConicForm form;
    form.c = Eigen::VectorXd::Zero(n);
    for (const auto& t : model.objective.affine.terms) form.c[t.var] += t.coeff;
    form.A = Eigen::MatrixXd::Zero(m, n);
    form.b = Eigen::VectorXd::Zero(m);

    int off = 0;
    for (const auto* cons : ordered) {
        // f(x) in K  =>  s = b - A x = f(x), so A = -coeffs, b = constant
        for (int r = 0; r < cons->function.dim(); ++r) {
            const auto& row = cons->function.rows[r];
            for (const auto& t : row.terms) form.A(off + r, t.var) -= t.coeff;
            form.b[off + r] = row.constant;
        }
        form.cones.blocks.push_back(cons->set);
        form.row_map[cons->id] = {RowBlock::Inequality, off, cons->set.dim};
        off += cons->set.dim;
    }
    return form;
}

}  // namespace optigrad
