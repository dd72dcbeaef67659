#include "optigrad/api.hpp"

#include <stdexcept>

namespace optigrad {

namespace {

void check_affine_rows(const VectorAffineFunction& f, int expected, const std::string& id) {
    if (f.dim() != expected) {
        throw std::invalid_argument("tangent dimension mismatch for constraint " + id);
    }
}

}  // namespace

DiffEngine::DiffEngine(ProblemModel model, SolverSettings settings)
    : model_(std::move(model)), settings_(settings) {}

ProblemClass DiffEngine::problem_class() const {
    return forced_class_.value_or(classify_problem(model_));
}

SolveStatus DiffEngine::optimize() {
    class_ = problem_class();
    if (forced_class_ && *forced_class_ == ProblemClass::Conic &&
        !model_.objective.is_affine()) {
        throw std::invalid_argument("conic path requires an affine objective");
    }
    lowered_ = lower_model(model_, class_);
    solved_ = false;
    reset_tangents();
    if (class_ == ProblemClass::QP) {
        qp_form_ = compile_qp_form(lowered_.model);
        std::tie(qp_solution_, status_) = solve_qp(qp_form_, settings_);
    } else {
        conic_form_ = compile_conic_form(lowered_.model);
        std::tie(conic_solution_, status_) = solve_conic(conic_form_, settings_);
    }
    solved_ = status_.optimal();
    return status_;
}

void DiffEngine::require_solved() const {
    if (!solved_) throw std::logic_error("model is not solved to optimality");
}

double DiffEngine::variable_value(VariableId var) const {
    require_solved();
    const Eigen::VectorXd& x = class_ == ProblemClass::QP ? qp_solution_.x : conic_solution_.x;
    if (var < 0 || var >= x.size()) throw std::invalid_argument("unknown variable");
    return x[var];
}

Eigen::VectorXd DiffEngine::primal() const {
    require_solved();
    return class_ == ProblemClass::QP ? qp_solution_.x : conic_solution_.x;
}

Eigen::VectorXd DiffEngine::constraint_dual(const std::string& id) const {
    require_solved();
    for (size_t i = 0; i < lowered_.model.constraints.size(); ++i) {
        const auto& cons = lowered_.model.constraints[i];
        if (cons.id != id) continue;
        Eigen::VectorXd dual;
        if (class_ == ProblemClass::QP) {
            const RowRange range = qp_form_.row_map.at(id);
            dual = range.block == RowBlock::Equality
                       ? qp_solution_.mu.segment(range.offset, range.len)
                       : qp_solution_.lambda.segment(range.offset, range.len);
        } else {
            const RowRange range = conic_form_.row_map.at(id);
            dual = conic_solution_.y.segment(range.offset, range.len);
        }
        return unbridge_dual(lowered_.bridges[i], dual);
    }
    throw std::invalid_argument("unknown constraint id: " + id);
}

void DiffEngine::set_forward_objective(const ScalarQuadraticFunction& tangent) {
    ScalarQuadraticFunction t = tangent;
    t.canonicalize();
    for (const auto& term : t.affine.terms) {
        if (term.var < 0 || term.var >= model_.n_vars) {
            throw std::invalid_argument("objective tangent references unknown variable");
        }
    }
    for (const auto& term : t.quadratic_terms) {
        if (term.var1 >= model_.n_vars || term.var2 >= model_.n_vars) {
            throw std::invalid_argument("objective tangent references unknown variable");
        }
    }
    in_objective_ = std::move(t);
}

void DiffEngine::set_forward_constraint(const std::string& id,
                                        const VectorAffineFunction& tangent) {
    const Constraint* cons = model_.find_constraint(id);
    if (!cons) throw std::invalid_argument("unknown constraint id: " + id);
    check_affine_rows(tangent, cons->function.dim(), id);
    in_constraints_[id] = tangent;
}

void DiffEngine::set_forward_constraint(const std::string& id,
                                        const ScalarAffineFunction& tangent) {
    VectorAffineFunction f;
    f.rows.push_back(tangent);
    set_forward_constraint(id, f);
}

void DiffEngine::set_reverse_variable(VariableId var, double seed) {
    if (var < 0 || var >= model_.n_vars) throw std::invalid_argument("unknown variable");
    in_seeds_[var] = seed;
}

const VectorAffineFunction* DiffEngine::forward_constraint(const std::string& id) const {
    auto it = in_constraints_.find(id);
    return it == in_constraints_.end() ? nullptr : &it->second;
}

double DiffEngine::reverse_variable(VariableId var) const {
    auto it = in_seeds_.find(var);
    return it == in_seeds_.end() ? 0.0 : it->second;
}

QPTangentIn DiffEngine::assemble_qp_tangent() const {
    QPTangentIn t = QPTangentIn::zero(qp_form_);
    t.dQ = in_objective_.q_matrix(model_.n_vars);
    for (const auto& term : in_objective_.affine.terms) t.dc[term.var] += term.coeff;
    for (size_t i = 0; i < lowered_.model.constraints.size(); ++i) {
        const auto& cons = lowered_.model.constraints[i];
        auto it = in_constraints_.find(cons.id);
        if (it == in_constraints_.end()) continue;
        VectorAffineFunction bridged = map_forward_tangent(lowered_.bridges[i], it->second);
        const RowRange range = qp_form_.row_map.at(cons.id);
        for (int r = 0; r < range.len; ++r) {
            const auto& row = bridged.rows[r];
            if (range.block == RowBlock::Inequality) {
                for (const auto& term : row.terms) t.dG(range.offset + r, term.var) += term.coeff;
                t.dh[range.offset + r] -= row.constant;
            } else {
                for (const auto& term : row.terms) t.dA(range.offset + r, term.var) += term.coeff;
                t.db[range.offset + r] -= row.constant;
            }
        }
    }
    return t;
}

void DiffEngine::assemble_conic_tangent(Eigen::MatrixXd& dA, Eigen::VectorXd& db,
                                        Eigen::VectorXd& dc) const {
    if (!in_objective_.is_affine()) {
        throw std::invalid_argument("conic path accepts affine objective tangents only");
    }
    dA = Eigen::MatrixXd::Zero(conic_form_.m(), conic_form_.n());
    db = Eigen::VectorXd::Zero(conic_form_.m());
    dc = Eigen::VectorXd::Zero(conic_form_.n());
    for (const auto& term : in_objective_.affine.terms) dc[term.var] += term.coeff;
    for (size_t i = 0; i < lowered_.model.constraints.size(); ++i) {
        const auto& cons = lowered_.model.constraints[i];
        auto it = in_constraints_.find(cons.id);
        if (it == in_constraints_.end()) continue;
        VectorAffineFunction bridged = map_forward_tangent(lowered_.bridges[i], it->second);
        const RowRange range = conic_form_.row_map.at(cons.id);
        for (int r = 0; r < range.len; ++r) {
            const auto& row = bridged.rows[r];
            for (const auto& term : row.terms) dA(range.offset + r, term.var) -= term.coeff;
            db[range.offset + r] += row.constant;
        }
    }
}

void DiffEngine::forward_differentiate() {
    require_solved();
    if (class_ == ProblemClass::QP) {
        QPTangentOut out = forward_differentiate_qp(qp_form_, qp_solution_,
                                                    assemble_qp_tangent());
        out_variable_tangents_ = out.dx;
        approximate_ = approximate_ || out.approximate;
    } else {
        Eigen::MatrixXd dA;
        Eigen::VectorXd db, dc;
        assemble_conic_tangent(dA, db, dc);
        ConicTangentOut out =
            forward_differentiate_conic(conic_form_, conic_solution_, dA, db, dc);
        out_variable_tangents_ = out.dx;
        approximate_ = approximate_ || out.approximate;
    }
    forward_done_ = true;
}

Eigen::VectorXd DiffEngine::reverse_seed_vector() const {
    Eigen::VectorXd seed = Eigen::VectorXd::Zero(model_.n_vars);
    for (const auto& [var, value] : in_seeds_) seed[var] = value;
    return seed;
}

void DiffEngine::store_qp_reverse(const QPReverseOut& rev) {
    out_objective_gradient_ = {};
    for (int i = 0; i < model_.n_vars; ++i) {
        for (int j = i; j < model_.n_vars; ++j) {
            const double coeff = i == j ? rev.gQ(i, i) : 2.0 * rev.gQ(i, j);
            if (coeff != 0.0) out_objective_gradient_.quadratic_terms.push_back({i, j, coeff});
        }
        if (rev.gc[i] != 0.0) out_objective_gradient_.affine.terms.push_back({i, rev.gc[i]});
    }
    out_constraint_gradients_.clear();
    for (size_t ci = 0; ci < lowered_.model.constraints.size(); ++ci) {
        const auto& cons = lowered_.model.constraints[ci];
        const RowRange range = qp_form_.row_map.at(cons.id);
        VectorAffineFunction grad;
        for (int r = 0; r < range.len; ++r) {
            ScalarAffineFunction row;
            if (range.block == RowBlock::Inequality) {
                for (int v = 0; v < model_.n_vars; ++v) {
                    const double coeff = rev.gG(range.offset + r, v);
                    if (coeff != 0.0) row.terms.push_back({v, coeff});
                }
                row.constant = rev.gh[range.offset + r];
            } else {
                for (int v = 0; v < model_.n_vars; ++v) {
                    const double coeff = rev.gA(range.offset + r, v);
                    if (coeff != 0.0) row.terms.push_back({v, coeff});
                }
                row.constant = rev.gb[range.offset + r];
            }
            grad.rows.push_back(std::move(row));
        }
        out_constraint_gradients_[cons.id] =
            map_reverse_tangent(lowered_.bridges[ci], grad);
    }
}

void DiffEngine::store_conic_reverse(const ConicReverseOut& rev) {
    out_objective_gradient_ = {};
    for (int i = 0; i < model_.n_vars; ++i) {
        if (rev.gc[i] != 0.0) out_objective_gradient_.affine.terms.push_back({i, rev.gc[i]});
    }
    out_constraint_gradients_.clear();
    for (size_t ci = 0; ci < lowered_.model.constraints.size(); ++ci) {
        const auto& cons = lowered_.model.constraints[ci];
        const RowRange range = conic_form_.row_map.at(cons.id);
        VectorAffineFunction grad;
        for (int r = 0; r < range.len; ++r) {
            ScalarAffineFunction row;
            for (int v = 0; v < model_.n_vars; ++v) {
                const double coeff = -rev.gA(range.offset + r, v);
                if (coeff != 0.0) row.terms.push_back({v, coeff});
            }
            row.constant = -rev.gb[range.offset + r];
            grad.rows.push_back(std::move(row));
        }
        out_constraint_gradients_[cons.id] =
            map_reverse_tangent(lowered_.bridges[ci], grad);
    }
}

void DiffEngine::reverse_differentiate() {
    require_solved();
    const Eigen::VectorXd seed = reverse_seed_vector();
    if (class_ == ProblemClass::QP) {
        QPReverseOut rev = reverse_differentiate_qp(qp_form_, qp_solution_, seed);
        approximate_ = approximate_ || rev.approximate;
        store_qp_reverse(rev);
    } else {
        ConicReverseOut rev = reverse_differentiate_conic(
            conic_form_, conic_solution_, seed,
            Eigen::VectorXd::Zero(conic_form_.m()), Eigen::VectorXd::Zero(conic_form_.m()));
        approximate_ = approximate_ || rev.approximate;
        store_conic_reverse(rev);
    }
    reverse_done_ = true;
}

double DiffEngine::get_forward_variable(VariableId var) const {
    if (!forward_done_) throw std::logic_error("forward_differentiate has not been run");
    if (var < 0 || var >= model_.n_vars) throw std::invalid_argument("unknown variable");
    return out_variable_tangents_[var];
}

const ScalarQuadraticFunction& DiffEngine::get_reverse_objective() const {
    if (!reverse_done_) throw std::logic_error("reverse_differentiate has not been run");
    return out_objective_gradient_;
}

const VectorAffineFunction& DiffEngine::get_reverse_constraint(const std::string& id) const {
    if (!reverse_done_) throw std::logic_error("reverse_differentiate has not been run");
    auto it = out_constraint_gradients_.find(id);
    if (it == out_constraint_gradients_.end()) {
        throw std::invalid_argument("unknown constraint id: " + id);
    }
    return it->second;
}

void DiffEngine::reset_tangents() {
    in_objective_ = {};
    in_constraints_.clear();
    in_seeds_.clear();
    forward_done_ = false;
    reverse_done_ = false;
    approximate_ = false;
    out_variable_tangents_.resize(0);
    out_objective_gradient_ = {};
    out_constraint_gradients_.clear();
}

}  // namespace optigrad
