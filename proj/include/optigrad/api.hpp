#pragma once

#include <map>
#include <optional>
#include <string>

#include "optigrad/bridges.hpp"
#include "optigrad/conic_diff.hpp"
#include "optigrad/model.hpp"
#include "optigrad/qp_diff.hpp"
#include "optigrad/solvers.hpp"

namespace optigrad {

/// Meta-solver: caches the user model, lowers it through bridges, solves
/// with the class-appropriate inner solver, and exposes forward/reverse
/// differentiation through attribute-style setters and getters.
///
/// Tangent conventions:
///  - Forward inputs are perturbation functions added to the objective or a
///    constraint function; unset inputs default to zero.
///  - Reverse outputs are gradient functions: per-variable coefficients are
///    the sensitivities of the seeded loss to the matching function
///    coefficients; the constant of a constraint gradient is the sensitivity
///    to relaxing the constraint's right-hand side (set value).
class DiffEngine {
  public:
    explicit DiffEngine(ProblemModel model, SolverSettings settings = {});

    /// Debug switch: force the QP or conic differentiation path for models
    /// valid in both classes.
    void force_class(ProblemClass cls) { forced_class_ = cls; }

    SolveStatus optimize();

    bool solved() const { return solved_; }
    ProblemClass problem_class() const;
    const ProblemModel& model() const { return model_; }
    double variable_value(VariableId var) const;
    Eigen::VectorXd primal() const;
    /// Dual of a constraint, mapped back through its bridge.
    Eigen::VectorXd constraint_dual(const std::string& id) const;

    // -- forward-mode inputs ------------------------------------------------
    void set_forward_objective(const ScalarQuadraticFunction& tangent);
    void set_forward_constraint(const std::string& id, const VectorAffineFunction& tangent);
    void set_forward_constraint(const std::string& id, const ScalarAffineFunction& tangent);

    // -- reverse-mode inputs ------------------------------------------------
    void set_reverse_variable(VariableId var, double seed);

    // input readback
    const ScalarQuadraticFunction& forward_objective() const { return in_objective_; }
    const VectorAffineFunction* forward_constraint(const std::string& id) const;
    double reverse_variable(VariableId var) const;

    void forward_differentiate();
    void reverse_differentiate();

    // -- outputs ------------------------------------------------------------
    double get_forward_variable(VariableId var) const;
    const ScalarQuadraticFunction& get_reverse_objective() const;
    const VectorAffineFunction& get_reverse_constraint(const std::string& id) const;

    bool approximate() const { return approximate_; }

    /// Clears all tangent inputs and outputs; the solution is retained.
    void reset_tangents();

  private:
    void require_solved() const;
    QPTangentIn assemble_qp_tangent() const;
    void assemble_conic_tangent(Eigen::MatrixXd& dA, Eigen::VectorXd& db,
                                Eigen::VectorXd& dc) const;
    Eigen::VectorXd reverse_seed_vector() const;
    void store_qp_reverse(const QPReverseOut& rev);
    void store_conic_reverse(const ConicReverseOut& rev);

    ProblemModel model_;
    SolverSettings settings_;
    std::optional<ProblemClass> forced_class_;

    // populated by optimize()
    bool solved_ = false;
    ProblemClass class_ = ProblemClass::QP;
    LoweredModel lowered_;
    QPForm qp_form_;
    ConicForm conic_form_;
    QPSolution qp_solution_;
    ConicSolution conic_solution_;
    SolveStatus status_;

    // differentiation state
    ScalarQuadraticFunction in_objective_;
    std::map<std::string, VectorAffineFunction> in_constraints_;
    std::map<VariableId, double> in_seeds_;
    bool forward_done_ = false;
    bool reverse_done_ = false;
    bool approximate_ = false;
    Eigen::VectorXd out_variable_tangents_;
    ScalarQuadraticFunction out_objective_gradient_;
    std::map<std::string, VectorAffineFunction> out_constraint_gradients_;
};

}  // namespace optigrad
