#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "optigrad/cones.hpp"

namespace optigrad {

using VariableId = int;

/// sum_k terms[k].coeff * x_{terms[k].var} + constant
struct ScalarAffineFunction {
    struct Term {
        VariableId var;
        double coeff;
    };
    std::vector<Term> terms;
    double constant = 0;

    double coefficient(VariableId var) const;
    double evaluate(const Eigen::VectorXd& x) const;
    /// Merges duplicate terms and drops zeros.
    void canonicalize();
};

/// (1/2) x^T Q x + affine, with Q assembled symmetric from the upper-triangle
/// quadratic terms: term (i, j, v) with i <= j sets Q_ij = Q_ji = v.
struct ScalarQuadraticFunction {
    struct QuadTerm {
        VariableId var1;
        VariableId var2;
        double coeff;
    };
    std::vector<QuadTerm> quadratic_terms;
    ScalarAffineFunction affine;

    bool is_affine() const { return quadratic_terms.empty(); }
    double evaluate(const Eigen::VectorXd& x) const;
    void canonicalize();
    /// Dense symmetric Q over n variables under the (1/2) x^T Q x convention.
    Eigen::MatrixXd q_matrix(int n_vars) const;
};

struct VectorAffineFunction {
    std::vector<ScalarAffineFunction> rows;

    int dim() const { return static_cast<int>(rows.size()); }
    Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const;
};

struct Constraint {
    std::string id;
    VectorAffineFunction function;  // scalar constraints are 1-row vectors
    ConeSet set;
};

struct ProblemModel {
    int n_vars = 0;
    ScalarQuadraticFunction objective;  // minimization only
    std::vector<Constraint> constraints;

    const Constraint* find_constraint(const std::string& id) const;
};

enum class ProblemClass { QP, Conic };

/// Validates and canonicalizes a model assembled by the caller.
ProblemModel build_problem(int n_vars, ScalarQuadraticFunction objective,
                           std::vector<Constraint> constraints);

/// QP if the objective is quadratic or all sets are polyhedral; Conic if the
/// objective is affine and a SecondOrder/PsdTriangle set is present.
/// Quadratic objective combined with SecondOrder/PsdTriangle is unsupported.
ProblemClass classify_problem(const ProblemModel& model);

enum class RowBlock { Equality, Inequality };

struct RowRange {
    RowBlock block = RowBlock::Inequality;
    int offset = 0;
    int len = 0;
};

/// min (1/2) x^T Q x + c^T x  s.t.  G x <= h, A x = b
struct QPForm {
    Eigen::MatrixXd Q;
    Eigen::VectorXd c;
    Eigen::MatrixXd G;
    Eigen::VectorXd h;
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    std::map<std::string, RowRange> row_map;

    int n() const { return static_cast<int>(c.size()); }
    int p() const { return static_cast<int>(h.size()); }
    int m() const { return static_cast<int>(b.size()); }
};

/// min c^T x  s.t.  A x + s = b, s in K (K a product of cones, rows ordered
/// Zero, Nonnegative, SecondOrder, PsdTriangle).
struct ConicForm {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::VectorXd c;
    ConeProduct cones;
    std::map<std::string, RowRange> row_map;  // block always Inequality

    int n() const { return static_cast<int>(c.size()); }
    int m() const { return static_cast<int>(b.size()); }
};

/// Requires a model already lowered to Zero/Nonpositive sets (see bridges).
QPForm compile_qp_form(const ProblemModel& model);

/// Requires a model already lowered to Zero/Nonnegative/SecondOrder/
/// PsdTriangle sets and an affine objective.
ConicForm compile_conic_form(const ProblemModel& model);

}  // namespace optigrad
