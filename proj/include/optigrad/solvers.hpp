#pragma once

#include <Eigen/Dense>

#include "optigrad/model.hpp"

namespace optigrad {

struct SolverSettings {
    double tol = 1e-9;
    int max_iter = 10000;
    bool verbose = false;
};

enum class SolveTag { Optimal, MaxIter, Infeasible, Unbounded, NumericalError };

struct SolveStatus {
    SolveTag tag = SolveTag::NumericalError;
    int iterations = 0;
    double primal_residual = 0;
    double dual_residual = 0;
    double gap = 0;

    bool optimal() const { return tag == SolveTag::Optimal; }
};

std::string solve_tag_name(SolveTag tag);

/// Primal-dual solution of a QPForm. Sign conventions:
///   Q x + c + G^T lambda + A^T mu = 0,  lambda >= 0,  lambda .* (h - G x) = 0.
struct QPSolution {
    Eigen::VectorXd x;
    Eigen::VectorXd lambda;  // inequality duals
    Eigen::VectorXd mu;      // equality duals
    double kkt_residual = 0;
};

/// Primal-dual solution of a ConicForm. Sign conventions:
///   A x + s = b, s in K;  A^T y + c = 0, y in K*;  c^T x + b^T y = 0.
struct ConicSolution {
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    Eigen::VectorXd s;
    double primal_residual = 0;
    double dual_residual = 0;
    double gap = 0;
};

/// Dense path-following interior point method with Mehrotra centering and an
/// active-set polish step. Requires Q positive semidefinite.
std::pair<QPSolution, SolveStatus> solve_qp(const QPForm& form,
                                            const SolverSettings& settings = {});

/// Operator-splitting solver on the homogeneous self-dual embedding with
/// over-relaxation 1.5, followed by a Newton polish of the normalized
/// residual map.
std::pair<ConicSolution, SolveStatus> solve_conic(const ConicForm& form,
                                                  const SolverSettings& settings = {});

}  // namespace optigrad
