#pragma once

#include <Eigen/Dense>

#include "optigrad/model.hpp"
#include "optigrad/solvers.hpp"

namespace optigrad {

/// Parameter perturbations of a QPForm.
struct QPTangentIn {
    Eigen::MatrixXd dQ;  // symmetric
    Eigen::VectorXd dc;
    Eigen::MatrixXd dG;
    Eigen::VectorXd dh;
    Eigen::MatrixXd dA;
    Eigen::VectorXd db;

    static QPTangentIn zero(const QPForm& form);
};

struct QPTangentOut {
    Eigen::VectorXd dx;
    Eigen::VectorXd dlambda;
    Eigen::VectorXd dmu;
    bool approximate = false;  // least-squares fallback was used
};

struct QPReverseOut {
    Eigen::MatrixXd gQ;  // symmetrized
    Eigen::VectorXd gc;
    Eigen::MatrixXd gG;
    Eigen::VectorXd gh;
    Eigen::MatrixXd gA;
    Eigen::VectorXd gb;
    bool approximate = false;
};

/// Jacobian of the reduced KKT system at the solution:
///   [ Q           G^T          A^T ]
///   [ D(lambda)G  D(Gx - h)    0   ]
///   [ A           0            0   ]
/// The middle block row is the differentiated complementarity condition
/// lambda_i (G x - h)_i = 0.
Eigen::MatrixXd build_kkt_jacobian(const QPForm& form, const QPSolution& sol);

/// Solves M [dx; dlambda; dmu] = -rhs with
///   rhs = [dQ x + dc + dG^T lambda + dA^T mu;
///          D(lambda)(dG x - dh);
///          dA x - db].
/// Falls back to a minimum-norm least-squares solve when M is rank deficient
/// (non-strict complementarity) and flags the result approximate.
QPTangentOut forward_differentiate_qp(const QPForm& form, const QPSolution& sol,
                                      const QPTangentIn& tangent);

/// Adjoint of the forward map: solves M^T g = -[dl_dx; 0; 0] and assembles
/// the parameter gradients as the exact adjoint of the rhs assembly.
QPReverseOut reverse_differentiate_qp(const QPForm& form, const QPSolution& sol,
                                      const Eigen::VectorXd& dl_dx);

}  // namespace optigrad
