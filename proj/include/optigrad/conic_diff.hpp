#pragma once

#include <Eigen/Dense>

#include "optigrad/model.hpp"
#include "optigrad/solvers.hpp"

namespace optigrad {

/// Skew-symmetric data matrix of the homogeneous self-dual embedding:
///   [  0    A^T  c ]
///   [ -A    0    b ]
///   [ -c^T -b^T  0 ]
Eigen::MatrixXd assemble_skew_q(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                const Eigen::VectorXd& c);

/// Right inverse of the solution-recovery map: z = (x, y - s, 1). Throws if
/// the complementarity round trip through the dual-cone projection fails.
Eigen::VectorXd embed_solution(const ConicForm& form, const ConicSolution& sol);

/// N(z, Q) = ((Q - I) Pi + I)(z / |z_last|), Pi the projection onto
/// R^n x K* x R_+.
Eigen::VectorXd normalized_residual(const Eigen::VectorXd& z, const Eigen::MatrixXd& q,
                                    const ConeProduct& cones, int n);

/// Derivative of the normalized residual in z at an embedded solution,
/// ((Q - I) DPi(z) + I) / w. The term that vanishes at solutions is dropped;
/// with check_residual the residual is verified small enough to justify it.
Eigen::MatrixXd d_z_residual(const Eigen::VectorXd& z, const Eigen::MatrixXd& q,
                             const ConeProduct& cones, int n, bool check_residual = true);

struct ConicTangentOut {
    Eigen::VectorXd dx;
    Eigen::VectorXd dy;
    Eigen::VectorXd ds;
    bool approximate = false;
};

struct ConicReverseOut {
    Eigen::MatrixXd gA;
    Eigen::VectorXd gb;
    Eigen::VectorXd gc;
    bool approximate = false;
};

/// Pushes (dA, db, dc) through the embedding: dz solves the implicit system
/// of the normalized residual map, then the solution-recovery derivative
/// maps dz to (dx, dy, ds). The linear solve is minimum-norm: the embedding
/// ray is structurally in the nullspace and is annihilated by the recovery
/// derivative.
ConicTangentOut forward_differentiate_conic(const ConicForm& form, const ConicSolution& sol,
                                            const Eigen::MatrixXd& dA,
                                            const Eigen::VectorXd& db,
                                            const Eigen::VectorXd& dc);

/// Adjoint of the forward map; gradients extracted from the skew layout.
ConicReverseOut reverse_differentiate_conic(const ConicForm& form, const ConicSolution& sol,
                                            const Eigen::VectorXd& dl_dx,
                                            const Eigen::VectorXd& dl_dy,
                                            const Eigen::VectorXd& dl_ds);

}  // namespace optigrad
