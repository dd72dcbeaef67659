#include "optigrad/qp_diff.hpp"

#include <stdexcept>

namespace optigrad {

namespace {

// LU with a pivot-based degeneracy check; rank-revealing fallback.
Eigen::VectorXd solve_kkt(const Eigen::MatrixXd& mat, const Eigen::VectorXd& rhs,
                          bool* approximate) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(mat);
    const double scale = mat.cwiseAbs().maxCoeff();
    const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (min_pivot > 1e-11 * std::max(1.0, scale)) {
        return lu.solve(rhs);
    }
    if (approximate) *approximate = true;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    cod.setThreshold(1e-11);
    cod.compute(mat);
    return cod.solve(rhs);
}

}  // namespace

QPTangentIn QPTangentIn::zero(const QPForm& form) {
    QPTangentIn t;
    t.dQ = Eigen::MatrixXd::Zero(form.n(), form.n());
    t.dc = Eigen::VectorXd::Zero(form.n());
    t.dG = Eigen::MatrixXd::Zero(form.p(), form.n());
    t.dh = Eigen::VectorXd::Zero(form.p());
    t.dA = Eigen::MatrixXd::Zero(form.m(), form.n());
    t.db = Eigen::VectorXd::Zero(form.m());
    return t;
}

Eigen::MatrixXd build_kkt_jacobian(const QPForm& form, const QPSolution& sol) {
    const int n = form.n(), p = form.p(), m = form.m();
    Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(n + p + m, n + p + m);
    mat.topLeftCorner(n, n) = form.Q;
    if (p > 0) {
        mat.block(0, n, n, p) = form.G.transpose();
        mat.block(n, 0, p, n) = sol.lambda.asDiagonal() * form.G;
        mat.block(n, n, p, p) =
            (form.G * sol.x - form.h).asDiagonal();
    }
    if (m > 0) {
        mat.block(0, n + p, n, m) = form.A.transpose();
        mat.block(n + p, 0, m, n) = form.A;
    }
    return mat;
}

QPTangentOut forward_differentiate_qp(const QPForm& form, const QPSolution& sol,
                                      const QPTangentIn& tangent) {
    const int n = form.n(), p = form.p(), m = form.m();
    Eigen::VectorXd rhs(n + p + m);
    rhs.head(n) = tangent.dQ * sol.x + tangent.dc;
    if (p > 0) rhs.head(n) += tangent.dG.transpose() * sol.lambda;
    if (m > 0) rhs.head(n) += tangent.dA.transpose() * sol.mu;
    if (p > 0) {
        rhs.segment(n, p) = sol.lambda.cwiseProduct(tangent.dG * sol.x - tangent.dh);
    }
    if (m > 0) rhs.tail(m) = tangent.dA * sol.x - tangent.db;

    QPTangentOut out;
    Eigen::VectorXd step =
        solve_kkt(build_kkt_jacobian(form, sol), -rhs, &out.approximate);
    out.dx = step.head(n);
    out.dlambda = step.segment(n, p);
    out.dmu = step.tail(m);
    return out;
}

QPReverseOut reverse_differentiate_qp(const QPForm& form, const QPSolution& sol,
                                      const Eigen::VectorXd& dl_dx) {
    const int n = form.n(), p = form.p(), m = form.m();
    if (static_cast<int>(dl_dx.size()) != n) {
        throw std::invalid_argument("reverse_differentiate_qp: seed dimension mismatch");
    }
    Eigen::VectorXd seed = Eigen::VectorXd::Zero(n + p + m);
    seed.head(n) = dl_dx;

    QPReverseOut out;
    Eigen::VectorXd g = solve_kkt(build_kkt_jacobian(form, sol).transpose(), -seed,
                                  &out.approximate);
    const Eigen::VectorXd gx = g.head(n);
    const Eigen::VectorXd glam = g.segment(n, p);
    const Eigen::VectorXd gmu = g.tail(m);

    // Each block is the adjoint of the forward rhs assembly.
    out.gc = gx;
    out.gQ = 0.5 * (gx * sol.x.transpose() + sol.x * gx.transpose());
    out.gG = sol.lambda * gx.transpose() +
             sol.lambda.cwiseProduct(glam) * sol.x.transpose();
    out.gh = -sol.lambda.cwiseProduct(glam);
    out.gA = sol.mu * gx.transpose() + gmu * sol.x.transpose();
    out.gb = -gmu;
    return out;
}

}  // namespace optigrad
