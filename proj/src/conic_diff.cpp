#include "optigrad/conic_diff.hpp"

#include <stdexcept>

namespace optigrad {

namespace {

double inf_norm(const Eigen::VectorXd& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

Eigen::VectorXd project_dual_product(const ConeProduct& cones, const Eigen::VectorXd& v) {
    Eigen::VectorXd out(v.size());
    int off = 0;
    for (const auto& cone : cones.blocks) {
        out.segment(off, cone.dim) = project_dual(cone, v.segment(off, cone.dim));
        off += cone.dim;
    }
    return out;
}

Eigen::MatrixXd project_dual_product_jacobian(const ConeProduct& cones,
                                              const Eigen::VectorXd& v) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(v.size(), v.size());
    int off = 0;
    for (const auto& cone : cones.blocks) {
        out.block(off, off, cone.dim, cone.dim) =
            project_dual_jacobian(cone, v.segment(off, cone.dim));
        off += cone.dim;
    }
    return out;
}

// Minimum-norm least-squares solve; the HSDE ray makes the system matrix
// rank deficient by one even at clean solutions, so a rank-revealing
// decomposition is always used. Deficiency beyond the structural ray is
// flagged approximate.
Eigen::VectorXd solve_min_norm(const Eigen::MatrixXd& mat, const Eigen::VectorXd& rhs,
                               bool* approximate) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    cod.setThreshold(1e-7);
    cod.compute(mat);
    if (approximate && cod.rank() < mat.rows() - 1) *approximate = true;
    return cod.solve(rhs);
}

struct RecoveryDerivative {
    // Blocks of the derivative of (x, y, s) = phi(u, v, w), with the 1/w
    // quotient-rule terms kept explicit.
    Eigen::MatrixXd dpi_dual;  // DPi_{K*}(v)
    Eigen::VectorXd x, y, s;
    double w;
    int n, m;

    Eigen::VectorXd apply(const Eigen::VectorXd& dz) const {
        const Eigen::VectorXd du = dz.head(n);
        const Eigen::VectorXd dv = dz.segment(n, m);
        const double dw = dz[n + m];
        Eigen::VectorXd out(n + 2 * m);
        out.head(n) = (du - x * dw) / w;
        out.segment(n, m) = (dpi_dual * dv - y * dw) / w;
        out.tail(m) = (dpi_dual * dv - dv - s * dw) / w;
        return out;
    }

    Eigen::VectorXd apply_transpose(const Eigen::VectorXd& g_xyz) const {
        const Eigen::VectorXd gx = g_xyz.head(n);
        const Eigen::VectorXd gy = g_xyz.segment(n, m);
        const Eigen::VectorXd gs = g_xyz.tail(m);
        Eigen::VectorXd out(n + m + 1);
        out.head(n) = gx / w;
        out.segment(n, m) = (dpi_dual.transpose() * (gy + gs) - gs) / w;
        out[n + m] = -(x.dot(gx) + y.dot(gy) + s.dot(gs)) / w;
        return out;
    }
};

RecoveryDerivative recovery_derivative(const ConicForm& form, const ConicSolution& sol,
                                       const Eigen::VectorXd& z) {
    RecoveryDerivative d;
    d.n = form.n();
    d.m = form.m();
    d.w = z[d.n + d.m];
    d.x = sol.x;
    d.y = sol.y;
    d.s = sol.s;
    d.dpi_dual = project_dual_product_jacobian(form.cones, z.segment(d.n, d.m));
    return d;
}

}  // namespace

Eigen::MatrixXd assemble_skew_q(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                const Eigen::VectorXd& c) {
    const int m = static_cast<int>(a.rows());
    const int n = static_cast<int>(a.cols());
    if (b.size() != m || c.size() != n) {
        throw std::invalid_argument("assemble_skew_q: dimension mismatch");
    }
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n + m + 1, n + m + 1);
    q.block(0, n, n, m) = a.transpose();
    q.block(n, 0, m, n) = -a;
    q.block(0, n + m, n, 1) = c;
    q.block(n, n + m, m, 1) = b;
    q.block(n + m, 0, 1, n) = -c.transpose();
    q.block(n + m, n, 1, m) = -b.transpose();
    return q;
}

Eigen::VectorXd embed_solution(const ConicForm& form, const ConicSolution& sol) {
    const int n = form.n(), m = form.m();
    Eigen::VectorXd z(n + m + 1);
    z.head(n) = sol.x;
    z.segment(n, m) = sol.y - sol.s;
    z[n + m] = 1.0;
    // phi must round-trip: Pi_{K*}(y - s) = y under complementarity.
    Eigen::VectorXd projected = project_dual_product(form.cones, z.segment(n, m));
    if (inf_norm(projected - sol.y) > 1e-5 * (1.0 + inf_norm(sol.y))) {
        throw std::invalid_argument(
            "embed_solution: complementarity violation, phi round trip failed");
    }
    return z;
}

Eigen::VectorXd normalized_residual(const Eigen::VectorXd& z, const Eigen::MatrixXd& q,
                                    const ConeProduct& cones, int n) {
    const int size = static_cast<int>(z.size());
    const double w = z[size - 1];
    if (std::abs(w) < 1e-12) {
        throw std::invalid_argument("normalized_residual: z_last is (near) zero");
    }
    const Eigen::VectorXd z_hat = z / std::abs(w);
    const Eigen::VectorXd pi = pi_hsde(z_hat, cones, n).value;
    return (q - Eigen::MatrixXd::Identity(size, size)) * pi + z_hat;
}

Eigen::MatrixXd d_z_residual(const Eigen::VectorXd& z, const Eigen::MatrixXd& q,
                             const ConeProduct& cones, int n, bool check_residual) {
    if (check_residual) {
        const double res = inf_norm(normalized_residual(z, q, cones, n));
        if (res > 1e-5) {
            throw std::invalid_argument(
                "d_z_residual: residual too large to drop the vanishing term");
        }
    }
    const int size = static_cast<int>(z.size());
    const double w = z[size - 1];
    const Eigen::MatrixXd dpi = pi_hsde(z, cones, n).jacobian;
    return ((q - Eigen::MatrixXd::Identity(size, size)) * dpi +
            Eigen::MatrixXd::Identity(size, size)) /
           w;
}

ConicTangentOut forward_differentiate_conic(const ConicForm& form, const ConicSolution& sol,
                                            const Eigen::MatrixXd& dA,
                                            const Eigen::VectorXd& db,
                                            const Eigen::VectorXd& dc) {
    const int n = form.n(), m = form.m();
    const Eigen::VectorXd z = embed_solution(form, sol);
    const Eigen::MatrixXd q = assemble_skew_q(form.A, form.b, form.c);
    const Eigen::MatrixXd dq = assemble_skew_q(dA, db, dc);
    const Eigen::MatrixXd jac = d_z_residual(z, q, form.cones, n);
    const Eigen::VectorXd pi = pi_hsde(z / z[n + m], form.cones, n).value;

    ConicTangentOut out;
    const Eigen::VectorXd dz = solve_min_norm(jac, -(dq * pi), &out.approximate);
    const Eigen::VectorXd dxyz = recovery_derivative(form, sol, z).apply(dz);
    out.dx = dxyz.head(n);
    out.dy = dxyz.segment(n, m);
    out.ds = dxyz.tail(m);
    return out;
}

ConicReverseOut reverse_differentiate_conic(const ConicForm& form, const ConicSolution& sol,
                                            const Eigen::VectorXd& dl_dx,
                                            const Eigen::VectorXd& dl_dy,
                                            const Eigen::VectorXd& dl_ds) {
    const int n = form.n(), m = form.m();
    const Eigen::VectorXd z = embed_solution(form, sol);
    const Eigen::MatrixXd q = assemble_skew_q(form.A, form.b, form.c);
    const Eigen::MatrixXd jac = d_z_residual(z, q, form.cones, n);
    const Eigen::VectorXd pi = pi_hsde(z / z[n + m], form.cones, n).value;

    Eigen::VectorXd g_xyz(n + 2 * m);
    g_xyz << dl_dx, dl_dy, dl_ds;
    const Eigen::VectorXd g_z = recovery_derivative(form, sol, z).apply_transpose(g_xyz);

    ConicReverseOut out;
    const Eigen::VectorXd g_rhs =
        solve_min_norm(jac.transpose(), -g_z, &out.approximate);
    const Eigen::MatrixXd g_q = g_rhs * pi.transpose();

    // Adjoint of assemble_skew_q.
    out.gA = g_q.block(0, n, n, m).transpose() - g_q.block(n, 0, m, n);
    out.gb = g_q.block(n, n + m, m, 1) - g_q.block(n + m, n, 1, m).transpose();
    out.gc = g_q.block(0, n + m, n, 1) - g_q.block(n + m, 0, 1, n).transpose();
    return out;
}

}  // namespace optigrad
