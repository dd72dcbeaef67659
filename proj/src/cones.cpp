#include "optigrad/cones.hpp"

#include <cmath>
#include <stdexcept>

namespace optigrad {

namespace {

constexpr double kKinkTol = 1e-9;

void check_dim(const ConeSet& cone, const Eigen::VectorXd& v) {
    if (static_cast<int>(v.size()) != cone.dim) {
        throw std::invalid_argument("cone dimension mismatch: expected " +
                                    std::to_string(cone.dim) + ", got " +
                                    std::to_string(v.size()));
    }
}

Eigen::VectorXd project_soc(const Eigen::VectorXd& v) {
    const double t = v[0];
    const double rho = v.tail(v.size() - 1).norm();
    if (rho <= t) return v;
    if (rho <= -t) return Eigen::VectorXd::Zero(v.size());
    Eigen::VectorXd out(v.size());
    const double scale = 0.5 * (1.0 + t / rho);
    out[0] = 0.5 * (t + rho);
    out.tail(v.size() - 1) = scale * v.tail(v.size() - 1);
    return out;
}

Eigen::MatrixXd project_soc_jacobian(const Eigen::VectorXd& v, bool* degenerate) {
    const int d = static_cast<int>(v.size());
    const double t = v[0];
    const double rho = v.tail(d - 1).norm();
    if (degenerate && std::abs(rho - std::abs(t)) < kKinkTol) *degenerate = true;
    // Boundary points take the limit from the adjacent region: identity on
    // the cone side, zero on the polar side.
    if (rho <= t) return Eigen::MatrixXd::Identity(d, d);
    if (rho <= -t) return Eigen::MatrixXd::Zero(d, d);
    if (rho < kKinkTol) {
        // origin kink; fixed selection halfway between the two constant maps
        if (degenerate) *degenerate = true;
        return 0.5 * Eigen::MatrixXd::Identity(d, d);
    }
    const Eigen::VectorXd u = v.tail(d - 1) / rho;
    Eigen::MatrixXd jac(d, d);
    jac(0, 0) = 0.5;
    jac.block(0, 1, 1, d - 1) = 0.5 * u.transpose();
    jac.block(1, 0, d - 1, 1) = 0.5 * u;
    jac.block(1, 1, d - 1, d - 1) =
        0.5 * (1.0 + t / rho) * Eigen::MatrixXd::Identity(d - 1, d - 1) -
        0.5 * (t / rho) * u * u.transpose();
    return jac;
}

struct PsdEig {
    Eigen::MatrixXd vectors;
    Eigen::VectorXd values;
};

PsdEig psd_eig(const ConeSet& cone, const Eigen::VectorXd& v) {
    Eigen::MatrixXd m = smat(v);
    if (m.rows() != cone.side) throw std::invalid_argument("PsdTriangle side mismatch");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    return {es.eigenvectors(), es.eigenvalues()};
}

Eigen::VectorXd project_psd(const ConeSet& cone, const Eigen::VectorXd& v) {
    PsdEig e = psd_eig(cone, v);
    Eigen::VectorXd clamped = e.values.cwiseMax(0.0);
    return svec(e.vectors * clamped.asDiagonal() * e.vectors.transpose());
}

Eigen::MatrixXd project_psd_jacobian(const ConeSet& cone, const Eigen::VectorXd& v,
                                     bool* degenerate) {
    PsdEig e = psd_eig(cone, v);
    const int s = cone.side;
    const int k = cone.dim;
    const double scale = std::max(1.0, e.values.cwiseAbs().maxCoeff());
    if (degenerate) {
        for (int i = 0; i < s; ++i) {
            if (std::abs(e.values[i]) < kKinkTol * scale) *degenerate = true;
        }
    }
    // Divided-difference clamp factors; equal eigenvalues fall back to the
    // one-sided limit indicator(lambda > 0).
    Eigen::MatrixXd factors(s, s);
    for (int i = 0; i < s; ++i) {
        for (int j = 0; j < s; ++j) {
            const double li = e.values[i], lj = e.values[j];
            if (std::abs(li - lj) > 1e-12 * scale) {
                factors(i, j) = (std::max(li, 0.0) - std::max(lj, 0.0)) / (li - lj);
            } else {
                factors(i, j) = li > 0.0 ? 1.0 : 0.0;
            }
        }
    }
    Eigen::MatrixXd jac(k, k);
    Eigen::VectorXd basis = Eigen::VectorXd::Zero(k);
    for (int col = 0; col < k; ++col) {
        basis[col] = 1.0;
        Eigen::MatrixXd h = e.vectors.transpose() * smat(basis) * e.vectors;
        h.array() *= factors.array();
        jac.col(col) = svec(e.vectors * h * e.vectors.transpose());
        basis[col] = 0.0;
    }
    return jac;
}

}  // namespace

std::string cone_tag_name(ConeTag tag) {
    switch (tag) {
        case ConeTag::Zero: return "zero";
        case ConeTag::Nonnegative: return "nonnegative";
        case ConeTag::Nonpositive: return "nonpositive";
        case ConeTag::SecondOrder: return "second_order";
        case ConeTag::PsdTriangle: return "psd_triangle";
        case ConeTag::EqualTo: return "equal_to";
        case ConeTag::LessThan: return "less_than";
        case ConeTag::GreaterThan: return "greater_than";
    }
    return "unknown";
}

Eigen::VectorXd svec(const Eigen::MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    const double rt2 = std::sqrt(2.0);
    Eigen::VectorXd out(n * (n + 1) / 2);
    int k = 0;
    for (int col = 0; col < n; ++col) {
        for (int row = col; row < n; ++row) {
            out[k++] = row == col ? m(row, col) : m(row, col) * rt2;
        }
    }
    return out;
}

Eigen::MatrixXd smat(const Eigen::VectorXd& v) {
    const int n = static_cast<int>(std::round((std::sqrt(8.0 * v.size() + 1.0) - 1.0) / 2.0));
    if (n * (n + 1) / 2 != static_cast<int>(v.size())) {
        throw std::invalid_argument("smat: not a triangle dimension");
    }
    const double rt2 = std::sqrt(2.0);
    Eigen::MatrixXd out(n, n);
    int k = 0;
    for (int col = 0; col < n; ++col) {
        for (int row = col; row < n; ++row) {
            if (row == col) {
                out(row, col) = v[k];
            } else {
                out(row, col) = v[k] / rt2;
                out(col, row) = v[k] / rt2;
            }
            ++k;
        }
    }
    return out;
}

Eigen::VectorXd project(const ConeSet& cone, const Eigen::VectorXd& v) {
    check_dim(cone, v);
    switch (cone.tag) {
        case ConeTag::Zero: return Eigen::VectorXd::Zero(v.size());
        case ConeTag::Nonnegative: return v.cwiseMax(0.0);
        case ConeTag::Nonpositive: return v.cwiseMin(0.0);
        case ConeTag::SecondOrder: return project_soc(v);
        case ConeTag::PsdTriangle: return project_psd(cone, v);
        default: throw std::invalid_argument("project: scalar sets are not projectable");
    }
}

Eigen::MatrixXd project_jacobian(const ConeSet& cone, const Eigen::VectorXd& v,
                                 bool* degenerate) {
    check_dim(cone, v);
    const int d = cone.dim;
    switch (cone.tag) {
        case ConeTag::Zero: return Eigen::MatrixXd::Zero(d, d);
        case ConeTag::Nonnegative: {
            Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(d, d);
            for (int i = 0; i < d; ++i) {
                if (degenerate && std::abs(v[i]) < kKinkTol) *degenerate = true;
                jac(i, i) = v[i] > 0.0 ? 1.0 : 0.0;
            }
            return jac;
        }
        case ConeTag::Nonpositive: {
            Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(d, d);
            for (int i = 0; i < d; ++i) {
                if (degenerate && std::abs(v[i]) < kKinkTol) *degenerate = true;
                jac(i, i) = v[i] < 0.0 ? 1.0 : 0.0;
            }
            return jac;
        }
        case ConeTag::SecondOrder: return project_soc_jacobian(v, degenerate);
        case ConeTag::PsdTriangle: return project_psd_jacobian(cone, v, degenerate);
        default: throw std::invalid_argument("project_jacobian: scalar sets are not projectable");
    }
}

Eigen::VectorXd project_dual(const ConeSet& cone, const Eigen::VectorXd& v) {
    if (cone.tag == ConeTag::Zero) {
        check_dim(cone, v);
        return v;  // dual of {0} is the full space
    }
    return project(cone, v);
}

Eigen::MatrixXd project_dual_jacobian(const ConeSet& cone, const Eigen::VectorXd& v,
                                      bool* degenerate) {
    if (cone.tag == ConeTag::Zero) {
        check_dim(cone, v);
        return Eigen::MatrixXd::Identity(cone.dim, cone.dim);
    }
    return project_jacobian(cone, v, degenerate);
}

ProjectionResult pi_hsde(const Eigen::VectorXd& z, const ConeProduct& cones, int n) {
    const int m = cones.total_dim();
    if (static_cast<int>(z.size()) != n + m + 1) {
        throw std::invalid_argument("pi_hsde: z must have length n + m + 1");
    }
    ProjectionResult res;
    res.value = Eigen::VectorXd(n + m + 1);
    res.jacobian = Eigen::MatrixXd::Zero(n + m + 1, n + m + 1);
    res.value.head(n) = z.head(n);
    res.jacobian.topLeftCorner(n, n).setIdentity();
    int off = n;
    for (const auto& cone : cones.blocks) {
        const Eigen::VectorXd block = z.segment(off, cone.dim);
        res.value.segment(off, cone.dim) = project_dual(cone, block);
        res.jacobian.block(off, off, cone.dim, cone.dim) =
            project_dual_jacobian(cone, block, &res.degenerate);
        off += cone.dim;
    }
    const double w = z[n + m];
    res.value[n + m] = std::max(w, 0.0);
    if (std::abs(w) < kKinkTol) res.degenerate = true;
    res.jacobian(n + m, n + m) = w > 0.0 ? 1.0 : 0.0;
    return res;
}

}  // namespace optigrad
