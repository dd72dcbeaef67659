#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace optigrad {

enum class ConeTag {
    Zero,
    Nonnegative,
    Nonpositive,
    SecondOrder,
    PsdTriangle,
    EqualTo,
    LessThan,
    GreaterThan,
};

/// A constraint set: vector cones (Zero/Nonnegative/Nonpositive/SecondOrder/
/// PsdTriangle) or scalar interval sets (EqualTo/LessThan/GreaterThan).
/// PsdTriangle stores the matrix side; its vector dimension is side*(side+1)/2.
struct ConeSet {
    ConeTag tag = ConeTag::Zero;
    int dim = 1;
    int side = 0;      // PsdTriangle only
    double value = 0;  // scalar sets only

    static ConeSet zero(int d) { return {ConeTag::Zero, d, 0, 0.0}; }
    static ConeSet nonnegative(int d) { return {ConeTag::Nonnegative, d, 0, 0.0}; }
    static ConeSet nonpositive(int d) { return {ConeTag::Nonpositive, d, 0, 0.0}; }
    static ConeSet second_order(int d) { return {ConeTag::SecondOrder, d, 0, 0.0}; }
    static ConeSet psd_triangle(int side) {
        return {ConeTag::PsdTriangle, side * (side + 1) / 2, side, 0.0};
    }
    static ConeSet equal_to(double v) { return {ConeTag::EqualTo, 1, 0, v}; }
    static ConeSet less_than(double v) { return {ConeTag::LessThan, 1, 0, v}; }
    static ConeSet greater_than(double v) { return {ConeTag::GreaterThan, 1, 0, v}; }

    bool is_scalar_set() const {
        return tag == ConeTag::EqualTo || tag == ConeTag::LessThan ||
               tag == ConeTag::GreaterThan;
    }
    bool is_vector_cone() const { return !is_scalar_set(); }
};

std::string cone_tag_name(ConeTag tag);

/// Ordered product of cones partitioning a vector of dimension total_dim().
struct ConeProduct {
    std::vector<ConeSet> blocks;

    int total_dim() const {
        int d = 0;
        for (const auto& b : blocks) d += b.dim;
        return d;
    }
};

/// Euclidean projection onto the cone. Supported: Zero, Nonnegative,
/// Nonpositive, SecondOrder, PsdTriangle.
Eigen::VectorXd project(const ConeSet& cone, const Eigen::VectorXd& v);

/// Derivative of project() at v, as a dense matrix. At nondifferentiable
/// points a fixed selection is returned and *degenerate (if given) is set.
Eigen::MatrixXd project_jacobian(const ConeSet& cone, const Eigen::VectorXd& v,
                                 bool* degenerate = nullptr);

/// Projection onto the dual cone. Zero* is the full space; the other
/// supported cones are self-dual (PsdTriangle under the scaled-triangle
/// inner product, see svec below).
Eigen::VectorXd project_dual(const ConeSet& cone, const Eigen::VectorXd& v);
Eigen::MatrixXd project_dual_jacobian(const ConeSet& cone, const Eigen::VectorXd& v,
                                      bool* degenerate = nullptr);

struct ProjectionResult {
    Eigen::VectorXd value;
    Eigen::MatrixXd jacobian;
    bool degenerate = false;
};

/// Projection of z (length n + m + 1) onto R^n x K* x R_+ together with its
/// block-diagonal derivative. The middle m components are projected blockwise
/// onto the dual of each cone in the product.
ProjectionResult pi_hsde(const Eigen::VectorXd& z, const ConeProduct& cones, int n);

/// Scaled lower-triangle vectorization: column-major lower triangle with
/// off-diagonal entries multiplied by sqrt(2), so the vector inner product
/// equals the matrix Frobenius inner product.
Eigen::VectorXd svec(const Eigen::MatrixXd& m);
Eigen::MatrixXd smat(const Eigen::VectorXd& v);

}  // namespace optigrad
