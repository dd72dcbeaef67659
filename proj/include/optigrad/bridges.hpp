#pragma once

#include "optigrad/model.hpp"

namespace optigrad {

/// Affine relation between a source constraint set and a target set:
/// f_source(x) in S1  <=>  scale * f_source(x) + shift (rowwise) in S2.
/// The general form also allows auxiliary variables (B block); only
/// invertible variable-free bridges are implemented.
struct AffineBridge {
    ConeSet source_set;
    ConeSet target_set;
    double scale = 1.0;   // A, a +-1 diagonal for all implemented bridges
    double shift = 0.0;   // c, applied to every row

    bool is_identity() const { return scale == 1.0 && shift == 0.0; }
};

/// Fixed lowering table towards the target problem class. QP targets
/// Zero/Nonpositive rows; Conic targets Zero/Nonnegative/SecondOrder/
/// PsdTriangle. Throws on unsupported sets.
AffineBridge make_bridge(const ConeSet& source_set, ProblemClass target);

/// Applies the bridge to a constraint function: scale * f + shift per row.
VectorAffineFunction bridge_function(const AffineBridge& bridge,
                                     const VectorAffineFunction& f);

/// Forward-mode tangent transport: delta_f2 = A * delta_f1. The shift is
/// constant data and does not appear in tangents.
ScalarAffineFunction map_forward_tangent(const AffineBridge& bridge,
                                         const ScalarAffineFunction& tangent);
VectorAffineFunction map_forward_tangent(const AffineBridge& bridge,
                                         const VectorAffineFunction& tangent);

/// Reverse-mode transport by the adjoint A*: <A x, y>_2 = <x, A* y>_1.
ScalarAffineFunction map_reverse_tangent(const AffineBridge& bridge,
                                         const ScalarAffineFunction& gradient);
VectorAffineFunction map_reverse_tangent(const AffineBridge& bridge,
                                         const VectorAffineFunction& gradient);

/// Maps a target-side dual back to the source constraint; fixed so that the
/// original model's stationarity condition holds with the mapped duals.
Eigen::VectorXd unbridge_dual(const AffineBridge& bridge, const Eigen::VectorXd& dual);

struct LoweredModel {
    ProblemModel model;
    std::vector<AffineBridge> bridges;  // parallel to model.constraints
};

/// Lowers every constraint of the model to the sets the target class
/// compiles; constraint ids and ordering are preserved.
LoweredModel lower_model(const ProblemModel& model, ProblemClass target);

}  // namespace optigrad
