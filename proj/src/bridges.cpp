#include "optigrad/bridges.hpp"

#include <stdexcept>

namespace optigrad {

namespace {

ScalarAffineFunction scale_shift(const ScalarAffineFunction& f, double scale, double shift) {
    ScalarAffineFunction out;
    out.terms.reserve(f.terms.size());
    for (const auto& t : f.terms) out.terms.push_back({t.var, scale * t.coeff});
    out.constant = scale * f.constant + shift;
    return out;
}

}  // namespace

AffineBridge make_bridge(const ConeSet& source_set, ProblemClass target) {
    AffineBridge b;
    b.source_set = source_set;
    if (target == ProblemClass::QP) {
        switch (source_set.tag) {
            case ConeTag::Zero:
            case ConeTag::Nonpositive:
                b.target_set = source_set;
                return b;
            case ConeTag::Nonnegative:
                b.target_set = ConeSet::nonpositive(source_set.dim);
                b.scale = -1.0;
                return b;
            case ConeTag::EqualTo:
                b.target_set = ConeSet::zero(1);
                b.shift = -source_set.value;
                return b;
            case ConeTag::LessThan:  // f <= v  =>  f - v <= 0
                b.target_set = ConeSet::nonpositive(1);
                b.shift = -source_set.value;
                return b;
            case ConeTag::GreaterThan:  // f >= v  =>  v - f <= 0
                b.target_set = ConeSet::nonpositive(1);
                b.scale = -1.0;
                b.shift = source_set.value;
                return b;
            default:
                throw std::invalid_argument("no QP bridge for set " +
                                            cone_tag_name(source_set.tag));
        }
    }
    switch (source_set.tag) {
        case ConeTag::Zero:
        case ConeTag::Nonnegative:
        case ConeTag::SecondOrder:
        case ConeTag::PsdTriangle:
            b.target_set = source_set;
            return b;
        case ConeTag::Nonpositive:
            b.target_set = ConeSet::nonnegative(source_set.dim);
            b.scale = -1.0;
            return b;
        case ConeTag::EqualTo:
            b.target_set = ConeSet::zero(1);
            b.shift = -source_set.value;
            return b;
        case ConeTag::LessThan:  // f <= v  =>  v - f >= 0
            b.target_set = ConeSet::nonnegative(1);
            b.scale = -1.0;
            b.shift = source_set.value;
            return b;
        case ConeTag::GreaterThan:  // f >= v  =>  f - v >= 0
            b.target_set = ConeSet::nonnegative(1);
            b.shift = -source_set.value;
            return b;
        default:
            throw std::invalid_argument("no conic bridge for set " +
                                        cone_tag_name(source_set.tag));
    }
}

VectorAffineFunction bridge_function(const AffineBridge& bridge,
                                     const VectorAffineFunction& f) {
    VectorAffineFunction out;
    out.rows.reserve(f.rows.size());
    for (const auto& row : f.rows) {
        out.rows.push_back(scale_shift(row, bridge.scale, bridge.shift));
    }
    return out;
}

ScalarAffineFunction map_forward_tangent(const AffineBridge& bridge,
                                         const ScalarAffineFunction& tangent) {
    return scale_shift(tangent, bridge.scale, 0.0);
}

VectorAffineFunction map_forward_tangent(const AffineBridge& bridge,
                                         const VectorAffineFunction& tangent) {
    VectorAffineFunction out;
    out.rows.reserve(tangent.rows.size());
    for (const auto& row : tangent.rows) out.rows.push_back(map_forward_tangent(bridge, row));
    return out;
}

ScalarAffineFunction map_reverse_tangent(const AffineBridge& bridge,
                                         const ScalarAffineFunction& gradient) {
    // A is a scalar multiple of the identity, so A* = A.
    return scale_shift(gradient, bridge.scale, 0.0);
}

VectorAffineFunction map_reverse_tangent(const AffineBridge& bridge,
                                         const VectorAffineFunction& gradient) {
    VectorAffineFunction out;
    out.rows.reserve(gradient.rows.size());
    for (const auto& row : gradient.rows) out.rows.push_back(map_reverse_tangent(bridge, row));
    return out;
}

Eigen::VectorXd unbridge_dual(const AffineBridge& bridge, const Eigen::VectorXd& dual) {
    return bridge.scale * dual;
}

LoweredModel lower_model(const ProblemModel& model, ProblemClass target) {
    LoweredModel lowered;
    lowered.model.n_vars = model.n_vars;
    lowered.model.objective = model.objective;
    lowered.bridges.reserve(model.constraints.size());
    for (const auto& cons : model.constraints) {
        AffineBridge bridge = make_bridge(cons.set, target);
        Constraint out;
        out.id = cons.id;
        out.set = bridge.target_set;
        out.function = bridge.is_identity() ? cons.function
                                            : bridge_function(bridge, cons.function);
        lowered.model.constraints.push_back(std::move(out));
        lowered.bridges.push_back(bridge);
    }
    return lowered;
}

}  // namespace optigrad
