#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "optigrad/api.hpp"
#include "oracles.hpp"

using namespace optigrad;

namespace {

ScalarAffineFunction affine(std::initializer_list<std::pair<int, double>> terms,
                            double constant) {
    ScalarAffineFunction f;
    for (const auto& [var, coeff] : terms) f.terms.push_back({var, coeff});
    f.constant = constant;
    return f;
}

}  // namespace

TEST_CASE("greater-than lowers to a nonnegative row for the conic class") {
    const AffineBridge bridge = make_bridge(ConeSet::greater_than(3.0), ProblemClass::Conic);
    CHECK(bridge.target_set.tag == ConeTag::Nonnegative);
    CHECK(bridge.scale == 1.0);
    CHECK(bridge.shift == -3.0);
    const auto f2 = bridge_function(bridge, {{affine({{0, 1.0}}, 0.0)}});
    CHECK(f2.rows[0].coefficient(0) == 1.0);
    CHECK(f2.rows[0].constant == -3.0);  // x - 3 in Nonnegative
}

TEST_CASE("equal-to lowers to a zero row") {
    const AffineBridge bridge = make_bridge(ConeSet::equal_to(5.0), ProblemClass::QP);
    CHECK(bridge.target_set.tag == ConeTag::Zero);
    CHECK(bridge.scale == 1.0);
    CHECK(bridge.shift == -5.0);
}

TEST_CASE("nonpositive flips sign towards the conic class") {
    const AffineBridge bridge = make_bridge(ConeSet::nonpositive(2), ProblemClass::Conic);
    CHECK(bridge.target_set.tag == ConeTag::Nonnegative);
    CHECK(bridge.target_set.dim == 2);
    CHECK(bridge.scale == -1.0);
    CHECK(bridge.shift == 0.0);
}

TEST_CASE("vector cones pass through untouched") {
    const AffineBridge bridge = make_bridge(ConeSet::second_order(3), ProblemClass::Conic);
    CHECK(bridge.is_identity());
    CHECK_THROWS(make_bridge(ConeSet::second_order(3), ProblemClass::QP));
}

TEST_CASE("forward tangent transport maps coefficients and constants by the scale") {
    AffineBridge bridge;
    bridge.scale = -1.0;
    bridge.shift = 0.5;  // shifts are constant data, absent from tangents
    const auto mapped = map_forward_tangent(bridge, affine({{0, 2.0}}, 0.5));
    CHECK(mapped.coefficient(0) == -2.0);
    CHECK(mapped.constant == -0.5);

    AffineBridge ident;
    const auto same = map_forward_tangent(ident, affine({{0, 2.0}}, 0.5));
    CHECK(same.coefficient(0) == 2.0);
    CHECK(same.constant == 0.5);
}

TEST_CASE("reverse transport recovers the published gradient of the bound constraint") {
    AffineBridge bridge;
    bridge.scale = -1.0;
    const auto mapped = map_reverse_tangent(bridge, affine({{0, 3.0}}, -1.0));
    CHECK(mapped.coefficient(0) == -3.0);
    CHECK(mapped.constant == 1.0);
}

TEST_CASE("forward and reverse transports are adjoint") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> unif(-2, 2);
    for (double scale : {1.0, -1.0}) {
        AffineBridge bridge;
        bridge.scale = scale;
        for (int k = 0; k < 20; ++k) {
            const auto t = affine({{0, unif(rng)}, {1, unif(rng)}}, unif(rng));
            const auto g = affine({{0, unif(rng)}, {1, unif(rng)}}, unif(rng));
            const auto at = map_forward_tangent(bridge, t);
            const auto ag = map_reverse_tangent(bridge, g);
            const double lhs = at.coefficient(0) * g.coefficient(0) +
                               at.coefficient(1) * g.coefficient(1) + at.constant * g.constant;
            const double rhs = t.coefficient(0) * ag.coefficient(0) +
                               t.coefficient(1) * ag.coefficient(1) + t.constant * ag.constant;
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
    }
}

TEST_CASE("lower_model preserves constraint ids and order") {
    ScalarQuadraticFunction obj;
    obj.affine.terms.push_back({0, 1.0});
    Constraint a{"a", {{affine({{0, 1.0}}, 0.0)}}, ConeSet::greater_than(1.0)};
    Constraint b{"b", {{affine({{0, 1.0}}, 0.0)}}, ConeSet::less_than(4.0)};
    Constraint c{"c", {{affine({{1, 1.0}}, 0.0)}}, ConeSet::equal_to(2.0)};
    const ProblemModel model = build_problem(2, obj, {a, b, c});
    const LoweredModel lowered = lower_model(model, ProblemClass::QP);
    REQUIRE(lowered.model.constraints.size() == 3);
    REQUIRE(lowered.bridges.size() == 3);
    CHECK(lowered.model.constraints[0].id == "a");
    CHECK(lowered.model.constraints[1].id == "b");
    CHECK(lowered.model.constraints[2].id == "c");
    CHECK(lowered.model.constraints[0].set.tag == ConeTag::Nonpositive);
    CHECK(lowered.model.constraints[2].set.tag == ConeTag::Zero);
}

namespace {

// Random LP over >= / <= / = mixtures with a strictly feasible interior.
ProblemModel random_mixed_lp(std::mt19937_64& rng, int n = 3) {
    ScalarQuadraticFunction obj;
    for (int i = 0; i < n; ++i) obj.affine.terms.push_back({i, oracles::rand_vector(rng, 1)[0]});
    const Eigen::VectorXd x0 = oracles::rand_vector(rng, n);
    std::vector<Constraint> constraints;
    std::uniform_real_distribution<double> gap(0.2, 1.5);
    for (int k = 0; k < n + 2; ++k) {
        ScalarAffineFunction f;
        const Eigen::VectorXd row = oracles::rand_vector(rng, n);
        for (int i = 0; i < n; ++i) f.terms.push_back({i, row[i]});
        const double at_x0 = row.dot(x0);
        const std::string id = "c" + std::to_string(k);
        if (k == 0) {
            constraints.push_back({id, {{f}}, ConeSet::equal_to(at_x0)});
        } else if (k % 2 == 0) {
            constraints.push_back({id, {{f}}, ConeSet::greater_than(at_x0 - gap(rng))});
        } else {
            constraints.push_back({id, {{f}}, ConeSet::less_than(at_x0 + gap(rng))});
        }
    }
    // box to keep the LP bounded
    for (int i = 0; i < n; ++i) {
        ScalarAffineFunction f;
        f.terms.push_back({i, 1.0});
        constraints.push_back({"lo" + std::to_string(i), {{f}}, ConeSet::greater_than(-8.0)});
        ScalarAffineFunction g = f;
        constraints.push_back({"hi" + std::to_string(i), {{g}}, ConeSet::less_than(8.0)});
    }
    return build_problem(n, obj, constraints);
}

}  // namespace

TEST_CASE("mapped duals satisfy the original model KKT conditions") {
    std::mt19937_64 rng(77);
    int checked = 0;
    for (int k = 0; k < 10; ++k) {
        const ProblemModel model = random_mixed_lp(rng);
        DiffEngine engine(model);
        if (!engine.optimize().optimal()) continue;
        ++checked;
        const Eigen::VectorXd x = engine.primal();
        // stationarity: c + sum_i dual_i * grad f_i = 0 with the dual of a
        // >= (<=) constraint nonpositive (nonnegative) for minimization under
        // the engine's G x <= h, lambda >= 0 internal convention.
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(model.n_vars);
        for (const auto& t : model.objective.affine.terms) grad[t.var] += t.coeff;
        for (const auto& cons : model.constraints) {
            const double dual = engine.constraint_dual(cons.id)[0];
            const double value = cons.function.rows[0].evaluate(x);
            if (cons.set.tag == ConeTag::GreaterThan) {
                CHECK(dual <= 1e-7);
                CHECK(std::abs(dual * (value - cons.set.value)) < 1e-6);
            } else if (cons.set.tag == ConeTag::LessThan) {
                CHECK(dual >= -1e-7);
                CHECK(std::abs(dual * (value - cons.set.value)) < 1e-6);
            }
            for (const auto& t : cons.function.rows[0].terms) grad[t.var] += dual * t.coeff;
        }
        CHECK(grad.cwiseAbs().maxCoeff() < 1e-6);
    }
    CHECK(checked >= 8);
}

TEST_CASE("bridged differentiation equals the hand-lowered model") {
    // min x s.t. x >= 3 stated via GreaterThan versus hand-lowered to
    // -x + 3 in Nonpositive; reverse gradients must agree through transport.
    ScalarQuadraticFunction obj;
    obj.affine.terms.push_back({0, 2.0});
    Constraint original{"cons", {{affine({{0, 1.0}}, 0.0)}}, ConeSet::greater_than(3.0)};
    Constraint lowered{"cons", {{affine({{0, -1.0}}, 3.0)}}, ConeSet::nonpositive(1)};

    DiffEngine bridged(build_problem(1, obj, {original}));
    REQUIRE(bridged.optimize().optimal());
    bridged.set_reverse_variable(0, 1.0);
    bridged.reverse_differentiate();

    DiffEngine direct(build_problem(1, obj, {lowered}));
    REQUIRE(direct.optimize().optimal());
    direct.set_reverse_variable(0, 1.0);
    direct.reverse_differentiate();

    const auto& gb = bridged.get_reverse_constraint("cons").rows[0];
    const auto& gd = direct.get_reverse_constraint("cons").rows[0];
    // transport through the scale -1 bridge flips both slots
    CHECK(gb.coefficient(0) == doctest::Approx(-gd.coefficient(0)).epsilon(1e-10));
    CHECK(gb.constant == doctest::Approx(-gd.constant).epsilon(1e-10));
    CHECK(gb.coefficient(0) == doctest::Approx(-3.0).epsilon(1e-9));
    CHECK(gb.constant == doctest::Approx(1.0).epsilon(1e-9));
}
