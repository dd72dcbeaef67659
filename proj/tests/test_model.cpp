#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "optigrad/bridges.hpp"
#include "optigrad/demos.hpp"
#include "optigrad/model.hpp"

using namespace optigrad;

namespace {

ProblemModel golden_model() {
    // min 2x s.t. x >= 3
    ScalarQuadraticFunction obj;
    obj.affine.terms.push_back({0, 2.0});
    Constraint cons{"cons", {{{{{0, 1.0}}, 0.0}}}, ConeSet::greater_than(3.0)};
    return build_problem(1, obj, {cons});
}

}  // namespace

TEST_CASE("build_problem assembles the one-constraint model") {
    const ProblemModel model = golden_model();
    CHECK(model.n_vars == 1);
    REQUIRE(model.constraints.size() == 1);
    CHECK(model.constraints[0].set.tag == ConeTag::GreaterThan);
    CHECK(model.constraints[0].set.value == 3.0);
    CHECK(model.find_constraint("cons") != nullptr);
    CHECK(model.find_constraint("missing") == nullptr);
}

TEST_CASE("build_problem accepts an empty model") {
    const ProblemModel model = build_problem(0, {}, {});
    CHECK(model.n_vars == 0);
    CHECK(model.constraints.empty());
}

TEST_CASE("build_problem merges duplicate quadratic terms") {
    ScalarQuadraticFunction obj;
    obj.quadratic_terms.push_back({0, 0, 1.0});
    obj.quadratic_terms.push_back({0, 0, 2.0});
    const ProblemModel model = build_problem(1, obj, {});
    REQUIRE(model.objective.quadratic_terms.size() == 1);
    CHECK(model.objective.quadratic_terms[0].coeff == 3.0);
}

TEST_CASE("build_problem rejects duplicate constraint ids") {
    Constraint a{"c", {{{{{0, 1.0}}, 0.0}}}, ConeSet::greater_than(0.0)};
    Constraint b{"c", {{{{{0, 1.0}}, 0.0}}}, ConeSet::less_than(1.0)};
    CHECK_THROWS(build_problem(1, {}, {a, b}));
}

TEST_CASE("build_problem rejects out-of-range variables") {
    ScalarQuadraticFunction obj;
    obj.affine.terms.push_back({2, 1.0});
    CHECK_THROWS(build_problem(1, obj, {}));
}

TEST_CASE("classification by objective and sets") {
    ScalarQuadraticFunction quad;
    quad.quadratic_terms.push_back({0, 0, 1.0});
    Constraint lin{"c", {{{{{0, 1.0}}, 0.0}}}, ConeSet::greater_than(0.0)};
    CHECK(classify_problem(build_problem(1, quad, {lin})) == ProblemClass::QP);

    ScalarQuadraticFunction aff;
    aff.affine.terms.push_back({0, 1.0});
    VectorAffineFunction soc_rows;
    for (int i = 0; i < 3; ++i) soc_rows.rows.push_back({{{i, 1.0}}, 0.0});
    Constraint soc{"soc", soc_rows, ConeSet::second_order(3)};
    CHECK(classify_problem(build_problem(3, aff, {soc})) == ProblemClass::Conic);

    // purely linear programs compile in both classes; QP is the default path
    CHECK(classify_problem(build_problem(1, aff, {lin})) == ProblemClass::QP);

    // quadratic objective with a conic set is unsupported
    ScalarQuadraticFunction quad3 = quad;
    CHECK_THROWS(classify_problem(build_problem(3, quad3, {soc})));
}

TEST_CASE("classification is invariant under constraint reordering") {
    ScalarQuadraticFunction aff;
    aff.affine.terms.push_back({0, 1.0});
    VectorAffineFunction soc_rows;
    for (int i = 0; i < 3; ++i) soc_rows.rows.push_back({{{i, 1.0}}, 0.0});
    Constraint soc{"soc", soc_rows, ConeSet::second_order(3)};
    Constraint lin{"lin", {{{{{0, 1.0}}, 0.0}}}, ConeSet::greater_than(0.0)};
    const auto a = classify_problem(build_problem(3, aff, {soc, lin}));
    const auto b = classify_problem(build_problem(3, aff, {lin, soc}));
    CHECK(a == b);
}

TEST_CASE("compile_qp_form on the lowered one-constraint model") {
    const LoweredModel lowered = lower_model(golden_model(), ProblemClass::QP);
    const QPForm form = compile_qp_form(lowered.model);
    CHECK(form.n() == 1);
    CHECK(form.Q(0, 0) == 0.0);
    CHECK(form.c[0] == 2.0);
    REQUIRE(form.p() == 1);
    CHECK(form.G(0, 0) == -1.0);
    CHECK(form.h[0] == -3.0);
    CHECK(form.m() == 0);
    CHECK(form.row_map.at("cons").block == RowBlock::Inequality);
}

TEST_CASE("compile_qp_form of an unconstrained quadratic") {
    ScalarQuadraticFunction obj;
    obj.quadratic_terms.push_back({0, 0, 1.0});  // (1/2) x^2
    const QPForm form = compile_qp_form(build_problem(1, obj, {}));
    CHECK(form.Q(0, 0) == 1.0);
    CHECK(form.c[0] == 0.0);
    CHECK(form.p() == 0);
    CHECK(form.m() == 0);
}

TEST_CASE("compile_qp_form lays out the 3-point SVM") {
    demos::SvmInstance inst;
    inst.lambda = 0.1;
    inst.X.resize(3, 2);
    inst.X << 1, 0, 0, 1, -1, -1;
    inst.y.resize(3);
    inst.y << 1, 1, -1;
    const auto problem = demos::svm_problem(inst);
    const LoweredModel lowered = lower_model(problem.model, ProblemClass::QP);
    const QPForm form = compile_qp_form(lowered.model);
    // variables: w0 w1 b xi0 xi1 xi2
    CHECK(form.n() == 6);
    CHECK(form.p() == 6);  // 3 margin rows + 3 slack-nonnegativity rows
    CHECK(form.m() == 0);
    CHECK(form.Q(0, 0) == doctest::Approx(2 * inst.lambda));
    CHECK(form.Q(1, 1) == doctest::Approx(2 * inst.lambda));
    CHECK(form.Q.bottomRightCorner(4, 4).cwiseAbs().maxCoeff() == 0.0);
    const RowRange margin1 = form.row_map.at("margin_1");
    REQUIRE(margin1.len == 1);
    // margin row lowered to nonpositive: -(y_i (w.X_i + b) + xi_i) <= -1
    CHECK(form.G(margin1.offset, 0) == doctest::Approx(-inst.y[1] * inst.X(1, 0)));
    CHECK(form.G(margin1.offset, 1) == doctest::Approx(-inst.y[1] * inst.X(1, 1)));
    CHECK(form.G(margin1.offset, 2) == doctest::Approx(-inst.y[1]));
    CHECK(form.G(margin1.offset, 4) == doctest::Approx(-1.0));
    CHECK(form.h[margin1.offset] == doctest::Approx(-1.0));
}

TEST_CASE("compile_conic_form on the lowered bound constraint") {
    // min x s.t. x >= 1
    ScalarQuadraticFunction obj;
    obj.affine.terms.push_back({0, 1.0});
    Constraint cons{"c", {{{{{0, 1.0}}, 0.0}}}, ConeSet::greater_than(1.0)};
    const LoweredModel lowered =
        lower_model(build_problem(1, obj, {cons}), ProblemClass::Conic);
    const ConicForm form = compile_conic_form(lowered.model);
    CHECK(form.A(0, 0) == -1.0);
    CHECK(form.b[0] == -1.0);
    CHECK(form.c[0] == 1.0);
    REQUIRE(form.cones.blocks.size() == 1);
    CHECK(form.cones.blocks[0].tag == ConeTag::Nonnegative);
}

TEST_CASE("compile_conic_form handles equality pinning") {
    ScalarQuadraticFunction obj;
    Constraint cons{"pin", {{{{{0, 1.0}}, 0.0}}}, ConeSet::equal_to(5.0)};
    const LoweredModel lowered =
        lower_model(build_problem(1, obj, {cons}), ProblemClass::Conic);
    const ConicForm form = compile_conic_form(lowered.model);
    REQUIRE(form.cones.blocks.size() == 1);
    CHECK(form.cones.blocks[0].tag == ConeTag::Zero);
    CHECK(form.b[0] / form.A(0, 0) == doctest::Approx(5.0));  // the pinned value b / A
}

TEST_CASE("compile_conic_form keeps a second-order block intact and orders cones") {
    ScalarQuadraticFunction obj;
    obj.affine.terms.push_back({0, 1.0});
    VectorAffineFunction soc_rows;
    for (int i = 0; i < 3; ++i) soc_rows.rows.push_back({{{i, 1.0}}, 0.0});
    Constraint soc{"soc", soc_rows, ConeSet::second_order(3)};
    Constraint pin{"pin", {{{{{1, 1.0}}, 0.0}}}, ConeSet::equal_to(1.0)};
    const LoweredModel lowered =
        lower_model(build_problem(3, obj, {soc, pin}), ProblemClass::Conic);
    const ConicForm form = compile_conic_form(lowered.model);
    REQUIRE(form.cones.blocks.size() == 2);
    CHECK(form.cones.blocks[0].tag == ConeTag::Zero);  // Zero rows sort first
    CHECK(form.cones.blocks[1].tag == ConeTag::SecondOrder);
    CHECK(form.row_map.at("soc").len == 3);
    CHECK(form.row_map.at("pin").len == 1);
}

TEST_CASE("row_map round trips every constraint exactly once") {
    demos::SvmInstance inst = demos::make_svm_square();
    const auto problem = demos::svm_problem(inst);
    const LoweredModel lowered = lower_model(problem.model, ProblemClass::QP);
    const QPForm form = compile_qp_form(lowered.model);
    int covered = 0;
    std::vector<bool> seen(form.p() + form.m(), false);
    for (const auto& cons : lowered.model.constraints) {
        const RowRange range = form.row_map.at(cons.id);
        CHECK(range.len == cons.function.dim());
        for (int r = 0; r < range.len; ++r) {
            const int global =
                (range.block == RowBlock::Equality ? form.p() : 0) + range.offset + r;
            CHECK(!seen[global]);
            seen[global] = true;
            ++covered;
        }
    }
    CHECK(covered == form.p() + form.m());
}

TEST_CASE("quadratic function evaluation uses the half convention") {
    ScalarQuadraticFunction f;
    f.quadratic_terms.push_back({0, 0, 2.0});
    f.quadratic_terms.push_back({0, 1, 1.0});
    f.affine.terms.push_back({1, 3.0});
    f.affine.constant = 0.5;
    Eigen::VectorXd x(2);
    x << 2, -1;
    // (1/2)(2*4) + 1*2*(-1) + 3*(-1) + 0.5
    CHECK(f.evaluate(x) == doctest::Approx(4 - 2 - 3 + 0.5));
    const Eigen::MatrixXd q = f.q_matrix(2);
    CHECK(q(0, 1) == q(1, 0));
    CHECK(q(0, 1) == 1.0);
}
