#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

using namespace optigrad;
using oracles::inf_norm;

TEST_CASE("qp solver pins the bound constraint") {
    // min 2x s.t. x >= 3, lowered: -x <= -3
    QPForm form;
    form.Q = Eigen::MatrixXd::Zero(1, 1);
    form.c = Eigen::VectorXd::Constant(1, 2.0);
    form.G = Eigen::MatrixXd::Constant(1, 1, -1.0);
    form.h = Eigen::VectorXd::Constant(1, -3.0);
    form.A.resize(0, 1);
    form.b.resize(0);
    const auto [sol, status] = solve_qp(form);
    REQUIRE(status.optimal());
    CHECK(sol.x[0] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(sol.lambda[0] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("unconstrained qp solves the normal equations") {
    // min (1/2)(x - 1)^2
    QPForm form;
    form.Q = Eigen::MatrixXd::Identity(1, 1);
    form.c = Eigen::VectorXd::Constant(1, -1.0);
    form.G.resize(0, 1);
    form.h.resize(0);
    form.A.resize(0, 1);
    form.b.resize(0);
    const auto [sol, status] = solve_qp(form);
    REQUIRE(status.optimal());
    CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("equality-constrained qp matches the hand solution") {
    // min (1/2)||x||^2 s.t. x1 + x2 = 2 -> x = (1,1), mu = -1
    QPForm form;
    form.Q = Eigen::MatrixXd::Identity(2, 2);
    form.c = Eigen::VectorXd::Zero(2);
    form.G.resize(0, 2);
    form.h.resize(0);
    form.A = Eigen::MatrixXd::Constant(1, 2, 1.0);
    form.b = Eigen::VectorXd::Constant(1, 2.0);
    const auto [sol, status] = solve_qp(form);
    REQUIRE(status.optimal());
    CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(sol.x[1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(sol.mu[0] == doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("infeasible lp is detected") {
    // x >= 1 and x <= 0: -x <= -1, x <= 0
    QPForm form;
    form.Q = Eigen::MatrixXd::Zero(1, 1);
    form.c = Eigen::VectorXd::Constant(1, 1.0);
    form.G.resize(2, 1);
    form.G << -1, 1;
    form.h.resize(2);
    form.h << -1, 0;
    form.A.resize(0, 1);
    form.b.resize(0);
    const auto [sol, status] = solve_qp(form);
    CHECK(status.tag == SolveTag::Infeasible);
}

TEST_CASE("unbounded lp is detected") {
    // min x s.t. x <= 0
    QPForm form;
    form.Q = Eigen::MatrixXd::Zero(1, 1);
    form.c = Eigen::VectorXd::Constant(1, 1.0);
    form.G = Eigen::MatrixXd::Identity(1, 1);
    form.h = Eigen::VectorXd::Zero(1);
    form.A.resize(0, 1);
    form.b.resize(0);
    const auto [sol, status] = solve_qp(form);
    CHECK(status.tag == SolveTag::Unbounded);
}

TEST_CASE("random qps satisfy the kkt invariants at tolerance") {
    std::mt19937_64 rng(11);
    SolverSettings settings;
    settings.tol = 1e-9;
    for (int k = 0; k < 25; ++k) {
        const QPForm form = oracles::random_qp(rng);
        const auto [sol, status] = solve_qp(form, settings);
        REQUIRE(status.optimal());
        const Eigen::VectorXd stat = form.Q * sol.x + form.c + form.G.transpose() * sol.lambda +
                                     form.A.transpose() * sol.mu;
        CHECK(inf_norm(stat) < 1e-6);
        CHECK(sol.lambda.minCoeff() > -1e-8);
        const Eigen::VectorXd slack = form.h - form.G * sol.x;
        CHECK(slack.minCoeff() > -1e-6);
        CHECK(inf_norm(sol.lambda.cwiseProduct(slack)) < 1e-6);
        if (form.m() > 0) CHECK(inf_norm(form.A * sol.x - form.b) < 1e-6);
    }
}

TEST_CASE("conic solver pins the bound constraint") {
    ConicForm form;
    form.A = Eigen::MatrixXd::Constant(1, 1, -1.0);
    form.b = Eigen::VectorXd::Constant(1, -1.0);
    form.c = Eigen::VectorXd::Constant(1, 1.0);
    form.cones.blocks.push_back(ConeSet::nonnegative(1));
    const auto [sol, status] = solve_conic(form);
    REQUIRE(status.optimal());
    CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("second-order bound gives sqrt(2)") {
    // min x1 s.t. (x1, 1, 1) in SOC(3): b - Ax = (x1, 1, 1) needs A = -e1 rows
    ConicForm form;
    form.A.resize(3, 1);
    form.A << -1, 0, 0;
    form.b.resize(3);
    form.b << 0, 1, 1;
    form.c = Eigen::VectorXd::Constant(1, 1.0);
    form.cones.blocks.push_back(ConeSet::second_order(3));
    const auto [sol, status] = solve_conic(form);
    REQUIRE(status.optimal());
    CHECK(sol.x[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-7));
}

TEST_CASE("psd completion bound gives t = 1") {
    // min t s.t. [[1, 1], [1, t]] psd; svec order (m11, sqrt2 m21, m22)
    ConicForm form;
    form.A.resize(3, 1);
    form.A << 0, 0, -1;
    form.b.resize(3);
    form.b << 1, std::sqrt(2.0), 0;
    form.c = Eigen::VectorXd::Constant(1, 1.0);
    form.cones.blocks.push_back(ConeSet::psd_triangle(2));
    const auto [sol, status] = solve_conic(form);
    REQUIRE(status.optimal());
    CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("random conic instances satisfy the solution invariants") {
    std::mt19937_64 rng(13);
    SolverSettings settings;
    settings.tol = 1e-9;
    for (int k = 0; k < 20; ++k) {
        const ConicForm form = oracles::random_conic(rng, k % 2 == 1);
        const auto [sol, status] = solve_conic(form, settings);
        REQUIRE(status.optimal());
        CHECK(inf_norm(form.A * sol.x + sol.s - form.b) < 1e-6);
        CHECK(inf_norm(form.A.transpose() * sol.y + form.c) < 1e-6);
        CHECK(std::abs(form.c.dot(sol.x) + form.b.dot(sol.y)) < 1e-6);
        CHECK(std::abs(sol.s.dot(sol.y)) < 1e-6);
    }
}

TEST_CASE("small perturbations move the solution by the same order") {
    std::mt19937_64 rng(17);
    const QPForm form = oracles::random_qp(rng);
    SolverSettings settings;
    settings.tol = 1e-11;
    const auto [base, st0] = solve_qp(form, settings);
    REQUIRE(st0.optimal());
    QPTangentIn t = oracles::random_qp_tangent(rng, form);
    const auto [moved, st1] = solve_qp(oracles::perturb_qp(form, t, 1e-6), settings);
    REQUIRE(st1.optimal());
    CHECK(inf_norm(moved.x - base.x) < 1e-3);
}
