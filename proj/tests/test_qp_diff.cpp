#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

using namespace optigrad;
using oracles::inf_norm;

namespace {

QPForm bound_form() {
    // min 2x s.t. -x <= -3
    QPForm form;
    form.Q = Eigen::MatrixXd::Zero(1, 1);
    form.c = Eigen::VectorXd::Constant(1, 2.0);
    form.G = Eigen::MatrixXd::Constant(1, 1, -1.0);
    form.h = Eigen::VectorXd::Constant(1, -3.0);
    form.A.resize(0, 1);
    form.b.resize(0);
    return form;
}

QPSolution solve_tight(const QPForm& form) {
    SolverSettings settings;
    settings.tol = 1e-11;
    const auto [sol, status] = solve_qp(form, settings);
    REQUIRE(status.optimal());
    return sol;
}

}  // namespace

TEST_CASE("kkt jacobian of the bound problem") {
    const QPForm form = bound_form();
    const QPSolution sol = solve_tight(form);
    const Eigen::MatrixXd m = build_kkt_jacobian(form, sol);
    REQUIRE(m.rows() == 2);
    // [[Q, G^T], [D(lambda)G, D(Gx - h)]] = [[0, -1], [-2, 0]]
    CHECK(m(0, 0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(m(0, 1) == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(m(1, 0) == doctest::Approx(-2.0).epsilon(1e-7));
    CHECK(std::abs(m(1, 1)) < 1e-7);
}

TEST_CASE("kkt jacobian of an unconstrained quadratic is Q") {
    QPForm form;
    form.Q = Eigen::MatrixXd::Identity(1, 1);
    form.c = Eigen::VectorXd::Constant(1, -1.0);
    form.G.resize(0, 1);
    form.h.resize(0);
    form.A.resize(0, 1);
    form.b.resize(0);
    const QPSolution sol = solve_tight(form);
    const Eigen::MatrixXd m = build_kkt_jacobian(form, sol);
    REQUIRE(m.rows() == 1);
    CHECK(m(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("inactive rows decouple in the kkt jacobian") {
    // min (1/2)(x - 1)^2 with a slack bound x <= 5: lambda = 0, slack < 0.
    QPForm form;
    form.Q = Eigen::MatrixXd::Identity(1, 1);
    form.c = Eigen::VectorXd::Constant(1, -1.0);
    form.G = Eigen::MatrixXd::Identity(1, 1);
    form.h = Eigen::VectorXd::Constant(1, 5.0);
    form.A.resize(0, 1);
    form.b.resize(0);
    const QPSolution sol = solve_tight(form);
    const Eigen::MatrixXd m = build_kkt_jacobian(form, sol);
    // middle row is [D(lambda)G, D(Gx - h)] = [~0, x - 5]
    CHECK(std::abs(m(1, 0)) < 1e-7);
    CHECK(m(1, 1) == doctest::Approx(-4.0).epsilon(1e-7));
}

TEST_CASE("tracking a tightening bound moves the pinned variable one-for-one") {
    const QPForm form = bound_form();
    const QPSolution sol = solve_tight(form);
    QPTangentIn t = QPTangentIn::zero(form);
    t.dh = Eigen::VectorXd::Constant(1, 1.0);  // h = -3 - eps means bound 3 + eps
    const QPTangentOut out = forward_differentiate_qp(form, sol, t);
    CHECK(!out.approximate);
    CHECK(out.dx[0] == doctest::Approx(-1.0).epsilon(1e-8));
}

TEST_CASE("an inactive bound contributes no sensitivity") {
    QPForm form;
    form.Q = Eigen::MatrixXd::Identity(1, 1);
    form.c = Eigen::VectorXd::Constant(1, -1.0);
    form.G = Eigen::MatrixXd::Identity(1, 1);
    form.h = Eigen::VectorXd::Constant(1, 5.0);
    form.A.resize(0, 1);
    form.b.resize(0);
    const QPSolution sol = solve_tight(form);
    QPTangentIn t = QPTangentIn::zero(form);
    t.dh = Eigen::VectorXd::Constant(1, 1.0);
    const QPTangentOut out = forward_differentiate_qp(form, sol, t);
    CHECK(std::abs(out.dx[0]) < 1e-7);
}

TEST_CASE("reverse gradients of the bound problem match the closed form") {
    // x*(h) = -h when G = -1, so dl/dh = -1 for seed 1; dl/dG follows from
    // x*(G) = h / G at G = -1, h = -3: d(h/G)/dG = -h / G^2 = 3.
    const QPForm form = bound_form();
    const QPSolution sol = solve_tight(form);
    const QPReverseOut out =
        reverse_differentiate_qp(form, sol, Eigen::VectorXd::Constant(1, 1.0));
    CHECK(out.gh[0] == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(out.gG(0, 0) == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(std::abs(out.gc[0]) < 1e-7);
}

TEST_CASE("forward derivatives match finite differences on random qps") {
    std::mt19937_64 rng(21);
    double worst = 0;
    int checked = 0;
    for (int k = 0; checked < 20 && k < 40; ++k) {
        const QPForm form = oracles::random_qp(rng);
        SolverSettings settings;
        settings.tol = 1e-11;
        const auto [sol, status] = solve_qp(form, settings);
        if (!status.optimal()) continue;
        const QPTangentIn t = oracles::random_qp_tangent(rng, form);
        const QPTangentOut out = forward_differentiate_qp(form, sol, t);
        if (out.approximate) continue;
        Eigen::VectorXd fd;
        try {
            fd = oracles::fd_qp_solution(form, t);
        } catch (const std::runtime_error&) {
            continue;
        }
        const double scale = std::max(1.0, inf_norm(fd));
        worst = std::max(worst, inf_norm(out.dx - fd) / scale);
        ++checked;
    }
    CHECK(checked >= 15);
    CHECK(worst < 1e-4);
}

TEST_CASE("reverse is the exact adjoint of forward") {
    std::mt19937_64 rng(22);
    for (int k = 0; k < 20; ++k) {
        const QPForm form = oracles::random_qp(rng);
        SolverSettings settings;
        settings.tol = 1e-11;
        const auto [sol, status] = solve_qp(form, settings);
        REQUIRE(status.optimal());
        const QPTangentIn t = oracles::random_qp_tangent(rng, form);
        const Eigen::VectorXd seed = oracles::rand_vector(rng, form.n());
        const QPTangentOut fwd = forward_differentiate_qp(form, sol, t);
        const QPReverseOut rev = reverse_differentiate_qp(form, sol, seed);
        const double lhs = seed.dot(fwd.dx);
        double rhs = (rev.gQ.array() * t.dQ.array()).sum() + rev.gc.dot(t.dc) +
                     (rev.gG.array() * t.dG.array()).sum() + rev.gh.dot(t.dh) + rev.gb.dot(t.db);
        if (form.m() > 0) rhs += (rev.gA.array() * t.dA.array()).sum();
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
    }
}

TEST_CASE("forward map is linear in the tangent") {
    std::mt19937_64 rng(23);
    const QPForm form = oracles::random_qp(rng);
    const QPSolution sol = solve_tight(form);
    const QPTangentIn t1 = oracles::random_qp_tangent(rng, form);
    const QPTangentIn t2 = oracles::random_qp_tangent(rng, form);
    QPTangentIn sum = t1;
    sum.dQ += 2 * t2.dQ;
    sum.dc += 2 * t2.dc;
    sum.dG += 2 * t2.dG;
    sum.dh += 2 * t2.dh;
    sum.dA += 2 * t2.dA;
    sum.db += 2 * t2.db;
    const Eigen::VectorXd combined = forward_differentiate_qp(form, sol, sum).dx;
    const Eigen::VectorXd parts = forward_differentiate_qp(form, sol, t1).dx +
                                  2 * forward_differentiate_qp(form, sol, t2).dx;
    CHECK(inf_norm(combined - parts) < 1e-10 * std::max(1.0, inf_norm(combined)));
}

TEST_CASE("zero tangent yields zero derivative") {
    std::mt19937_64 rng(24);
    const QPForm form = oracles::random_qp(rng);
    const QPSolution sol = solve_tight(form);
    const QPTangentOut out = forward_differentiate_qp(form, sol, QPTangentIn::zero(form));
    CHECK(inf_norm(out.dx) < 1e-12);
    CHECK(inf_norm(out.dlambda) < 1e-12);
}

TEST_CASE("objective gradient is symmetric") {
    std::mt19937_64 rng(25);
    for (int k = 0; k < 5; ++k) {
        const QPForm form = oracles::random_qp(rng);
        const QPSolution sol = solve_tight(form);
        const Eigen::VectorXd seed = oracles::rand_vector(rng, form.n());
        const QPReverseOut rev = reverse_differentiate_qp(form, sol, seed);
        CHECK((rev.gQ - rev.gQ.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    }
}
