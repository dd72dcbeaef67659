#include "optigrad/solvers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "optigrad/conic_diff.hpp"

namespace optigrad {

namespace {

double inf_norm(const Eigen::VectorXd& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

void check_psd_objective(const Eigen::MatrixXd& q) {
    if (q.size() == 0) return;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -1e-8 * scale) {
        throw std::invalid_argument("solve_qp: Q is not positive semidefinite");
    }
}

// Solves the equality-constrained KKT system
//   [Q A^T; A 0] [x; mu] = [-c; b]
// by a rank-revealing decomposition (minimum-norm on rank deficiency).
struct EqKktResult {
    Eigen::VectorXd x;
    Eigen::VectorXd mu;
    bool consistent = false;
};

EqKktResult solve_eq_kkt(const Eigen::MatrixXd& q, const Eigen::VectorXd& c,
                         const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    const int n = static_cast<int>(c.size());
    const int m = static_cast<int>(b.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
    kkt.topLeftCorner(n, n) = q;
    if (m > 0) {
        kkt.topRightCorner(n, m) = a.transpose();
        kkt.bottomLeftCorner(m, n) = a;
    }
    Eigen::VectorXd rhs(n + m);
    rhs.head(n) = -c;
    rhs.tail(m) = b;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kkt);
    Eigen::VectorXd sol = cod.solve(rhs);
    EqKktResult res;
    res.x = sol.head(n);
    res.mu = sol.tail(m);
    const double scale = 1.0 + inf_norm(rhs);
    res.consistent = inf_norm(kkt * sol - rhs) <= 1e-9 * scale;
    return res;
}

double qp_kkt_residual(const QPForm& form, const QPSolution& sol) {
    Eigen::VectorXd stat = form.Q * sol.x + form.c;
    if (form.p() > 0) stat += form.G.transpose() * sol.lambda;
    if (form.m() > 0) stat += form.A.transpose() * sol.mu;
    double r = inf_norm(stat);
    if (form.m() > 0) r = std::max(r, inf_norm(form.A * sol.x - form.b));
    if (form.p() > 0) {
        Eigen::VectorXd slack = form.h - form.G * sol.x;
        r = std::max(r, std::max(0.0, -slack.minCoeff()));
        r = std::max(r, std::max(0.0, -sol.lambda.minCoeff()));
        r = std::max(r, inf_norm(slack.cwiseProduct(sol.lambda)));
    }
    return r;
}

// Refines an interior-point iterate by guessing the active set, solving the
// corresponding equality-constrained KKT system exactly, and repairing the
// guess: rows with negative multipliers leave, violated rows enter.
bool active_set_polish(const QPForm& form, QPSolution& sol, double tol) {
    const int n = form.n(), p = form.p(), m = form.m();
    Eigen::VectorXd slack = form.h - form.G * sol.x;
    std::vector<bool> active(p, false);
    for (int i = 0; i < p; ++i) active[i] = sol.lambda[i] > slack[i];

    for (int round = 0; round < 30; ++round) {
        std::vector<int> idx;
        for (int i = 0; i < p; ++i) {
            if (active[i]) idx.push_back(i);
        }
        const int na = static_cast<int>(idx.size());
        Eigen::MatrixXd eq(m + na, n);
        Eigen::VectorXd eq_rhs(m + na);
        if (m > 0) {
            eq.topRows(m) = form.A;
            eq_rhs.head(m) = form.b;
        }
        for (int i = 0; i < na; ++i) {
            eq.row(m + i) = form.G.row(idx[i]);
            eq_rhs[m + i] = form.h[idx[i]];
        }
        EqKktResult kkt = solve_eq_kkt(form.Q, form.c, eq, eq_rhs);
        if (!kkt.consistent) return false;

        QPSolution polished;
        polished.x = kkt.x;
        polished.mu = kkt.mu.head(m);
        polished.lambda = Eigen::VectorXd::Zero(p);
        for (int i = 0; i < na; ++i) polished.lambda[idx[i]] = kkt.mu[m + i];
        const Eigen::VectorXd new_slack = form.h - form.G * polished.x;

        int worst_neg = -1, worst_violated = -1;
        double neg = -tol, violation = -tol;
        for (int i = 0; i < p; ++i) {
            if (active[i] && polished.lambda[i] < neg) {
                neg = polished.lambda[i];
                worst_neg = i;
            }
            if (!active[i] && new_slack[i] < violation) {
                violation = new_slack[i];
                worst_violated = i;
            }
        }
        if (worst_neg >= 0) {
            active[worst_neg] = false;
            continue;
        }
        if (worst_violated >= 0) {
            active[worst_violated] = true;
            continue;
        }

        polished.lambda = polished.lambda.cwiseMax(0.0);
        polished.kkt_residual = qp_kkt_residual(form, polished);
        if (polished.kkt_residual <= std::max(tol, sol.kkt_residual)) {
            sol = polished;
            return true;
        }
        return false;
    }
    return false;
}

}  // namespace

std::string solve_tag_name(SolveTag tag) {
    switch (tag) {
        case SolveTag::Optimal: return "optimal";
        case SolveTag::MaxIter: return "max_iter";
        case SolveTag::Infeasible: return "infeasible";
        case SolveTag::Unbounded: return "unbounded";
        case SolveTag::NumericalError: return "numerical_error";
    }
    return "unknown";
}

std::pair<QPSolution, SolveStatus> solve_qp(const QPForm& form, const SolverSettings& settings) {
    const int n = form.n(), p = form.p(), m = form.m();
    check_psd_objective(form.Q);

    QPSolution sol;
    SolveStatus status;

    if (p == 0) {
        // No inequalities: one equality-constrained KKT solve.
        EqKktResult kkt = solve_eq_kkt(form.Q, form.c, form.A, form.b);
        sol.x = kkt.x;
        sol.mu = kkt.mu;
        sol.lambda = Eigen::VectorXd::Zero(0);
        sol.kkt_residual = qp_kkt_residual(form, sol);
        if (kkt.consistent) {
            status.tag = SolveTag::Optimal;
        } else {
            // c has a component outside the range of [Q; A]: descent along an
            // unconstrained direction, or inconsistent equalities.
            Eigen::VectorXd eq_res = m > 0 ? (form.A * sol.x - form.b).eval()
                                           : Eigen::VectorXd::Zero(0);
            status.tag = inf_norm(eq_res) > 1e-7 ? SolveTag::Infeasible : SolveTag::Unbounded;
        }
        status.primal_residual = m > 0 ? inf_norm(form.A * sol.x - form.b) : 0.0;
        status.dual_residual = sol.kkt_residual;
        return {sol, status};
    }

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd s = Eigen::VectorXd::Ones(p);
    Eigen::VectorXd lam = Eigen::VectorXd::Ones(p);
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(m);

    const double data_scale =
        1.0 + std::max({inf_norm(form.c), inf_norm(form.h), inf_norm(form.b)});
    const int max_ipm_iter = std::min(settings.max_iter, 200);

    // best iterate seen, in case the iteration stalls or diverges later
    Eigen::VectorXd best_x = x, best_s = s, best_lam = lam, best_mu = mu;
    double best_worst = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < max_ipm_iter; ++iter) {
        Eigen::VectorXd rd = form.Q * x + form.c + form.G.transpose() * lam;
        if (m > 0) rd += form.A.transpose() * mu;
        Eigen::VectorXd rp = form.G * x + s - form.h;
        Eigen::VectorXd re = m > 0 ? (form.A * x - form.b).eval() : Eigen::VectorXd::Zero(0);
        const double comp = s.dot(lam) / p;
        status.iterations = iter;
        status.primal_residual = std::max(inf_norm(rp), inf_norm(re));
        status.dual_residual = inf_norm(rd);
        status.gap = comp;

        const double worst_now = std::max({status.primal_residual, status.dual_residual, comp});
        if (!std::isfinite(worst_now)) break;
        if (worst_now < best_worst) {
            best_worst = worst_now;
            best_x = x;
            best_s = s;
            best_lam = lam;
            best_mu = mu;
        }

        if (status.primal_residual <= settings.tol * data_scale &&
            status.dual_residual <= settings.tol * data_scale &&
            comp <= settings.tol * data_scale) {
            status.tag = SolveTag::Optimal;
            break;
        }

        // Farkas-type certificate check on the scaled duals.
        const double dual_scale = std::max(inf_norm(lam), inf_norm(mu));
        if (dual_scale > 1e8) {
            Eigen::VectorXd gl = form.G.transpose() * (lam / dual_scale);
            if (m > 0) gl += form.A.transpose() * (mu / dual_scale);
            double support = form.h.dot(lam / dual_scale);
            if (m > 0) support += form.b.dot(mu / dual_scale);
            if (inf_norm(gl) <= 1e-7 && support < -1e-7) {
                status.tag = SolveTag::Infeasible;
                return {sol, status};
            }
        }
        if (inf_norm(x) > 1e9 * data_scale) {
            status.tag = SolveTag::Unbounded;
            sol.x = x;
            return {sol, status};
        }

        // Reduced Newton system in (dx, dmu).
        Eigen::VectorXd w = lam.cwiseQuotient(s);
        Eigen::MatrixXd red = Eigen::MatrixXd::Zero(n + m, n + m);
        red.topLeftCorner(n, n) =
            form.Q + form.G.transpose() * w.asDiagonal() * form.G;
        if (m > 0) {
            red.topRightCorner(n, m) = form.A.transpose();
            red.bottomLeftCorner(m, n) = form.A;
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(red);

        auto solve_newton = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dx,
                                Eigen::VectorXd& ds, Eigen::VectorXd& dlam,
                                Eigen::VectorXd& dmu) {
            Eigen::VectorXd rhs(n + m);
            rhs.head(n) =
                -rd - form.G.transpose() * (lam.cwiseProduct(rp) - rc).cwiseQuotient(s);
            rhs.tail(m) = -re;
            Eigen::VectorXd step = lu.solve(rhs);
            dx = step.head(n);
            dmu = step.tail(m);
            ds = -rp - form.G * dx;
            dlam = (-rc - lam.cwiseProduct(ds)).cwiseQuotient(s);
        };
        auto max_step = [](const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
            double a = 1.0;
            for (int i = 0; i < v.size(); ++i) {
                if (dv[i] < 0) a = std::min(a, -v[i] / dv[i]);
            }
            return a;
        };

        Eigen::VectorXd dx, ds, dlam, dmu;
        solve_newton(s.cwiseProduct(lam), dx, ds, dlam, dmu);
        const double a_aff = std::min(max_step(s, ds), max_step(lam, dlam));
        const double comp_aff = (s + a_aff * ds).dot(lam + a_aff * dlam) / p;
        const double sigma = std::pow(comp_aff / comp, 3);

        Eigen::VectorXd rc = s.cwiseProduct(lam) + ds.cwiseProduct(dlam) -
                             Eigen::VectorXd::Constant(p, sigma * comp);
        solve_newton(rc, dx, ds, dlam, dmu);
        const double alpha =
            std::min(1.0, 0.99 * std::min(max_step(s, ds), max_step(lam, dlam)));
        x += alpha * dx;
        s += alpha * ds;
        lam += alpha * dlam;
        if (m > 0) mu += alpha * dmu;
    }

    sol.x = best_x;
    sol.lambda = best_lam;
    sol.mu = best_mu;
    sol.kkt_residual = qp_kkt_residual(form, sol);
    if (sol.kkt_residual <= 1e-5 * data_scale) {
        // close enough that the active-set guess is trustworthy; on success
        // the polished point is exact up to the linear-algebra accuracy
        active_set_polish(form, sol, settings.tol);
    }
    // accept mild overshoot of a very tight tolerance, but never a point the
    // caller could mistake for machine accurate
    const double accept = std::max(settings.tol, 1e-9) * data_scale;
    status.tag = sol.kkt_residual <= accept ? SolveTag::Optimal : SolveTag::MaxIter;
    if (status.tag == SolveTag::Optimal) {
        status.primal_residual = status.dual_residual = sol.kkt_residual;
        status.gap = sol.kkt_residual;
    }
    return {sol, status};
}

namespace {

struct ConicExtract {
    ConicSolution sol;
    bool valid = false;
};

ConicExtract extract_conic(const ConicForm& form, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& v) {
    const int n = form.n(), m = form.m();
    const double tau = u[n + m];
    ConicExtract out;
    if (tau < 1e-10) return out;
    out.sol.x = u.head(n) / tau;
    out.sol.y = u.segment(n, m) / tau;
    out.sol.s = v.segment(n, m) / tau;
    out.sol.primal_residual = inf_norm(form.A * out.sol.x + out.sol.s - form.b);
    out.sol.dual_residual = inf_norm(form.A.transpose() * out.sol.y + form.c);
    out.sol.gap = std::abs(form.c.dot(out.sol.x) + form.b.dot(out.sol.y));
    out.valid = true;
    return out;
}

// Newton refinement of the HSDE point against the normalized residual map.
void newton_polish(const ConicForm& form, const Eigen::MatrixXd& q, Eigen::VectorXd& z) {
    const int n = form.n();
    for (int iter = 0; iter < 25; ++iter) {
        Eigen::VectorXd r = normalized_residual(z, q, form.cones, n);
        if (inf_norm(r) < 1e-14) break;
        Eigen::MatrixXd jac = d_z_residual(z, q, form.cones, n, /*check_residual=*/false);
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
        cod.setThreshold(1e-10);
        cod.compute(jac);
        const Eigen::VectorXd dz = cod.solve(r);
        // backtracking on the residual norm; the full step can overshoot when
        // the iterate starts far from the solution manifold
        double alpha = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 20; ++bt, alpha *= 0.5) {
            Eigen::VectorXd z_new = z - alpha * dz;
            if (z_new[z.size() - 1] <= 0) continue;
            if (inf_norm(normalized_residual(z_new, q, form.cones, n)) < inf_norm(r)) {
                z = z_new;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
}

}  // namespace

std::pair<ConicSolution, SolveStatus> solve_conic(const ConicForm& form,
                                                  const SolverSettings& settings) {
    const int n = form.n(), m = form.m();
    const int nn = n + m + 1;
    if (form.cones.total_dim() != m) {
        throw std::invalid_argument("solve_conic: cone dims do not partition rows");
    }
    const Eigen::MatrixXd q = assemble_skew_q(form.A, form.b, form.c);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd::Identity(nn, nn) + q);

    Eigen::VectorXd u = Eigen::VectorXd::Zero(nn);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(nn);
    u[nn - 1] = 1.0;
    v[nn - 1] = 1.0;

    const double relax = 1.5;
    const double data_scale = 1.0 + std::max(inf_norm(form.b), inf_norm(form.c));
    SolveStatus status;
    ConicExtract best;

    for (int iter = 0; iter < settings.max_iter; ++iter) {
        Eigen::VectorXd u_tilde = lu.solve(u + v);
        Eigen::VectorXd t = relax * u_tilde + (1.0 - relax) * u;
        ProjectionResult proj = pi_hsde(t - v, form.cones, n);
        Eigen::VectorXd u_next = proj.value;
        v = v - t + u_next;
        u = u_next;
        status.iterations = iter + 1;

        if (iter % 25 == 24 || iter == settings.max_iter - 1) {
            ConicExtract cand = extract_conic(form, u, v);
            if (cand.valid) {
                best = cand;
                const double worst = std::max(
                    {cand.sol.primal_residual, cand.sol.dual_residual, cand.sol.gap});
                if (worst <= settings.tol * data_scale) {
                    status.tag = SolveTag::Optimal;
                    break;
                }
            } else {
                // tau collapsed: look for a certificate in the ray (u, v).
                const double kappa = v[nn - 1];
                if (kappa > 1e-6 * (1.0 + inf_norm(v))) {
                    const double scale = inf_norm(u) + 1e-12;
                    const double obj_x = form.c.dot(u.head(n)) / scale;
                    const double obj_y = form.b.dot(u.segment(n, m)) / scale;
                    status.tag = obj_x < -1e-9 ? SolveTag::Unbounded : SolveTag::Infeasible;
                    if (obj_x >= -1e-9 && obj_y >= -1e-9) {
                        status.tag = SolveTag::NumericalError;
                    }
                    return {best.sol, status};
                }
            }
        }
    }

    if (!best.valid) {
        status.tag = SolveTag::NumericalError;
        return {best.sol, status};
    }

    // Polish via Newton on the normalized residual of the embedded point.
    Eigen::VectorXd z(nn);
    z.head(n) = best.sol.x;
    z.segment(n, m) = best.sol.y - best.sol.s;
    z[nn - 1] = 1.0;
    newton_polish(form, q, z);
    const double w = z[nn - 1];
    ProjectionResult proj = pi_hsde(z, form.cones, n);
    ConicSolution polished;
    polished.x = z.head(n) / w;
    polished.y = proj.value.segment(n, m) / w;
    polished.s = (proj.value.segment(n, m) - z.segment(n, m)) / w;
    polished.primal_residual = inf_norm(form.A * polished.x + polished.s - form.b);
    polished.dual_residual = inf_norm(form.A.transpose() * polished.y + form.c);
    polished.gap = std::abs(form.c.dot(polished.x) + form.b.dot(polished.y));
    const double worst_polished =
        std::max({polished.primal_residual, polished.dual_residual, polished.gap});
    const double worst_best =
        std::max({best.sol.primal_residual, best.sol.dual_residual, best.sol.gap});
    if (worst_polished <= worst_best) best.sol = polished;

    const double worst =
        std::max({best.sol.primal_residual, best.sol.dual_residual, best.sol.gap});
    status.primal_residual = best.sol.primal_residual;
    status.dual_residual = best.sol.dual_residual;
    status.gap = best.sol.gap;
    // accept mild overshoot of a very tight tolerance, but never a point the
    // caller could mistake for machine accurate
    const double accept = std::max(settings.tol, 1e-9) * data_scale;
    status.tag = worst <= accept ? SolveTag::Optimal : SolveTag::MaxIter;
    return {best.sol, status};
}

}  // namespace optigrad
