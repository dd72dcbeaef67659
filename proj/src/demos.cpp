#include "optigrad/demos.hpp"

#include <random>
#include <stdexcept>

namespace optigrad::demos {

namespace {

Eigen::MatrixXd random_normal(std::mt19937_64& rng, int rows, int cols, double sigma = 1.0) {
    std::normal_distribution<double> dist(0.0, sigma);
    Eigen::MatrixXd out(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) out(i, j) = dist(rng);
    }
    return out;
}

}  // namespace

// ---- SVM ---------------------------------------------------------------------

SvmInstance make_svm_dataset(int n, int d, std::uint64_t seed, double lambda) {
    if (n < 4 || d < 1) throw std::invalid_argument("make_svm_dataset: need n >= 4, d >= 1");
    std::mt19937_64 rng(seed);
    SvmInstance inst;
    inst.lambda = lambda;
    inst.X = random_normal(rng, n, d, 0.8);
    inst.y.resize(n);
    for (int i = 0; i < n; ++i) {
        const double label = i < n / 2 ? -1.0 : 1.0;
        inst.y[i] = label;
        inst.X(i, 0) += 1.5 * label;  // shift the clusters apart along axis 0
    }
    return inst;
}

SvmInstance make_svm_square(double lambda) {
    SvmInstance inst;
    inst.lambda = lambda;
    inst.X.resize(4, 2);
    inst.X << 0, 0, 1, -1, 0, 1, 1, 2;
    inst.y.resize(4);
    inst.y << -1, -1, 1, 1;
    return inst;
}

NamedProblem svm_problem(const SvmInstance& inst) {
    const int n = static_cast<int>(inst.X.rows());
    const int d = static_cast<int>(inst.X.cols());
    NamedProblem out;
    for (int k = 0; k < d; ++k) out.variable_names.push_back("w" + std::to_string(k));
    out.variable_names.push_back("b");
    for (int i = 0; i < n; ++i) out.variable_names.push_back("xi" + std::to_string(i));

    ScalarQuadraticFunction obj;
    for (int k = 0; k < d; ++k) obj.quadratic_terms.push_back({k, k, 2.0 * inst.lambda});
    for (int i = 0; i < n; ++i) obj.affine.terms.push_back({d + 1 + i, 1.0});

    std::vector<Constraint> constraints;
    for (int i = 0; i < n; ++i) {
        ScalarAffineFunction f;
        for (int k = 0; k < d; ++k) f.terms.push_back({k, inst.y[i] * inst.X(i, k)});
        f.terms.push_back({d, inst.y[i]});
        f.terms.push_back({d + 1 + i, 1.0});
        constraints.push_back(
            {"margin_" + std::to_string(i), {{f}}, ConeSet::greater_than(1.0)});
    }
    VectorAffineFunction slack;
    for (int i = 0; i < n; ++i) {
        slack.rows.push_back({{{d + 1 + i, 1.0}}, 0.0});
    }
    constraints.push_back({"slack", slack, ConeSet::nonnegative(n)});

    out.model = build_problem(d + 1 + n, std::move(obj), std::move(constraints));
    return out;
}

SvmResult run_svm_sensitivity(const SvmInstance& inst, const SolverSettings& settings) {
    const int n = static_cast<int>(inst.X.rows());
    const int d = static_cast<int>(inst.X.cols());
    DiffEngine engine(svm_problem(inst).model, settings);
    const SolveStatus status = engine.optimize();
    if (!status.optimal()) throw std::runtime_error("svm fit failed: " + solve_tag_name(status.tag));

    SvmResult out;
    out.w.resize(d);
    for (int k = 0; k < d; ++k) out.w[k] = engine.variable_value(k);
    out.b = engine.variable_value(d);
    out.sensitivity.resize(n);
    for (int i = 0; i < n; ++i) {
        engine.reset_tangents();
        // Shifting every coordinate of X_i by the same amount perturbs the
        // margin constraint of point i by y_i * sum_k w_k.
        ScalarAffineFunction tangent;
        for (int k = 0; k < d; ++k) tangent.terms.push_back({k, inst.y[i]});
        engine.set_forward_constraint("margin_" + std::to_string(i), tangent);
        engine.forward_differentiate();
        double dw_norm2 = 0;
        for (int k = 0; k < d; ++k) {
            const double dw = engine.get_forward_variable(k);
            dw_norm2 += dw * dw;
        }
        out.sensitivity[i] = std::sqrt(dw_norm2) + std::abs(engine.get_forward_variable(d));
    }
    return out;
}

// ---- ridge -------------------------------------------------------------------

RidgeInstance make_ridge_dataset(int n, std::uint64_t seed, double alpha) {
    if (n < 2) throw std::invalid_argument("make_ridge_dataset: need n >= 2");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    RidgeInstance inst;
    inst.alpha = alpha;
    inst.x.resize(n);
    inst.y.resize(n);
    for (int i = 0; i < n; ++i) {
        inst.x[i] = unif(rng);
        inst.y[i] = 1.3 * inst.x[i] - 0.4 + noise(rng);
    }
    return inst;
}

NamedProblem ridge_problem(const RidgeInstance& inst) {
    const int n = static_cast<int>(inst.x.size());
    NamedProblem out;
    out.variable_names = {"w", "b"};
    // sum (y - wx - b)^2 + alpha (w^2 + b^2) under the (1/2) x^T Q x reading.
    ScalarQuadraticFunction obj;
    obj.quadratic_terms.push_back({0, 0, 2.0 * (inst.x.squaredNorm() + inst.alpha)});
    obj.quadratic_terms.push_back({0, 1, 2.0 * inst.x.sum()});
    obj.quadratic_terms.push_back({1, 1, 2.0 * (n + inst.alpha)});
    obj.affine.terms.push_back({0, -2.0 * inst.x.dot(inst.y)});
    obj.affine.terms.push_back({1, -2.0 * inst.y.sum()});
    obj.affine.constant = inst.y.squaredNorm();
    out.model = build_problem(2, std::move(obj), {});
    return out;
}

ScalarQuadraticFunction ridge_dx_tangent(const RidgeInstance& inst, int i) {
    // d/dx_i of the fit term: 2w^2 x_i + 2bw - 2w y_i.
    ScalarQuadraticFunction t;
    t.quadratic_terms.push_back({0, 0, 4.0 * inst.x[i]});
    t.quadratic_terms.push_back({0, 1, 2.0});
    t.affine.terms.push_back({0, -2.0 * inst.y[i]});
    return t;
}

ScalarQuadraticFunction ridge_dy_tangent(const RidgeInstance& inst, int i) {
    // d/dy_i of the fit term: 2 y_i - 2b - 2w x_i.
    ScalarQuadraticFunction t;
    t.affine.terms.push_back({0, -2.0 * inst.x[i]});
    t.affine.terms.push_back({1, -2.0});
    t.affine.constant = 2.0 * inst.y[i];
    return t;
}

RidgeResult run_ridge_sensitivity(const RidgeInstance& inst, const SolverSettings& settings) {
    const int n = static_cast<int>(inst.x.size());
    DiffEngine engine(ridge_problem(inst).model, settings);
    const SolveStatus status = engine.optimize();
    if (!status.optimal()) {
        throw std::runtime_error("ridge fit failed: " + solve_tag_name(status.tag));
    }
    RidgeResult out;
    out.w = engine.variable_value(0);
    out.b = engine.variable_value(1);
    out.dw_dx.resize(n);
    out.dw_dy.resize(n);
    for (int i = 0; i < n; ++i) {
        engine.reset_tangents();
        engine.set_forward_objective(ridge_dx_tangent(inst, i));
        engine.forward_differentiate();
        out.dw_dx[i] = engine.get_forward_variable(0);

        engine.reset_tangents();
        engine.set_forward_objective(ridge_dy_tangent(inst, i));
        engine.forward_differentiate();
        out.dw_dy[i] = engine.get_forward_variable(0);
    }
    return out;
}

// ---- hyperparameter descent ----------------------------------------------------

HyperparamInstance make_hyperparam_dataset(std::uint64_t seed, int n_train, int n_test, int d) {
    std::mt19937_64 rng(seed);
    HyperparamInstance inst;
    // Few noisy samples relative to the dimension, so the regularizer has an
    // interior optimum and descent on alpha has somewhere to go.
    inst.X_train = random_normal(rng, n_train, d);
    inst.X_test = random_normal(rng, n_test, d);
    const Eigen::VectorXd w_true = random_normal(rng, d, 1);
    inst.y_train = inst.X_train * w_true + random_normal(rng, n_train, 1, 1.0).col(0);
    inst.y_test = inst.X_test * w_true + random_normal(rng, n_test, 1, 1.0).col(0);
    return inst;
}

NamedProblem hyperparam_problem(const HyperparamInstance& inst, double alpha) {
    const int d = inst.dim();
    const int n = static_cast<int>(inst.X_train.rows());
    const double nd = static_cast<double>(n) * d;
    NamedProblem out;
    for (int k = 0; k < d; ++k) out.variable_names.push_back("w" + std::to_string(k));

    // (1/(2ND)) ||Xw - y||^2 + (alpha/(2D)) ||w||^2.
    const Eigen::MatrixXd q =
        inst.X_train.transpose() * inst.X_train / nd +
        (alpha / d) * Eigen::MatrixXd::Identity(d, d);
    const Eigen::VectorXd c = -inst.X_train.transpose() * inst.y_train / nd;
    ScalarQuadraticFunction obj;
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) obj.quadratic_terms.push_back({i, j, q(i, j)});
        obj.affine.terms.push_back({i, c[i]});
    }
    obj.affine.constant = inst.y_train.squaredNorm() / (2.0 * nd);
    out.model = build_problem(d, std::move(obj), {});
    return out;
}

HyperparamFit fit_ridge_alpha(const HyperparamInstance& inst, double alpha,
                              const SolverSettings& settings) {
    const int d = inst.dim();
    DiffEngine engine(hyperparam_problem(inst, alpha).model, settings);
    const SolveStatus status = engine.optimize();
    if (!status.optimal()) {
        throw std::runtime_error("ridge fit failed: " + solve_tag_name(status.tag));
    }
    // d(objective)/d(alpha) = <w, w> / (2D).
    ScalarQuadraticFunction tangent;
    for (int i = 0; i < d; ++i) tangent.quadratic_terms.push_back({i, i, 1.0 / d});
    engine.set_forward_objective(tangent);
    engine.forward_differentiate();

    HyperparamFit fit;
    fit.w.resize(d);
    fit.dw_dalpha.resize(d);
    for (int i = 0; i < d; ++i) {
        fit.w[i] = engine.variable_value(i);
        fit.dw_dalpha[i] = engine.get_forward_variable(i);
    }
    return fit;
}

double hyperparam_test_loss(const HyperparamInstance& inst, const Eigen::VectorXd& w) {
    const double nd = static_cast<double>(inst.X_test.rows()) * inst.dim();
    return (inst.X_test * w - inst.y_test).squaredNorm() / (2.0 * nd);
}

double hyperparam_loss_gradient(const HyperparamInstance& inst, const HyperparamFit& fit) {
    const double nd = static_cast<double>(inst.X_test.rows()) * inst.dim();
    const Eigen::VectorXd err = inst.X_test * fit.w - inst.y_test;
    return err.dot(inst.X_test * fit.dw_dalpha) / nd;
}

std::vector<DescentRow> run_hyperparam_descent(const HyperparamInstance& inst, double alpha0,
                                               int max_iters, double step, double grad_tol,
                                               const SolverSettings& settings) {
    if (alpha0 <= 0) throw std::invalid_argument("run_hyperparam_descent: alpha0 must be > 0");
    std::vector<DescentRow> rows;
    double alpha = alpha0;
    for (int iter = 0; iter < max_iters; ++iter) {
        const HyperparamFit fit = fit_ridge_alpha(inst, alpha, settings);
        DescentRow row;
        row.iter = iter;
        row.alpha = alpha;
        row.grad = hyperparam_loss_gradient(inst, fit);
        row.test_loss = hyperparam_test_loss(inst, fit.w);
        double next = alpha - step * row.grad;
        if (next <= 0) {
            next = 1e-8;
            row.clamped = true;
        }
        rows.push_back(row);
        if (std::abs(row.grad) <= grad_tol) break;
        alpha = next;
    }
    return rows;
}

// ---- projection layers ---------------------------------------------------------

ReluInstance make_relu_instance(int batch, int size, std::uint64_t seed) {
    if (batch < 1 || size < 1) throw std::invalid_argument("make_relu_instance: bad shape");
    std::mt19937_64 rng(seed);
    ReluInstance inst;
    inst.y = random_normal(rng, batch, size);
    inst.seed = random_normal(rng, batch, size);
    return inst;
}

NamedProblem relu_problem(const ReluInstance& inst) {
    const int batch = static_cast<int>(inst.y.rows());
    const int size = static_cast<int>(inst.y.cols());
    NamedProblem out;
    ScalarQuadraticFunction obj;
    std::vector<Constraint> constraints;
    for (int s = 0; s < batch; ++s) {
        VectorAffineFunction block;
        for (int j = 0; j < size; ++j) {
            const int var = s * size + j;
            out.variable_names.push_back("x" + std::to_string(s) + "_" + std::to_string(j));
            obj.quadratic_terms.push_back({var, var, 2.0});
            obj.affine.terms.push_back({var, -2.0 * inst.y(s, j)});
            block.rows.push_back({{{var, 1.0}}, 0.0});
        }
        constraints.push_back({"nn_" + std::to_string(s), block, ConeSet::nonnegative(size)});
    }
    out.model = build_problem(batch * size, std::move(obj), std::move(constraints));
    return out;
}

ReluResult run_relu_layer(const ReluInstance& inst, const SolverSettings& settings) {
    const int batch = static_cast<int>(inst.y.rows());
    const int size = static_cast<int>(inst.y.cols());
    DiffEngine engine(relu_problem(inst).model, settings);
    const SolveStatus status = engine.optimize();
    if (!status.optimal()) {
        throw std::runtime_error("relu projection failed: " + solve_tag_name(status.tag));
    }
    for (int s = 0; s < batch; ++s) {
        for (int j = 0; j < size; ++j) engine.set_reverse_variable(s * size + j, inst.seed(s, j));
    }
    engine.reverse_differentiate();
    const ScalarQuadraticFunction& grad = engine.get_reverse_objective();

    ReluResult out;
    out.x.resize(batch, size);
    out.dl_dy.setZero(batch, size);
    for (int s = 0; s < batch; ++s) {
        for (int j = 0; j < size; ++j) out.x(s, j) = engine.variable_value(s * size + j);
    }
    // The layer input enters only through the linear coefficient -2 y.
    for (const auto& term : grad.affine.terms) {
        out.dl_dy(term.var / size, term.var % size) = -2.0 * term.coeff;
    }
    return out;
}

PolytopeInstance make_polytope_instance(int batch, int size, std::uint64_t seed) {
    if (batch < 1 || size < 1) throw std::invalid_argument("make_polytope_instance: bad shape");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> margin(0.2, 1.0);
    PolytopeInstance inst;
    inst.W = random_normal(rng, size, size);
    for (int i = 0; i < size; ++i) inst.W.row(i).normalize();
    // Anchor the offsets on an interior point so the polytope is nonempty.
    const Eigen::VectorXd anchor = random_normal(rng, size, 1).col(0) * 0.3;
    inst.b.resize(size);
    for (int i = 0; i < size; ++i) inst.b[i] = inst.W.row(i).dot(anchor) - margin(rng);
    // Inputs drawn wide so a good share of projections hit facets.
    inst.y = random_normal(rng, batch, size, 2.0);
    inst.seed = random_normal(rng, batch, size);
    return inst;
}

NamedProblem polytope_problem(const PolytopeInstance& inst) {
    const int batch = static_cast<int>(inst.y.rows());
    const int size = static_cast<int>(inst.y.cols());
    const int facets = static_cast<int>(inst.W.rows());
    NamedProblem out;
    ScalarQuadraticFunction obj;
    std::vector<Constraint> constraints;
    for (int s = 0; s < batch; ++s) {
        for (int j = 0; j < size; ++j) {
            const int var = s * size + j;
            out.variable_names.push_back("x" + std::to_string(s) + "_" + std::to_string(j));
            obj.quadratic_terms.push_back({var, var, 2.0});
            obj.affine.terms.push_back({var, -2.0 * inst.y(s, j)});
        }
        for (int i = 0; i < facets; ++i) {
            ScalarAffineFunction f;
            for (int j = 0; j < size; ++j) f.terms.push_back({s * size + j, inst.W(i, j)});
            constraints.push_back({"facet_" + std::to_string(s) + "_" + std::to_string(i),
                                   {{f}},
                                   ConeSet::greater_than(inst.b[i])});
        }
    }
    out.model = build_problem(batch * size, std::move(obj), std::move(constraints));
    return out;
}

PolytopeResult run_polytope_layer(const PolytopeInstance& inst, const SolverSettings& settings) {
    const int batch = static_cast<int>(inst.y.rows());
    const int size = static_cast<int>(inst.y.cols());
    const int facets = static_cast<int>(inst.W.rows());
    PolytopeResult out;
    DiffEngine engine(polytope_problem(inst).model, settings);
    if (!engine.optimize().optimal()) return out;

    for (int s = 0; s < batch; ++s) {
        for (int j = 0; j < size; ++j) engine.set_reverse_variable(s * size + j, inst.seed(s, j));
    }
    engine.reverse_differentiate();

    out.solved = true;
    out.x.resize(batch, size);
    out.dl_dy.setZero(batch, size);
    out.dl_dW.setZero(facets, size);
    out.dl_db.setZero(facets);
    for (int s = 0; s < batch; ++s) {
        for (int j = 0; j < size; ++j) out.x(s, j) = engine.variable_value(s * size + j);
    }
    const ScalarQuadraticFunction& obj_grad = engine.get_reverse_objective();
    for (const auto& term : obj_grad.affine.terms) {
        out.dl_dy(term.var / size, term.var % size) = -2.0 * term.coeff;
    }
    for (int s = 0; s < batch; ++s) {
        for (int i = 0; i < facets; ++i) {
            const VectorAffineFunction& g = engine.get_reverse_constraint(
                "facet_" + std::to_string(s) + "_" + std::to_string(i));
            for (const auto& term : g.rows[0].terms) {
                // Only coefficients on this sample's variables correspond to
                // entries of W; cross-sample entries are gradients with
                // respect to coefficients that are structurally zero.
                if (term.var / size != s) continue;
                out.dl_dW(i, term.var % size) += term.coeff / batch;
            }
            out.dl_db[i] += g.rows[0].constant / batch;
        }
    }
    return out;
}

}  // namespace optigrad::demos
