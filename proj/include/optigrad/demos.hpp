#pragma once

#include <cstdint>
#include <vector>

#include "optigrad/api.hpp"
#include "optigrad/io.hpp"

namespace optigrad::demos {

// ---- soft-margin SVM sensitivity -------------------------------------------

struct SvmInstance {
    Eigen::MatrixXd X;  // n x d features
    Eigen::VectorXd y;  // labels in {-1, +1}
    double lambda = 0.1;
};

/// Two seeded Gaussian clusters with labels -1 / +1.
SvmInstance make_svm_dataset(int n, int d, std::uint64_t seed, double lambda);

/// Four hand-placed points where exactly two lie on the margin.
SvmInstance make_svm_square(double lambda = 0.05);

/// min lambda ||w||^2 + sum xi  s.t.  y_i (w.X_i + b) + xi_i >= 1, xi >= 0.
/// Variables ordered w_0..w_{d-1}, b, xi_0..xi_{n-1}; margin constraints are
/// named "margin_<i>".
NamedProblem svm_problem(const SvmInstance& inst);

struct SvmResult {
    Eigen::VectorXd w;
    double b = 0;
    /// Per point: ||dw/dX_i|| + |db/dX_i| under the uniform-coordinate
    /// perturbation of row i.
    Eigen::VectorXd sensitivity;
};

SvmResult run_svm_sensitivity(const SvmInstance& inst, const SolverSettings& settings = {});

// ---- univariate ridge sensitivity ------------------------------------------

struct RidgeInstance {
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    double alpha = 0.1;
};

RidgeInstance make_ridge_dataset(int n, std::uint64_t seed, double alpha);

/// min sum (y_i - w x_i - b)^2 + alpha (w^2 + b^2), variables (w, b).
NamedProblem ridge_problem(const RidgeInstance& inst);

/// Perturbation functions for data entries, expanded to tangent functions of
/// (w, b) at the fitted solution: d/dx_i gives 2w^2 x_i + 2bw - 2w y_i and
/// d/dy_i gives 2 y_i - 2b - 2w x_i.
ScalarQuadraticFunction ridge_dx_tangent(const RidgeInstance& inst, int i);
ScalarQuadraticFunction ridge_dy_tangent(const RidgeInstance& inst, int i);

struct RidgeResult {
    double w = 0, b = 0;
    Eigen::VectorXd dw_dx;
    Eigen::VectorXd dw_dy;
};

RidgeResult run_ridge_sensitivity(const RidgeInstance& inst, const SolverSettings& settings = {});

// ---- hyperparameter descent on the ridge regularizer ------------------------

struct HyperparamInstance {
    Eigen::MatrixXd X_train, X_test;
    Eigen::VectorXd y_train, y_test;

    int dim() const { return static_cast<int>(X_train.cols()); }
};

HyperparamInstance make_hyperparam_dataset(std::uint64_t seed, int n_train = 12, int n_test = 50,
                                           int d = 8);

/// min (1/(2ND)) ||Xw - y||^2 + (alpha/(2D)) ||w||^2 over the training split.
NamedProblem hyperparam_problem(const HyperparamInstance& inst, double alpha);

struct HyperparamFit {
    Eigen::VectorXd w;
    Eigen::VectorXd dw_dalpha;
};

HyperparamFit fit_ridge_alpha(const HyperparamInstance& inst, double alpha,
                              const SolverSettings& settings = {});

double hyperparam_test_loss(const HyperparamInstance& inst, const Eigen::VectorXd& w);

/// Chain rule: dl_test/dalpha = grad_w l_test . dw/dalpha.
double hyperparam_loss_gradient(const HyperparamInstance& inst, const HyperparamFit& fit);

struct DescentRow {
    int iter = 0;
    double alpha = 0;
    double grad = 0;
    double test_loss = 0;
    bool clamped = false;
};

std::vector<DescentRow> run_hyperparam_descent(const HyperparamInstance& inst, double alpha0,
                                               int max_iters, double step, double grad_tol,
                                               const SolverSettings& settings = {});

// ---- projection layers -------------------------------------------------------

struct ReluInstance {
    Eigen::MatrixXd y;        // batch x size layer inputs
    Eigen::MatrixXd seed;     // batch x size upstream dl/dx
};

ReluInstance make_relu_instance(int batch, int size, std::uint64_t seed);

/// Block-diagonal batched projection onto the nonnegative orthant:
/// min sum_s (x_s.x_s - 2 y_s.x_s)  s.t.  x_s >= 0. Variable s*size+j is
/// coordinate j of sample s; nonnegativity is constraint "nn_<s>".
NamedProblem relu_problem(const ReluInstance& inst);

struct ReluResult {
    Eigen::MatrixXd x;      // projections
    Eigen::MatrixXd dl_dy;  // pullback of the seeds to the layer inputs
};

ReluResult run_relu_layer(const ReluInstance& inst, const SolverSettings& settings = {});

struct PolytopeInstance {
    Eigen::MatrixXd y;     // batch x size
    Eigen::MatrixXd seed;  // batch x size
    Eigen::MatrixXd W;     // facets x size, shared across the batch
    Eigen::VectorXd b;     // facet offsets, w_i.x >= b_i
};

/// Draws a polytope with a guaranteed interior point plus batch inputs; the
/// draw is rejected (resampled by the caller) if the projection QP fails.
PolytopeInstance make_polytope_instance(int batch, int size, std::uint64_t seed);

/// Facet i of sample s is constraint "facet_<s>_<i>": W.row(i) x_s >= b_i.
NamedProblem polytope_problem(const PolytopeInstance& inst);

struct PolytopeResult {
    Eigen::MatrixXd x;
    Eigen::MatrixXd dl_dy;
    Eigen::MatrixXd dl_dW;  // averaged over the batch
    Eigen::VectorXd dl_db;  // averaged over the batch
    bool solved = false;
};

PolytopeResult run_polytope_layer(const PolytopeInstance& inst,
                                  const SolverSettings& settings = {});

}  // namespace optigrad::demos
