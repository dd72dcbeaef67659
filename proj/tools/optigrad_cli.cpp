#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "optigrad/demos.hpp"

namespace {

using nlohmann::json;
using namespace optigrad;

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitSolver = 3;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open output file '" + path + "'");
    out << text;
}

json settings_block(std::initializer_list<std::pair<std::string, json>> items) {
    json j;
    for (const auto& [k, v] : items) j[k] = v;
    return j;
}

int cmd_solve_diff(const std::string& problem_path, const std::string& mode,
                   const std::string& tangent_path, const std::string& out_path,
                   const std::string& solver, double tol) {
    NamedProblem problem;
    TangentSpec tangent;
    try {
        problem = load_problem_file(problem_path);
        tangent = load_tangent_file(tangent_path, problem);
    } catch (const std::exception& err) {
        std::cerr << "parse error: " << err.what() << "\n";
        return kExitParse;
    }

    SolverSettings settings;
    settings.tol = tol;
    DiffEngine engine(problem.model, settings);
    try {
        if (solver == "ipm") engine.force_class(ProblemClass::QP);
        if (solver == "admm") engine.force_class(ProblemClass::Conic);
        const SolveStatus status = engine.optimize();
        if (!status.optimal()) {
            std::cerr << "solver failure: " << solve_tag_name(status.tag) << "\n";
            return kExitSolver;
        }

        json out;
        out["settings"] = settings_block({{"problem", problem_path},
                                          {"mode", mode},
                                          {"tangent", tangent_path},
                                          {"solver", solver},
                                          {"tol", tol}});
        if (mode == "forward") {
            engine.set_forward_objective(tangent.forward.objective);
            for (const auto& [id, f] : tangent.forward.constraints) {
                engine.set_forward_constraint(id, f);
            }
            engine.forward_differentiate();
            json vt = json::object();
            for (int v = 0; v < problem.model.n_vars; ++v) {
                vt[problem.variable_names[v]] = engine.get_forward_variable(v);
            }
            out["variable_tangents"] = vt;
            out["status"] = solve_tag_name(status.tag);
            out["approximate"] = engine.approximate();
        } else {
            for (const auto& [var, value] : tangent.reverse.seeds) {
                engine.set_reverse_variable(var, value);
            }
            engine.reverse_differentiate();
            const auto& og = engine.get_reverse_objective();
            json obj;
            obj["quadratic"] = json::array();
            for (const auto& t : og.quadratic_terms) {
                obj["quadratic"].push_back({t.var1, t.var2, t.coeff});
            }
            obj["linear"] = json::array();
            for (const auto& t : og.affine.terms) obj["linear"].push_back({t.var, t.coeff});
            obj["constant"] = og.affine.constant;
            out["objective_gradient"] = obj;

            json cg = json::object();
            for (const auto& cons : problem.model.constraints) {
                const VectorAffineFunction& g = engine.get_reverse_constraint(cons.id);
                json cj;
                if (g.dim() == 1) {
                    cj["linear"] = json::array();
                    for (const auto& t : g.rows[0].terms) cj["linear"].push_back({t.var, t.coeff});
                    cj["constant"] = g.rows[0].constant;
                } else {
                    cj["rows"] = json::array();
                    cj["constants"] = json::array();
                    for (int r = 0; r < g.dim(); ++r) {
                        for (const auto& t : g.rows[r].terms) {
                            cj["rows"].push_back({r, t.var, t.coeff});
                        }
                        cj["constants"].push_back(g.rows[r].constant);
                    }
                }
                cg[cons.id] = std::move(cj);
            }
            out["constraint_gradients"] = cg;
            out["approximate"] = engine.approximate();
        }
        write_text(out_path, out.dump(2) + "\n");
    } catch (const std::invalid_argument& err) {
        std::cerr << "parse error: " << err.what() << "\n";
        return kExitParse;
    } catch (const std::exception& err) {
        std::cerr << "solver failure: " << err.what() << "\n";
        return kExitSolver;
    }
    return kExitOk;
}

int cmd_svm_sensitivity(int n, int d, std::uint64_t seed, double lambda,
                        const std::string& out_path) {
    try {
        const demos::SvmInstance inst = demos::make_svm_dataset(n, d, seed, lambda);
        const demos::SvmResult res = demos::run_svm_sensitivity(inst);
        std::string csv = "# command=svm-sensitivity n=" + std::to_string(n) +
                          " d=" + std::to_string(d) + " seed=" + std::to_string(seed) +
                          " lambda=" + fmt(lambda) + "\n";
        for (int k = 0; k < d; ++k) csv += "x" + std::to_string(k) + ",";
        csv += "y,sensitivity\n";
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < d; ++k) csv += fmt(inst.X(i, k)) + ",";
            csv += fmt(inst.y[i]) + "," + fmt(res.sensitivity[i]) + "\n";
        }
        write_text(out_path, csv);
    } catch (const std::invalid_argument& err) {
        std::cerr << "parse error: " << err.what() << "\n";
        return kExitParse;
    } catch (const std::exception& err) {
        std::cerr << "solver failure: " << err.what() << "\n";
        return kExitSolver;
    }
    return kExitOk;
}

int cmd_ridge_sensitivity(int n, double alpha, std::uint64_t seed, const std::string& out_path) {
    try {
        const demos::RidgeInstance inst = demos::make_ridge_dataset(n, seed, alpha);
        const demos::RidgeResult res = demos::run_ridge_sensitivity(inst);
        std::string csv = "# command=ridge-sensitivity n=" + std::to_string(n) +
                          " alpha=" + fmt(alpha) + " seed=" + std::to_string(seed) +
                          " w=" + fmt(res.w) + " b=" + fmt(res.b) + "\n";
        csv += "x,y,dw_dx,dw_dy\n";
        for (int i = 0; i < n; ++i) {
            csv += fmt(inst.x[i]) + "," + fmt(inst.y[i]) + "," + fmt(res.dw_dx[i]) + "," +
                   fmt(res.dw_dy[i]) + "\n";
        }
        write_text(out_path, csv);
    } catch (const std::invalid_argument& err) {
        std::cerr << "parse error: " << err.what() << "\n";
        return kExitParse;
    } catch (const std::exception& err) {
        std::cerr << "solver failure: " << err.what() << "\n";
        return kExitSolver;
    }
    return kExitOk;
}

int cmd_hyperparam_descent(double alpha0, int max_iters, double step, double grad_tol,
                           std::uint64_t seed, const std::string& out_path) {
    try {
        const demos::HyperparamInstance inst = demos::make_hyperparam_dataset(seed);
        const auto rows =
            demos::run_hyperparam_descent(inst, alpha0, max_iters, step, grad_tol);
        std::string csv = "# command=hyperparam-descent alpha0=" + fmt(alpha0) +
                          " max_iters=" + std::to_string(max_iters) + " step=" + fmt(step) +
                          " grad_tol=" + fmt(grad_tol) + " seed=" + std::to_string(seed) + "\n";
        csv += "iter,alpha,grad,test_loss,clamped\n";
        for (const auto& row : rows) {
            csv += std::to_string(row.iter) + "," + fmt(row.alpha) + "," + fmt(row.grad) + "," +
                   fmt(row.test_loss) + "," + (row.clamped ? "1" : "0") + "\n";
        }
        write_text(out_path, csv);
    } catch (const std::invalid_argument& err) {
        std::cerr << "parse error: " << err.what() << "\n";
        return kExitParse;
    } catch (const std::exception& err) {
        std::cerr << "solver failure: " << err.what() << "\n";
        return kExitSolver;
    }
    return kExitOk;
}

json matrix_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        out.push_back(std::move(row));
    }
    return out;
}

int cmd_projection_layer(const std::string& mode, int batch, int size, std::uint64_t seed,
                         const std::string& out_path) {
    try {
        json out;
        out["settings"] = settings_block({{"command", "projection-layer"},
                                          {"mode", mode},
                                          {"batch", batch},
                                          {"size", size},
                                          {"seed", seed}});
        if (mode == "relu") {
            const demos::ReluInstance inst = demos::make_relu_instance(batch, size, seed);
            const demos::ReluResult res = demos::run_relu_layer(inst);
            out["y"] = matrix_json(inst.y);
            out["dl_dx"] = matrix_json(inst.seed);
            out["x"] = matrix_json(res.x);
            out["dl_dy"] = matrix_json(res.dl_dy);
        } else {
            demos::PolytopeResult res;
            demos::PolytopeInstance inst;
            bool solved = false;
            for (int attempt = 0; attempt < 10 && !solved; ++attempt) {
                inst = demos::make_polytope_instance(batch, size, seed + attempt);
                res = demos::run_polytope_layer(inst);
                solved = res.solved;
            }
            if (!solved) {
                std::cerr << "solver failure: no feasible polytope draw in 10 attempts\n";
                return kExitSolver;
            }
            out["y"] = matrix_json(inst.y);
            out["dl_dx"] = matrix_json(inst.seed);
            out["x"] = matrix_json(res.x);
            out["dl_dy"] = matrix_json(res.dl_dy);
            out["dl_dw"] = matrix_json(res.dl_dW);
            json db = json::array();
            for (Eigen::Index i = 0; i < res.dl_db.size(); ++i) db.push_back(res.dl_db[i]);
            out["dl_db"] = db;
        }
        write_text(out_path, out.dump(2) + "\n");
    } catch (const std::invalid_argument& err) {
        std::cerr << "parse error: " << err.what() << "\n";
        return kExitParse;
    } catch (const std::exception& err) {
        std::cerr << "solver failure: " << err.what() << "\n";
        return kExitSolver;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"differentiable convex optimization toolkit"};
    app.require_subcommand(1);

    auto* solve = app.add_subcommand("solve-diff", "solve a problem file and differentiate");
    std::string problem_path, tangent_path, out_path, mode, solver = "auto";
    double tol = 1e-9;
    solve->add_option("--problem", problem_path)->required();
    solve->add_option("--mode", mode)->required()->check(CLI::IsMember({"forward", "reverse"}));
    solve->add_option("--tangent", tangent_path)->required();
    solve->add_option("--out", out_path)->required();
    solve->add_option("--solver", solver)->check(CLI::IsMember({"auto", "ipm", "admm"}));
    solve->add_option("--tol", tol);

    auto* svm = app.add_subcommand("svm-sensitivity", "per-point SVM hyperplane sensitivity");
    int svm_n = 20, svm_d = 2;
    std::uint64_t svm_seed = 1;
    double svm_lambda = 0.1;
    std::string svm_out;
    svm->add_option("--n", svm_n)->check(CLI::Range(4, 1000000));
    svm->add_option("--d", svm_d)->check(CLI::Range(1, 1000));
    svm->add_option("--seed", svm_seed);
    svm->add_option("--lambda", svm_lambda);
    svm->add_option("--out", svm_out)->required();

    auto* ridge = app.add_subcommand("ridge-sensitivity", "ridge data sensitivities");
    int ridge_n = 20;
    double ridge_alpha = 0.1;
    std::uint64_t ridge_seed = 1;
    std::string ridge_out;
    ridge->add_option("--n", ridge_n)->check(CLI::Range(2, 1000000));
    ridge->add_option("--alpha", ridge_alpha);
    ridge->add_option("--seed", ridge_seed);
    ridge->add_option("--out", ridge_out)->required();

    auto* hyper = app.add_subcommand("hyperparam-descent",
                                     "gradient descent on the ridge regularizer");
    double alpha0 = 0.1, step = 0.25, grad_tol = 1e-3;
    int max_iters = 100;
    std::uint64_t hyper_seed = 1;
    std::string hyper_out;
    hyper->add_option("--alpha0", alpha0);
    hyper->add_option("--max-iters", max_iters);
    hyper->add_option("--step", step);
    hyper->add_option("--grad-tol", grad_tol);
    hyper->add_option("--seed", hyper_seed);
    hyper->add_option("--out", hyper_out)->required();

    auto* proj = app.add_subcommand("projection-layer", "batched projection pullbacks");
    std::string proj_mode = "relu", proj_out;
    int batch = 8, size = 4;
    std::uint64_t proj_seed = 1;
    proj->add_option("--mode", proj_mode)->check(CLI::IsMember({"relu", "polytope"}));
    proj->add_option("--batch", batch)->check(CLI::Range(1, 100000));
    proj->add_option("--size", size)->check(CLI::Range(1, 10000));
    proj->add_option("--seed", proj_seed);
    proj->add_option("--out", proj_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : kExitParse;
    }

    if (solve->parsed()) {
        return cmd_solve_diff(problem_path, mode, tangent_path, out_path, solver, tol);
    }
    if (svm->parsed()) return cmd_svm_sensitivity(svm_n, svm_d, svm_seed, svm_lambda, svm_out);
    if (ridge->parsed()) return cmd_ridge_sensitivity(ridge_n, ridge_alpha, ridge_seed, ridge_out);
    if (hyper->parsed()) {
        if (alpha0 <= 0) {
            std::cerr << "parse error: --alpha0 must be > 0\n";
            return kExitParse;
        }
        return cmd_hyperparam_descent(alpha0, max_iters, step, grad_tol, hyper_seed, hyper_out);
    }
    if (proj->parsed()) return cmd_projection_layer(proj_mode, batch, size, proj_seed, proj_out);
    return kExitParse;
}
