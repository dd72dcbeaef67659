#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "optigrad/api.hpp"
#include "optigrad/cones.hpp"

namespace py = pybind11;
using namespace optigrad;

namespace {

ScalarAffineFunction make_affine(const std::vector<std::pair<int, double>>& terms,
                                 double constant) {
    ScalarAffineFunction f;
    for (const auto& [var, coeff] : terms) f.terms.push_back({var, coeff});
    f.constant = constant;
    return f;
}

ScalarQuadraticFunction make_quadratic(
    const std::vector<std::tuple<int, int, double>>& quadratic_terms,
    const std::vector<std::pair<int, double>>& affine_terms, double constant) {
    ScalarQuadraticFunction f;
    for (const auto& [i, j, v] : quadratic_terms) f.quadratic_terms.push_back({i, j, v});
    f.affine = make_affine(affine_terms, constant);
    return f;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "differentiable convex optimization engine";

    py::enum_<ProblemClass>(m, "ProblemClass")
        .value("QP", ProblemClass::QP)
        .value("CONIC", ProblemClass::Conic);

    py::class_<ConeSet>(m, "ConeSet")
        .def_static("zero", &ConeSet::zero, py::arg("dim"))
        .def_static("nonnegative", &ConeSet::nonnegative, py::arg("dim"))
        .def_static("nonpositive", &ConeSet::nonpositive, py::arg("dim"))
        .def_static("second_order", &ConeSet::second_order, py::arg("dim"))
        .def_static("psd_triangle", &ConeSet::psd_triangle, py::arg("side"))
        .def_static("equal_to", &ConeSet::equal_to, py::arg("value"))
        .def_static("less_than", &ConeSet::less_than, py::arg("value"))
        .def_static("greater_than", &ConeSet::greater_than, py::arg("value"))
        .def_readonly("dim", &ConeSet::dim)
        .def_readonly("value", &ConeSet::value)
        .def("__repr__", [](const ConeSet& s) {
            return "ConeSet(" + cone_tag_name(s.tag) + ")";
        });

    py::class_<ScalarAffineFunction>(m, "AffineFunction")
        .def(py::init(&make_affine), py::arg("terms") = std::vector<std::pair<int, double>>{},
             py::arg("constant") = 0.0)
        .def("coefficient", &ScalarAffineFunction::coefficient, py::arg("var"))
        .def_readwrite("constant", &ScalarAffineFunction::constant)
        .def_property_readonly("terms", [](const ScalarAffineFunction& f) {
            std::vector<std::pair<int, double>> out;
            for (const auto& t : f.terms) out.emplace_back(t.var, t.coeff);
            return out;
        });

    py::class_<ScalarQuadraticFunction>(m, "QuadraticFunction")
        .def(py::init(&make_quadratic),
             py::arg("quadratic_terms") = std::vector<std::tuple<int, int, double>>{},
             py::arg("terms") = std::vector<std::pair<int, double>>{},
             py::arg("constant") = 0.0)
        .def_property_readonly("quadratic_terms",
                               [](const ScalarQuadraticFunction& f) {
                                   std::vector<std::tuple<int, int, double>> out;
                                   for (const auto& t : f.quadratic_terms) {
                                       out.emplace_back(t.var1, t.var2, t.coeff);
                                   }
                                   return out;
                               })
        .def_property_readonly("affine",
                               [](const ScalarQuadraticFunction& f) { return f.affine; });

    py::class_<VectorAffineFunction>(m, "VectorAffineFunction")
        .def(py::init([](const std::vector<ScalarAffineFunction>& rows) {
                 VectorAffineFunction f;
                 f.rows = rows;
                 return f;
             }),
             py::arg("rows"))
        .def_property_readonly("rows",
                               [](const VectorAffineFunction& f) { return f.rows; })
        .def_property_readonly("dim", &VectorAffineFunction::dim);

    py::class_<Constraint>(m, "Constraint")
        .def(py::init([](const std::string& id, const ScalarAffineFunction& f,
                         const ConeSet& set) {
                 Constraint c;
                 c.id = id;
                 c.function.rows.push_back(f);
                 c.set = set;
                 return c;
             }),
             py::arg("id"), py::arg("function"), py::arg("set"))
        .def(py::init([](const std::string& id, const VectorAffineFunction& f,
                         const ConeSet& set) {
                 Constraint c;
                 c.id = id;
                 c.function = f;
                 c.set = set;
                 return c;
             }),
             py::arg("id"), py::arg("function"), py::arg("set"))
        .def_readonly("id", &Constraint::id);

    py::class_<ProblemModel>(m, "ProblemModel")
        .def_readonly("n_vars", &ProblemModel::n_vars);

    m.def("build_problem", &build_problem, py::arg("n_vars"), py::arg("objective"),
          py::arg("constraints"));

    py::class_<SolverSettings>(m, "SolverSettings")
        .def(py::init<>())
        .def_readwrite("tol", &SolverSettings::tol)
        .def_readwrite("max_iter", &SolverSettings::max_iter);

    py::class_<SolveStatus>(m, "SolveStatus")
        .def_property_readonly("tag", [](const SolveStatus& s) { return solve_tag_name(s.tag); })
        .def_readonly("iterations", &SolveStatus::iterations)
        .def_readonly("primal_residual", &SolveStatus::primal_residual)
        .def_readonly("dual_residual", &SolveStatus::dual_residual)
        .def("optimal", &SolveStatus::optimal);

    py::class_<DiffEngine>(m, "DiffEngine")
        .def(py::init<ProblemModel, SolverSettings>(), py::arg("model"),
             py::arg("settings") = SolverSettings{})
        .def("force_class", &DiffEngine::force_class, py::arg("problem_class"))
        .def("optimize", &DiffEngine::optimize)
        .def("solved", &DiffEngine::solved)
        .def("problem_class", &DiffEngine::problem_class)
        .def("variable_value", &DiffEngine::variable_value, py::arg("var"))
        .def("primal", &DiffEngine::primal)
        .def("constraint_dual", &DiffEngine::constraint_dual, py::arg("id"))
        .def("set_forward_objective", &DiffEngine::set_forward_objective, py::arg("tangent"))
        .def("set_forward_constraint",
             py::overload_cast<const std::string&, const ScalarAffineFunction&>(
                 &DiffEngine::set_forward_constraint),
             py::arg("id"), py::arg("tangent"))
        .def("set_forward_constraint",
             py::overload_cast<const std::string&, const VectorAffineFunction&>(
                 &DiffEngine::set_forward_constraint),
             py::arg("id"), py::arg("tangent"))
        .def("set_reverse_variable", &DiffEngine::set_reverse_variable, py::arg("var"),
             py::arg("seed"))
        .def("forward_differentiate", &DiffEngine::forward_differentiate)
        .def("reverse_differentiate", &DiffEngine::reverse_differentiate)
        .def("get_forward_variable", &DiffEngine::get_forward_variable, py::arg("var"))
        .def("get_reverse_objective", &DiffEngine::get_reverse_objective,
             py::return_value_policy::copy)
        .def("get_reverse_constraint", &DiffEngine::get_reverse_constraint, py::arg("id"),
             py::return_value_policy::copy)
        .def("approximate", &DiffEngine::approximate)
        .def("reset_tangents", &DiffEngine::reset_tangents);

    m.def("project", &project, py::arg("set"), py::arg("v"));
    m.def("project_jacobian",
          [](const ConeSet& set, const Eigen::VectorXd& v) { return project_jacobian(set, v); },
          py::arg("set"), py::arg("v"));
}
