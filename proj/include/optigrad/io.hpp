#pragma once

#include <json.hpp>
#include <string>

#include "optigrad/model.hpp"

namespace optigrad {

/// Forward-mode tangent input: perturbation functions keyed like the model.
struct ForwardTangentSpec {
    ScalarQuadraticFunction objective;
    std::map<std::string, VectorAffineFunction> constraints;
};

/// Reverse-mode input: per-variable loss sensitivities.
struct ReverseSeedSpec {
    std::map<VariableId, double> seeds;
};

struct TangentSpec {
    ForwardTangentSpec forward;
    ReverseSeedSpec reverse;
};

struct NamedProblem {
    ProblemModel model;
    std::vector<std::string> variable_names;
};

NamedProblem problem_from_json(const nlohmann::json& doc);
nlohmann::json problem_to_json(const NamedProblem& problem);

TangentSpec tangent_from_json(const nlohmann::json& doc, const NamedProblem& problem);
nlohmann::json forward_tangent_to_json(const ForwardTangentSpec& spec);
nlohmann::json reverse_seeds_to_json(const ReverseSeedSpec& spec);

NamedProblem load_problem_file(const std::string& path);
TangentSpec load_tangent_file(const std::string& path, const NamedProblem& problem);

}  // namespace optigrad
