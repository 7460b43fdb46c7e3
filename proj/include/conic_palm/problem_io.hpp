#pragma once

#include "conic_palm/model.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace conic_palm {

/// Reads a quadratic instance from its JSON document. Throws ParseError with
/// the JSON-pointer location of the first problem found.
ProblemInstance parse_problem(const nlohmann::json& document);
ProblemInstance parse_problem(const std::string& text);
ProblemInstance load_problem_file(const std::string& path);

/// Inverse of parse_problem. Requires `problem.quadratic`.
nlohmann::json serialize_problem(const ProblemInstance& problem);

nlohmann::json to_json(const ConeSpec& cone);
ConeSpec cone_from_json(const nlohmann::json& j);

}  // namespace conic_palm
