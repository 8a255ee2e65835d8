#pragma once

#include "robirl/mdp.hpp"

#include <nlohmann/json.hpp>
#include <string>

namespace robirl {

using Json = nlohmann::json;

/// {n_states, n_actions, gamma, p0, transitions[s][a][s'], reward: {features, theta} | null}
Json mdp_to_json(const TabularMdp& mdp);
/// Rejects invalid probabilities instead of renormalising them.
TabularMdp mdp_from_json(const Json& j);

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

Json policy_to_json(const StochasticPolicy& p);
StochasticPolicy policy_from_json(const Json& j);

/// Accepts a bare array or an object with a "rho" field.
OccupancyMeasure occupancy_from_json(const Json& j);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

} // namespace robirl
