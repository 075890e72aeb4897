#pragma once

#include <json.hpp>

#include "fdrsafe/grid.hpp"
#include "fdrsafe/scenarios.hpp"

namespace fdrsafe {

// Strict parsers: unknown keys or out-of-range values throw
// std::invalid_argument with the offending key in the message.
GridConfig grid_config_from_json(const nlohmann::json& j);
nlohmann::json grid_config_to_json(const GridConfig& cfg);

ScenarioSpec scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioSpec& spec);

// Parameter table of one model, for listings and result files.
nlohmann::json model_params_to_json(const ModelSpec& spec);

}  // namespace fdrsafe
