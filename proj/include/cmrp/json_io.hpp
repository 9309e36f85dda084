#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cmrp/generator.hpp"
#include "cmrp/plan.hpp"
#include "cmrp/scenario.hpp"

namespace cmrp {

// Scenario schema (cost matrices are derived, never stored):
//   {"depot": {"x": .., "y": ..},
//    "starts": [{"x": .., "y": ..}, ...],
//    "tasks": [{"location": {"x": .., "y": ..}, "time_cost": ..}, ...],
//    "discretization": <int>, "speed": <double>}
nlohmann::json scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& j);

// Plan schema: {"routes": [[subtask indices], ...]}
nlohmann::json plan_to_json(const Plan& plan);
Plan plan_from_json(const nlohmann::json& j);

// JSON-lines files, one object per line.
void write_jsonl(const std::string& path, const std::vector<nlohmann::json>& lines);
std::vector<nlohmann::json> read_jsonl(const std::string& path);

std::vector<Scenario> read_scenarios(const std::string& path);
void write_scenarios(const std::string& path, const std::vector<Scenario>& scenarios);
std::vector<Plan> read_plans(const std::string& path);
void write_plans(const std::string& path, const std::vector<Plan>& plans);

// Size fields accept either a single integer or a [lo, hi] range.
IntRange int_range_from_json(const nlohmann::json& j);
GeneratorConfig generator_config_from_json(const nlohmann::json& j);
nlohmann::json generator_config_to_json(const GeneratorConfig& config);

}  // namespace cmrp
