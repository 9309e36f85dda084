#include "cmrp/json_io.hpp"

#include <fstream>
#include <stdexcept>

namespace cmrp {

namespace {

nlohmann::json point_to_json(const Point2D& p) { return {{"x", p.x}, {"y", p.y}}; }

Point2D point_from_json(const nlohmann::json& j) {
    return {j.at("x").get<double>(), j.at("y").get<double>()};
}

}  // namespace

nlohmann::json scenario_to_json(const Scenario& scenario) {
    nlohmann::json tasks = nlohmann::json::array();
    for (const Task& task : scenario.tasks) {
        tasks.push_back({{"location", point_to_json(task.location)}, {"time_cost", task.time_cost}});
    }
    nlohmann::json starts = nlohmann::json::array();
    for (const Point2D& start : scenario.starts) starts.push_back(point_to_json(start));
    return {{"depot", point_to_json(scenario.depot)},
            {"starts", std::move(starts)},
            {"tasks", std::move(tasks)},
            {"discretization", scenario.discretization},
            {"speed", scenario.speed}};
}

Scenario scenario_from_json(const nlohmann::json& j) {
    Scenario scenario;
    scenario.depot = point_from_json(j.at("depot"));
    for (const auto& start : j.at("starts")) scenario.starts.push_back(point_from_json(start));
    for (const auto& task : j.at("tasks")) {
        scenario.tasks.push_back(
            {point_from_json(task.at("location")), task.at("time_cost").get<double>()});
    }
    scenario.discretization = j.at("discretization").get<int>();
    scenario.speed = j.value("speed", 1.0);
    validate_scenario(scenario);
    return scenario;
}

nlohmann::json plan_to_json(const Plan& plan) { return {{"routes", plan.routes}}; }

Plan plan_from_json(const nlohmann::json& j) {
    Plan plan;
    plan.routes = j.at("routes").get<std::vector<std::vector<int>>>();
    return plan;
}

void write_jsonl(const std::string& path, const std::vector<nlohmann::json>& lines) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (const auto& line : lines) out << line.dump() << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::vector<nlohmann::json> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        lines.push_back(nlohmann::json::parse(line));
    }
    return lines;
}

std::vector<Scenario> read_scenarios(const std::string& path) {
    std::vector<Scenario> scenarios;
    for (const auto& j : read_jsonl(path)) scenarios.push_back(scenario_from_json(j));
    return scenarios;
}

void write_scenarios(const std::string& path, const std::vector<Scenario>& scenarios) {
    std::vector<nlohmann::json> lines;
    lines.reserve(scenarios.size());
    for (const Scenario& s : scenarios) lines.push_back(scenario_to_json(s));
    write_jsonl(path, lines);
}

std::vector<Plan> read_plans(const std::string& path) {
    std::vector<Plan> plans;
    for (const auto& j : read_jsonl(path)) plans.push_back(plan_from_json(j));
    return plans;
}

void write_plans(const std::string& path, const std::vector<Plan>& plans) {
    std::vector<nlohmann::json> lines;
    lines.reserve(plans.size());
    for (const Plan& p : plans) lines.push_back(plan_to_json(p));
    write_jsonl(path, lines);
}

IntRange int_range_from_json(const nlohmann::json& j) {
    if (j.is_number_integer()) return IntRange::fixed(j.get<int>());
    if (j.is_array() && j.size() == 2) return {j[0].get<int>(), j[1].get<int>()};
    throw std::invalid_argument("size field must be an integer or a [lo, hi] pair");
}

GeneratorConfig generator_config_from_json(const nlohmann::json& j) {
    GeneratorConfig config;
    config.domain_size = j.value("domain_size", config.domain_size);
    config.time_cost_min = j.value("time_cost_min", config.time_cost_min);
    config.time_cost_max = j.value("time_cost_max", config.time_cost_max);
    if (j.contains("n_tasks")) config.n_tasks = int_range_from_json(j.at("n_tasks"));
    if (j.contains("n_agents")) config.n_agents = int_range_from_json(j.at("n_agents"));
    if (j.contains("discretization")) {
        config.discretization = int_range_from_json(j.at("discretization"));
    }
    config.speed = j.value("speed", config.speed);
    config.seed = j.value("seed", config.seed);
    config.starts_at_depot = j.value("starts_at_depot", config.starts_at_depot);
    return config;
}

nlohmann::json generator_config_to_json(const GeneratorConfig& config) {
    auto range = [](const IntRange& r) -> nlohmann::json {
        if (r.is_fixed()) return r.lo;
        return nlohmann::json::array({r.lo, r.hi});
    };
    return {{"domain_size", config.domain_size},
            {"time_cost_min", config.time_cost_min},
            {"time_cost_max", config.time_cost_max},
            {"n_tasks", range(config.n_tasks)},
            {"n_agents", range(config.n_agents)},
            {"discretization", range(config.discretization)},
            {"speed", config.speed},
            {"seed", config.seed},
            {"starts_at_depot", config.starts_at_depot}};
}

}  // namespace cmrp
