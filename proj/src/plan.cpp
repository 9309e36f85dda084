#include "cmrp/plan.hpp"

#include <algorithm>
#include <stdexcept>

namespace cmrp {

ValidationReport validate_plan(const Scenario& scenario, const Plan& plan) {
    const int m = scenario.agent_count();
    const int n_prime = scenario.subtask_count();

    if (static_cast<int>(plan.routes.size()) != m) {
        return {ValidationReport::Violation::WrongRouteCount,
                "plan has " + std::to_string(plan.routes.size()) + " routes, scenario has " +
                    std::to_string(m) + " agents"};
    }
    std::vector<char> seen(n_prime, 0);
    for (const auto& route : plan.routes) {
        for (int s : route) {
            if (s < 0 || s >= n_prime) {
                return {ValidationReport::Violation::IndexOutOfRange,
                        "sub-task index " + std::to_string(s) + " outside [0, " +
                            std::to_string(n_prime) + ")"};
            }
            if (seen[s]) {
                return {ValidationReport::Violation::Duplicate,
                        "sub-task " + std::to_string(s) + " assigned more than once"};
            }
            seen[s] = 1;
        }
    }
    for (int s = 0; s < n_prime; ++s) {
        if (!seen[s]) {
            return {ValidationReport::Violation::Missing,
                    "sub-task " + std::to_string(s) + " not assigned to any route"};
        }
    }
    return {};
}

MissionTimes mission_times(const Scenario& scenario, const Plan& plan) {
    const ValidationReport report = validate_plan(scenario, plan);
    if (!report.ok()) throw std::invalid_argument("infeasible plan: " + report.message);

    const std::vector<SubTask> subtasks = discretize(scenario.tasks, scenario.discretization);
    MissionTimes times;
    times.per_agent.resize(scenario.agent_count());
    for (int k = 0; k < scenario.agent_count(); ++k) {
        Point2D at = scenario.starts[k];
        double total = 0.0;
        for (int s : plan.routes[k]) {
            total += distance(at, subtasks[s].location) / scenario.speed + subtasks[s].time_cost;
            at = subtasks[s].location;
        }
        total += distance(at, scenario.depot) / scenario.speed;
        times.per_agent[k] = total;
    }
    times.max_time = *std::max_element(times.per_agent.begin(), times.per_agent.end());
    return times;
}

MissionTimes mission_times_from_matrix(const Scenario& scenario, const CostMatrix& matrix,
                                       const Plan& plan) {
    const ValidationReport report = validate_plan(scenario, plan);
    if (!report.ok()) throw std::invalid_argument("infeasible plan: " + report.message);

    MissionTimes times;
    times.per_agent.resize(scenario.agent_count());
    for (int k = 0; k < scenario.agent_count(); ++k) {
        int at = scenario.start_vertex(k);
        double total = 0.0;
        for (int s : plan.routes[k]) {
            const int v = scenario.subtask_vertex(s);
            total += matrix(at, v);
            at = v;
        }
        total += matrix(at, Scenario::kDepotVertex);
        times.per_agent[k] = total;
    }
    times.max_time = *std::max_element(times.per_agent.begin(), times.per_agent.end());
    return times;
}

}  // namespace cmrp
