#include "cmrp/cost_matrix.hpp"

namespace cmrp {

CostMatrix build_cost_matrix(const Scenario& scenario) {
    const int m = scenario.agent_count();
    const int size = scenario.vertex_count();
    const std::vector<SubTask> subtasks = discretize(scenario.tasks, scenario.discretization);

    std::vector<Point2D> location(size);
    std::vector<double> time_cost(size, 0.0);
    std::vector<VertexRole> roles(size);
    std::vector<int> role_arg(size, -1);

    location[Scenario::kDepotVertex] = scenario.depot;
    roles[Scenario::kDepotVertex] = VertexRole::Depot;
    for (int k = 0; k < m; ++k) {
        location[scenario.start_vertex(k)] = scenario.starts[k];
        roles[scenario.start_vertex(k)] = VertexRole::Start;
        role_arg[scenario.start_vertex(k)] = k;
    }
    for (int s = 0; s < static_cast<int>(subtasks.size()); ++s) {
        const int v = scenario.subtask_vertex(s);
        location[v] = subtasks[s].location;
        time_cost[v] = subtasks[s].time_cost;
        roles[v] = VertexRole::SubTask;
        role_arg[v] = s;
    }

    std::vector<double> entries(static_cast<std::size_t>(size) * size, 0.0);
    for (int i = 0; i < size; ++i) {
        for (int j = 0; j < size; ++j) {
            double cost;
            if (i != Scenario::kDepotVertex && roles[j] == VertexRole::Start) {
                cost = CostMatrix::kForbidden;
            } else if (i == Scenario::kDepotVertex) {
                cost = time_cost[j];  // travel out of the depot is free
            } else {
                cost = distance(location[i], location[j]) / scenario.speed + time_cost[j];
            }
            entries[static_cast<std::size_t>(i) * size + j] = cost;
        }
    }
    return CostMatrix(size, std::move(entries), std::move(roles), std::move(role_arg));
}

}  // namespace cmrp
