#pragma once

#include <vector>

#include "cmrp/geometry.hpp"

namespace cmrp {

struct Task {
    Point2D location;
    double time_cost = 0.0;  // seconds, >= 0
};

// One of the delta equal fragments of a task; collocated with its parent.
struct SubTask {
    int parent_task = 0;
    Point2D location;
    double time_cost = 0.0;
};

// A problem instance. Vertex indexing used throughout the toolkit:
//   0                  depot
//   1 .. m             agent start locations
//   m+1 .. m+n*delta   sub-tasks, task-major (all fragments of task 0 first)
struct Scenario {
    Point2D depot;
    std::vector<Point2D> starts;
    std::vector<Task> tasks;
    int discretization = 1;
    double speed = 1.0;  // meters/second

    int agent_count() const { return static_cast<int>(starts.size()); }
    int task_count() const { return static_cast<int>(tasks.size()); }
    int subtask_count() const { return task_count() * discretization; }
    int vertex_count() const { return subtask_count() + agent_count() + 1; }

    static constexpr int kDepotVertex = 0;
    int start_vertex(int agent) const { return 1 + agent; }
    int subtask_vertex(int subtask) const { return 1 + agent_count() + subtask; }
};

// Splits each task into delta collocated sub-tasks carrying time_cost/delta.
// Rejects delta < 1.
std::vector<SubTask> discretize(const std::vector<Task>& tasks, int delta);

// Throws std::invalid_argument describing the first violated invariant.
void validate_scenario(const Scenario& scenario);

}  // namespace cmrp
