#include "cmrp/scenario.hpp"

#include <stdexcept>

namespace cmrp {

std::vector<SubTask> discretize(const std::vector<Task>& tasks, int delta) {
    if (delta < 1) throw std::invalid_argument("discretization level must be >= 1");
    std::vector<SubTask> subtasks;
    subtasks.reserve(tasks.size() * static_cast<std::size_t>(delta));
    for (int task = 0; task < static_cast<int>(tasks.size()); ++task) {
        const double fragment = tasks[task].time_cost / static_cast<double>(delta);
        for (int d = 0; d < delta; ++d) {
            subtasks.push_back(SubTask{task, tasks[task].location, fragment});
        }
    }
    return subtasks;
}

void validate_scenario(const Scenario& scenario) {
    if (scenario.agent_count() < 1) throw std::invalid_argument("scenario needs at least one agent");
    if (scenario.discretization < 1) throw std::invalid_argument("discretization level must be >= 1");
    if (!(scenario.speed > 0.0)) throw std::invalid_argument("speed must be positive");
    if (!is_finite(scenario.depot)) throw std::invalid_argument("depot coordinates must be finite");
    for (const Point2D& start : scenario.starts) {
        if (!is_finite(start)) throw std::invalid_argument("start coordinates must be finite");
    }
    for (const Task& task : scenario.tasks) {
        if (!is_finite(task.location)) throw std::invalid_argument("task coordinates must be finite");
        if (!(task.time_cost >= 0.0)) throw std::invalid_argument("task time cost must be non-negative");
    }
}

}  // namespace cmrp
