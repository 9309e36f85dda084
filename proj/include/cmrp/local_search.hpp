#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "cmrp/plan.hpp"
#include "cmrp/scenario.hpp"

namespace cmrp {

enum class Neighborhood { TwoOpt, OrOpt, Relocate, Swap };

struct SearchConfig {
    int max_iterations = 100000;  // accepted-move budget for one descent
    std::vector<Neighborhood> neighborhoods = {Neighborhood::TwoOpt, Neighborhood::OrOpt,
                                               Neighborhood::Relocate, Neighborhood::Swap};
    double time_budget_s = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0;
};

// Iterated-descent budget for the near-optimal baseline: descent to a local
// optimum, then `restarts` rounds of kick-and-descend keeping the best plan.
struct NOptConfig {
    SearchConfig search;
    int restarts = 60;
    int kick_strength = 3;  // random relocations per kick
};

// Greedy insertion: sub-tasks in index order, each placed at the (agent,
// position) minimizing the resulting max mission time; ties break to the
// lowest agent index, then the lowest position.
Plan construct(const Scenario& scenario);

// First-improvement descent over the enabled neighborhoods until no move
// improves or the budget runs out. Moves are compared on the sorted-descending
// per-agent time vector, lexicographically; comparing only the max stalls on
// plateaus where just a non-bottleneck agent can improve.
Plan improve(const Scenario& scenario, const Plan& plan, const SearchConfig& config = {});

// Default internal stand-in for the external near-optimal solver.
Plan iterated_search(const Scenario& scenario, const NOptConfig& config = {});

}  // namespace cmrp
