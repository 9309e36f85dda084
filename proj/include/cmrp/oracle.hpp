#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmrp/counting.hpp"
#include "cmrp/plan.hpp"
#include "cmrp/rng.hpp"
#include "cmrp/scenario.hpp"

namespace cmrp {

// Exact statistics over the full plan population. Route costs here are
// computed from raw geometry by code deliberately independent of
// mission_times, so the two implementations cross-check each other.
struct PopulationStats {
    double optimal_time = 0.0;
    Plan optimal_plan;
    double median_time = 0.0;   // lower-middle element for even populations
    BigInt population_size = 0;  // plans actually visited
};

class PopulationTooLarge : public std::runtime_error {
public:
    PopulationTooLarge(BigInt population, BigInt cap)
        : std::runtime_error("population " + population.str() + " exceeds enumeration cap " +
                             cap.str()),
          population(std::move(population)) {}

    BigInt population;
};

struct EnumerateOptions {
    BigInt cap = 100'000'000;
};

// Visits every distinct (ordered sub-task permutation, separator placement)
// pair exactly once. Enumeration order: permutations lexicographic, separator
// vectors lexicographic within each permutation.
PopulationStats enumerate_population(const Scenario& scenario, const EnumerateOptions& options = {});

// Visitor over the same enumeration; receives each plan and its oracle-side
// max mission time. Intended for small instances and dual-implementation
// checks.
void for_each_plan(const Scenario& scenario,
                   const std::function<void(const Plan&, double max_time)>& visit);

// Uniform draw over the plan space: a uniform permutation of the sub-tasks
// plus a uniform placement of the m-1 route separators.
Plan random_plan(const Scenario& scenario, Rng& rng);

// Median max mission time of k uniformly sampled plans; k must be odd so the
// median is itself a sample.
double sample_median(const Scenario& scenario, int k, Rng& rng);

}  // namespace cmrp
