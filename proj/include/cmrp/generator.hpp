#pragma once

#include <cstdint>
#include <vector>

#include "cmrp/rng.hpp"
#include "cmrp/scenario.hpp"

namespace cmrp {

struct IntRange {
    int lo = 1;
    int hi = 1;

    static IntRange fixed(int v) { return {v, v}; }
    bool is_fixed() const { return lo == hi; }
    int span() const { return hi - lo + 1; }
};

struct GeneratorConfig {
    double domain_size = 10.0;  // meters; locations uniform over [0, domain_size]^2
    double time_cost_min = 1.0;
    double time_cost_max = 10.0;
    IntRange n_tasks = IntRange::fixed(4);
    IntRange n_agents = IntRange::fixed(3);
    IntRange discretization = IntRange::fixed(1);
    double speed = 1.0;
    std::uint64_t seed = 0;
    // Problem-ladder variants place every agent at the depot instead of a
    // random location.
    bool starts_at_depot = false;

    // Padding budget implied by the ranges: n_max * delta_max + m_max + 1.
    int v_max() const { return n_tasks.hi * discretization.hi + n_agents.hi + 1; }
};

// Fixed-vertex-budget view of a scenario for batched neural processing. Real
// vertices come first; pad_mask is true exactly on them. Padded vertices carry
// zero features; correctness relies on masks alone, never on their contents.
struct PaddedScenario {
    Scenario scenario;
    int v_max = 0;
    std::vector<bool> pad_mask;  // length v_max, true = real vertex

    int real_vertex_count() const { return scenario.vertex_count(); }
};

// Deterministic instance stream: (config, index) fully determines the output.
// Sizes given as ranges are sampled uniformly and independently per instance.
Scenario generate(const GeneratorConfig& config, std::uint64_t index);

std::vector<Scenario> generate_batch(const GeneratorConfig& config, int count,
                                     std::uint64_t first_index = 0);

// Pads to v_max vertices; throws if the scenario does not fit.
PaddedScenario pad(const Scenario& scenario, int v_max);

// Mixed-size batch, every instance padded to config.v_max().
std::vector<PaddedScenario> generate_mixed(const GeneratorConfig& config, int count,
                                           std::uint64_t first_index = 0);

}  // namespace cmrp
