#include "cmrp/generator.hpp"

#include <stdexcept>

namespace cmrp {

namespace {

int sample_range(const IntRange& range, Rng& rng) {
    if (range.lo > range.hi) throw std::invalid_argument("empty integer range");
    if (range.is_fixed()) return range.lo;
    return range.lo + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(range.span())));
}

Point2D sample_point(double domain_size, Rng& rng) {
    return {rng.uniform(0.0, domain_size), rng.uniform(0.0, domain_size)};
}

}  // namespace

Scenario generate(const GeneratorConfig& config, std::uint64_t index) {
    if (config.time_cost_min < 0.0 || config.time_cost_max < config.time_cost_min) {
        throw std::invalid_argument("invalid time cost range");
    }
    Rng rng = Rng::for_index(config.seed, index);

    Scenario scenario;
    const int n = sample_range(config.n_tasks, rng);
    const int m = sample_range(config.n_agents, rng);
    scenario.discretization = sample_range(config.discretization, rng);
    scenario.speed = config.speed;
    scenario.depot = sample_point(config.domain_size, rng);
    scenario.starts.reserve(m);
    for (int k = 0; k < m; ++k) {
        scenario.starts.push_back(config.starts_at_depot ? scenario.depot
                                                         : sample_point(config.domain_size, rng));
    }
    scenario.tasks.reserve(n);
    for (int i = 0; i < n; ++i) {
        const Point2D location = sample_point(config.domain_size, rng);
        const double time_cost = rng.uniform(config.time_cost_min, config.time_cost_max);
        scenario.tasks.push_back({location, time_cost});
    }
    return scenario;
}

std::vector<Scenario> generate_batch(const GeneratorConfig& config, int count,
                                     std::uint64_t first_index) {
    std::vector<Scenario> scenarios;
    scenarios.reserve(count);
    for (int i = 0; i < count; ++i) scenarios.push_back(generate(config, first_index + i));
    return scenarios;
}

PaddedScenario pad(const Scenario& scenario, int v_max) {
    const int real = scenario.vertex_count();
    if (real > v_max) {
        throw std::invalid_argument("v_max " + std::to_string(v_max) + " below real vertex count " +
                                    std::to_string(real));
    }
    PaddedScenario padded;
    padded.scenario = scenario;
    padded.v_max = v_max;
    padded.pad_mask.assign(v_max, false);
    for (int v = 0; v < real; ++v) padded.pad_mask[v] = true;
    return padded;
}

std::vector<PaddedScenario> generate_mixed(const GeneratorConfig& config, int count,
                                           std::uint64_t first_index) {
    const int v_max = config.v_max();
    std::vector<PaddedScenario> batch;
    batch.reserve(count);
    for (int i = 0; i < count; ++i) {
        batch.push_back(pad(generate(config, first_index + i), v_max));
    }
    return batch;
}

}  // namespace cmrp
