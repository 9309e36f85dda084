#include <doctest.h>

#include <set>

#include "cmrp/generator.hpp"
#include "cmrp/json_io.hpp"

using namespace cmrp;

TEST_CASE("fixed seed reproduces identical scenarios") {
    GeneratorConfig config;
    config.n_tasks = IntRange::fixed(4);
    config.n_agents = IntRange::fixed(3);
    config.discretization = IntRange::fixed(2);
    config.seed = 42;
    for (int i = 0; i < 20; ++i) {
        const Scenario a = generate(config, i);
        const Scenario b = generate(config, i);
        CHECK(scenario_to_json(a).dump() == scenario_to_json(b).dump());
    }
    // different indices differ
    CHECK(scenario_to_json(generate(config, 0)).dump() !=
          scenario_to_json(generate(config, 1)).dump());
}

TEST_CASE("generated values match the configured distributions") {
    GeneratorConfig config;
    config.n_tasks = IntRange::fixed(1);
    config.n_agents = IntRange::fixed(1);
    config.seed = 7;
    double sum = 0.0;
    const int samples = 10000;
    for (int i = 0; i < samples; ++i) {
        const Scenario s = generate(config, i);
        REQUIRE(s.tasks.size() == 1);
        CHECK(s.tasks[0].time_cost >= 1.0);
        CHECK(s.tasks[0].time_cost <= 10.0);
        CHECK(s.tasks[0].location.x >= 0.0);
        CHECK(s.tasks[0].location.x <= 10.0);
        sum += s.tasks[0].time_cost;
    }
    const double mean = sum / samples;
    CHECK(mean > 5.0);  // uniform [1, 10] has mean 5.5
    CHECK(mean < 6.0);
}

TEST_CASE("discretized vertex count for the 3-agent 4-task setup") {
    GeneratorConfig config;
    config.n_tasks = IntRange::fixed(4);
    config.n_agents = IntRange::fixed(3);
    config.discretization = IntRange::fixed(2);
    const Scenario s = generate(config, 0);
    CHECK(s.subtask_count() == 8);
    CHECK(s.vertex_count() == 12);
}

TEST_CASE("mixed generation pads to the range budget") {
    GeneratorConfig config;
    config.n_tasks = {1, 6};
    config.n_agents = {1, 6};
    config.discretization = {1, 4};
    config.seed = 3;
    CHECK(config.v_max() == 31);

    const auto batch = generate_mixed(config, 200, 0);
    for (const PaddedScenario& padded : batch) {
        CHECK(padded.v_max == 31);
        CHECK(padded.scenario.vertex_count() <= 31);
        for (int v = 0; v < padded.v_max; ++v) {
            CHECK(padded.pad_mask[v] == (v < padded.scenario.vertex_count()));
        }
    }
}

TEST_CASE("every size combination appears in a mixed batch") {
    // frozen-seed coupon-collector check: 6*6*4 = 144 combinations
    GeneratorConfig config;
    config.n_tasks = {1, 6};
    config.n_agents = {1, 6};
    config.discretization = {1, 4};
    config.seed = 2024;
    std::set<std::tuple<int, int, int>> seen;
    for (const PaddedScenario& padded : generate_mixed(config, 1000, 0)) {
        seen.insert({padded.scenario.task_count(), padded.scenario.agent_count(),
                     padded.scenario.discretization});
    }
    CHECK(seen.size() == 144);
}

TEST_CASE("padding marks exactly the real vertices") {
    GeneratorConfig config;
    config.n_tasks = IntRange::fixed(4);
    config.n_agents = IntRange::fixed(3);
    config.discretization = IntRange::fixed(2);
    const Scenario s = generate(config, 0);

    const PaddedScenario exact = pad(s, s.vertex_count());
    CHECK(std::count(exact.pad_mask.begin(), exact.pad_mask.end(), false) == 0);

    const PaddedScenario padded = pad(s, s.vertex_count() + 3);
    CHECK(std::count(padded.pad_mask.begin(), padded.pad_mask.end(), false) == 3);

    CHECK_THROWS_AS(pad(s, s.vertex_count() - 1), std::invalid_argument);
}

TEST_CASE("problem ladder presets shape the generator") {
    GeneratorConfig config;
    config.n_tasks = IntRange::fixed(3);
    config.n_agents = IntRange::fixed(2);
    config.discretization = IntRange::fixed(2);
    config.starts_at_depot = true;
    const Scenario s = generate(config, 5);
    for (const Point2D& start : s.starts) CHECK(start == s.depot);
}
