#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cmrp/generator.hpp"
#include "cmrp/lkh.hpp"
#include "cmrp/local_search.hpp"
#include "cmrp/oracle.hpp"

using namespace cmrp;

namespace {

Scenario make_scenario(int n, int m, int delta, std::uint64_t seed) {
    GeneratorConfig config;
    config.n_tasks = IntRange::fixed(n);
    config.n_agents = IntRange::fixed(m);
    config.discretization = IntRange::fixed(delta);
    config.seed = seed;
    return generate(config, 0);
}

std::vector<double> sorted_times(const Scenario& s, const Plan& p) {
    std::vector<double> times = mission_times(s, p).per_agent;
    std::sort(times.begin(), times.end(), std::greater<>());
    return times;
}

}  // namespace

TEST_CASE("construct visits collinear sub-tasks in line order") {
    Scenario s;
    s.depot = {9.0, 0.0};
    s.starts = {{0.0, 0.0}};
    s.tasks = {{{2.0, 0.0}, 0.0}, {{4.0, 0.0}, 0.0}, {{6.0, 0.0}, 0.0}};
    const Plan plan = construct(s);
    CHECK(plan.routes[0] == std::vector<int>{0, 1, 2});
    // the enumerator agrees this is optimal
    const PopulationStats stats = enumerate_population(s);
    CHECK(mission_times(s, plan).max_time == doctest::Approx(stats.optimal_time));
}

TEST_CASE("construct with no sub-tasks returns empty routes") {
    Scenario s;
    s.depot = {1.0, 2.0};
    s.starts = {{0.0, 0.0}, {5.0, 5.0}};
    const Plan plan = construct(s);
    REQUIRE(plan.routes.size() == 2);
    CHECK(plan.routes[0].empty());
    CHECK(plan.routes[1].empty());
}

TEST_CASE("construct never beats the enumerated optimum") {
    for (int trial = 0; trial < 40; ++trial) {
        const Scenario s = make_scenario(4, 3, 1, 500 + trial);
        const Plan plan = construct(s);
        REQUIRE(validate_plan(s, plan).ok());
        const PopulationStats stats = enumerate_population(s);
        CHECK(mission_times(s, plan).max_time >= stats.optimal_time - 1e-9);
    }
}

TEST_CASE("improve returns a feasible plan no worse than its input") {
    Rng rng(3);
    for (int trial = 0; trial < 40; ++trial) {
        const Scenario s = make_scenario(3, 2, 2, 900 + trial);
        const Plan start = random_plan(s, rng);
        const Plan better = improve(s, start);
        REQUIRE(validate_plan(s, better).ok());
        CHECK(mission_times(s, better).max_time <=
              mission_times(s, start).max_time + 1e-12);
    }
}

TEST_CASE("improve leaves an already-optimal tiny plan at the same value") {
    const Scenario s = make_scenario(2, 1, 1, 41);
    const PopulationStats stats = enumerate_population(s);
    const Plan improved = improve(s, stats.optimal_plan);
    CHECK(mission_times(s, improved).max_time == doctest::Approx(stats.optimal_time));
}

TEST_CASE("improve strictly decreases the sorted time vector at each accepted move") {
    // monotonicity of the lexicographic key between input and output
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const Scenario s = make_scenario(4, 2, 1, 1200 + trial);
        const Plan start = random_plan(s, rng);
        const Plan out = improve(s, start);
        CHECK(sorted_times(s, out) <= sorted_times(s, start));
    }
}

TEST_CASE("improve from greedy reaches the optimum on most small instances") {
    int reached = 0;
    const int total = 60;
    for (int trial = 0; trial < total; ++trial) {
        const Scenario s = make_scenario(2, 2, 2, 2200 + trial);  // 4 sub-tasks, 2 agents
        const Plan plan = improve(s, construct(s));
        const PopulationStats stats = enumerate_population(s);
        if (mission_times(s, plan).max_time <= stats.optimal_time + 1e-9) ++reached;
    }
    CHECK(reached >= static_cast<int>(0.9 * total));
}

TEST_CASE("iterated search is deterministic and at least as good as one descent") {
    const Scenario s = make_scenario(5, 2, 1, 77);
    NOptConfig config;
    config.restarts = 10;
    const Plan a = iterated_search(s, config);
    const Plan b = iterated_search(s, config);
    CHECK(a == b);
    CHECK(mission_times(s, a).max_time <=
          mission_times(s, improve(s, construct(s))).max_time + 1e-12);
}

TEST_CASE("empty neighborhood set is rejected") {
    const Scenario s = make_scenario(2, 1, 1, 4);
    SearchConfig config;
    config.neighborhoods.clear();
    CHECK_THROWS_AS(improve(s, construct(s), config), std::invalid_argument);
}

TEST_CASE("solver export writes the scaled explicit matrix") {
    const Scenario s = make_scenario(2, 2, 1, 99);
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "cmrp_lkh_test";
    fs::create_directories(dir);
    const std::string problem = (dir / "p.atsp").string();
    const std::string params = (dir / "p.par").string();
    const std::string tour = (dir / "p.tour").string();
    lkh3_export(s, problem, params, tour);

    std::ifstream in(problem);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.find("TYPE : ATSP") != std::string::npos);
    CHECK(text.find("DIMENSION : 5") != std::string::npos);
    CHECK(text.find("FULL_MATRIX") != std::string::npos);
    // forbidden entries appear as the excluded-edge sentinel
    CHECK(text.find(std::to_string(kLkhExcludedEdge)) != std::string::npos);

    std::ifstream pin(params);
    std::string ptext((std::istreambuf_iterator<char>(pin)), std::istreambuf_iterator<char>());
    CHECK(ptext.find("SALESMEN = 2") != std::string::npos);
    CHECK(ptext.find("MTSP_OBJECTIVE = MINMAX") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("tour files round-trip through our writer and parser") {
    Rng rng(12);
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "cmrp_tour_test";
    fs::create_directories(dir);
    for (int trial = 0; trial < 10; ++trial) {
        const Scenario s = make_scenario(3, 2, 2, 3100 + trial);
        const Plan plan = random_plan(s, rng);
        const std::string path = (dir / ("t" + std::to_string(trial) + ".tour")).string();
        write_tour_file(s, plan, path);
        CHECK(parse_tour_file(s, path) == plan);
    }
    fs::remove_all(dir);
}

TEST_CASE("parser rejects routes that enter a start vertex") {
    const Scenario s = make_scenario(2, 2, 1, 7);
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "cmrp_tour_bad";
    fs::create_directories(dir);
    const std::string path = (dir / "bad.tour").string();
    {
        std::ofstream out(path);
        // vertex 3 is start_1; entering it mid-route crosses a forbidden edge
        out << "Dimension : 5\n1 2 4 3 (#3) Cost: 1\n1 5 (#1) Cost: 1\n";
    }
    CHECK_THROWS(parse_tour_file(s, path));
    fs::remove_all(dir);
}

TEST_CASE("missing external binary reports unavailability") {
    const Scenario s = make_scenario(2, 1, 1, 1);
    LkhConfig config;
    config.binary = "";
    if (std::getenv("CMRP_LKH3_BIN") == nullptr) {
        try {
            lkh3_solve(s, config);
            FAIL("expected the adapter to refuse");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find("external solver unavailable") != std::string::npos);
        }
    }
}

TEST_CASE("external solver matches the enumerated optimum when installed") {
    if (std::getenv("CMRP_LKH3_BIN") == nullptr) return;  // adapter exercised elsewhere
    const Scenario s = make_scenario(3, 2, 1, 17);
    const Plan plan = lkh3_solve(s);
    REQUIRE(validate_plan(s, plan).ok());
    const PopulationStats stats = enumerate_population(s);
    CHECK(mission_times(s, plan).max_time <= stats.optimal_time + 1e-2);
}
