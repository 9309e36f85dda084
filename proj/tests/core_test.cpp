#include <doctest.h>

#include <cmath>
#include <limits>

#include "cmrp/cost_matrix.hpp"
#include "cmrp/counting.hpp"
#include "cmrp/json_io.hpp"
#include "cmrp/oracle.hpp"
#include "cmrp/plan.hpp"
#include "cmrp/rng.hpp"
#include "cmrp/scenario.hpp"

using namespace cmrp;

namespace {

Scenario triangle_scenario() {
    // depot and start at the origin, one task on the 3-4-5 triangle
    Scenario s;
    s.depot = {0.0, 0.0};
    s.starts = {{0.0, 0.0}};
    s.tasks = {{{3.0, 4.0}, 2.0}};
    s.discretization = 1;
    return s;
}

Scenario random_scenario(int n, int m, int delta, std::uint64_t seed) {
    Rng rng(seed);
    Scenario s;
    s.depot = {rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)};
    for (int k = 0; k < m; ++k) s.starts.push_back({rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)});
    for (int i = 0; i < n; ++i) {
        s.tasks.push_back({{rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)},
                           rng.uniform(1.0, 10.0)});
    }
    s.discretization = delta;
    return s;
}

}  // namespace

TEST_CASE("cost matrix on the 3-4-5 triangle") {
    const Scenario s = triangle_scenario();
    const CostMatrix m = build_cost_matrix(s);
    REQUIRE(m.size() == 3);
    const int start = s.start_vertex(0);
    const int task = s.subtask_vertex(0);
    CHECK(m(start, task) == doctest::Approx(7.0));  // 5 travel + 2 time cost
    CHECK(m(task, Scenario::kDepotVertex) == doctest::Approx(5.0));
}

TEST_CASE("cost matrix structural constraints") {
    const Scenario s = random_scenario(4, 3, 2, 99);
    const CostMatrix m = build_cost_matrix(s);
    const std::vector<SubTask> subtasks = discretize(s.tasks, s.discretization);

    for (int j = 0; j < s.subtask_count(); ++j) {
        // depot rows carry only the target's time cost
        CHECK(m(Scenario::kDepotVertex, s.subtask_vertex(j)) ==
              doctest::Approx(subtasks[j].time_cost));
    }
    for (int k = 0; k < s.agent_count(); ++k) {
        CHECK(m(Scenario::kDepotVertex, s.start_vertex(k)) == 0.0);
        for (int i = 1; i < m.size(); ++i) {
            if (i == s.start_vertex(k)) continue;
            CHECK(std::isinf(m(i, s.start_vertex(k))));
        }
    }
    // asymmetry: sub-task time costs attach to the target
    const int a = s.subtask_vertex(0), b = s.subtask_vertex(s.discretization);
    CHECK(m(a, b) != m(b, a));
}

TEST_CASE("discretize splits time costs") {
    std::vector<Task> tasks = {{{1.0, 1.0}, 10.0}};
    auto subs = discretize(tasks, 2);
    REQUIRE(subs.size() == 2);
    CHECK(subs[0].time_cost == 5.0);
    CHECK(subs[1].time_cost == 5.0);
    CHECK(subs[0].location == tasks[0].location);

    subs = discretize({{{0.0, 0.0}, 7.0}}, 1);
    REQUIRE(subs.size() == 1);
    CHECK(subs[0].time_cost == 7.0);

    const Scenario s = random_scenario(4, 3, 2, 7);
    CHECK(discretize(s.tasks, 2).size() == 8);

    CHECK_THROWS_AS(discretize(tasks, 0), std::invalid_argument);
}

TEST_CASE("sub-task fragments sum back to the task time within 1 ulp") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const double t = rng.uniform(0.0, 10.0);
        const int delta = 1 + static_cast<int>(rng.uniform_int(6));
        const auto subs = discretize({{{0.0, 0.0}, t}}, delta);
        double sum = 0.0;
        for (const auto& sub : subs) sum += sub.time_cost;
        CHECK(std::abs(sum - t) <= std::ldexp(std::abs(t), -52));
    }
}

TEST_CASE("mission times on the triangle") {
    const Scenario s = triangle_scenario();
    const MissionTimes times = mission_times(s, Plan{{{0}}});
    REQUIRE(times.per_agent.size() == 1);
    CHECK(times.per_agent[0] == doctest::Approx(12.0));  // 5 + 2 + 5
    CHECK(times.max_time == doctest::Approx(12.0));
}

TEST_CASE("empty route with start at depot costs zero") {
    Scenario s = triangle_scenario();
    s.tasks.clear();
    const MissionTimes times = mission_times(s, Plan{{{}}});
    CHECK(times.per_agent[0] == 0.0);
}

TEST_CASE("matrix-based evaluation matches raw geometry") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Scenario s = random_scenario(3, 2, 2, 1000 + trial);
        const CostMatrix matrix = build_cost_matrix(s);
        const Plan plan = random_plan(s, rng);
        const MissionTimes a = mission_times(s, plan);
        const MissionTimes b = mission_times_from_matrix(s, matrix, plan);
        for (int k = 0; k < s.agent_count(); ++k) {
            CHECK(a.per_agent[k] == doctest::Approx(b.per_agent[k]).epsilon(0).scale(1e9));
            CHECK(std::abs(a.per_agent[k] - b.per_agent[k]) < 1e-9);
        }
    }
}

TEST_CASE("max time dominates the straight-home lower bound") {
    Rng rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        const Scenario s = random_scenario(3, 3, 1, 2000 + trial);
        const Plan plan = random_plan(s, rng);
        const MissionTimes times = mission_times(s, plan);
        double bound = 0.0;
        for (int k = 0; k < s.agent_count(); ++k) {
            bound = std::max(bound, distance(s.starts[k], s.depot) / s.speed);
        }
        CHECK(times.max_time >= bound - 1e-12);
    }
}

TEST_CASE("swapping two sub-tasks in one route leaves other agents bit-identical") {
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const Scenario s = random_scenario(4, 3, 1, 3000 + trial);
        Plan plan = random_plan(s, rng);
        int agent = -1;
        for (int k = 0; k < s.agent_count(); ++k) {
            if (plan.routes[k].size() >= 2) agent = k;
        }
        if (agent < 0) continue;
        const MissionTimes before = mission_times(s, plan);
        std::swap(plan.routes[agent][0], plan.routes[agent][1]);
        const MissionTimes after = mission_times(s, plan);
        for (int k = 0; k < s.agent_count(); ++k) {
            if (k != agent) CHECK(before.per_agent[k] == after.per_agent[k]);
        }
    }
}

TEST_CASE("coordinate scaling scales travel components") {
    Rng rng(19);
    Scenario s = random_scenario(3, 2, 1, 23);
    for (Task& t : s.tasks) t.time_cost = 0.0;
    const Plan plan = random_plan(s, rng);
    const MissionTimes base = mission_times(s, plan);

    // powers of two scale bit-exactly
    Scenario doubled = s;
    doubled.depot = {s.depot.x * 2, s.depot.y * 2};
    for (auto& p : doubled.starts) p = {p.x * 2, p.y * 2};
    for (auto& t : doubled.tasks) t.location = {t.location.x * 2, t.location.y * 2};
    CHECK(mission_times(doubled, plan).max_time == 2.0 * base.max_time);

    Scenario stretched = s;
    const double c = 1.7;
    stretched.depot = {s.depot.x * c, s.depot.y * c};
    for (auto& p : stretched.starts) p = {p.x * c, p.y * c};
    for (auto& t : stretched.tasks) t.location = {t.location.x * c, t.location.y * c};
    CHECK(mission_times(stretched, plan).max_time ==
          doctest::Approx(c * base.max_time).epsilon(1e-12));
}

TEST_CASE("validate_plan reports the violations") {
    const Scenario s = random_scenario(2, 2, 1, 31);

    CHECK(validate_plan(s, Plan{{{0, 1}, {}}}).ok());
    CHECK(validate_plan(s, Plan{{{0}, {1}}}).ok());

    auto dup = validate_plan(s, Plan{{{0, 0}, {1}}});
    CHECK(dup.violation == ValidationReport::Violation::Duplicate);
    auto missing = validate_plan(s, Plan{{{0}, {}}});
    CHECK(missing.violation == ValidationReport::Violation::Missing);
    auto range = validate_plan(s, Plan{{{0, 5}, {1}}});
    CHECK(range.violation == ValidationReport::Violation::IndexOutOfRange);
    auto routes = validate_plan(s, Plan{{{0, 1}}});
    CHECK(routes.violation == ValidationReport::Violation::WrongRouteCount);

    CHECK_THROWS_AS(mission_times(s, Plan{{{0}, {}}}), std::invalid_argument);
}

TEST_CASE("count_solutions evaluates the closed form") {
    CHECK(count_solutions(1, 1) == 1);
    CHECK(count_solutions(3, 2) == 24);
    CHECK(count_solutions(8, 3) == 1814400);  // 10!/2!
    CHECK(count_solutions(0, 4) == 1);
    // single agent: n'!
    BigInt factorial = 1;
    for (int n = 1; n <= 10; ++n) {
        factorial *= n;
        CHECK(count_solutions(n, 1) == factorial);
    }
}

TEST_CASE("scenario and plan JSON round-trip") {
    Rng rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        const Scenario s = random_scenario(1 + trial % 5, 1 + trial % 3, 1 + trial % 4,
                                           4000 + trial);
        const Scenario back = scenario_from_json(scenario_to_json(s));
        CHECK(back.depot == s.depot);
        CHECK(back.starts == s.starts);
        CHECK(back.discretization == s.discretization);
        CHECK(back.speed == s.speed);
        REQUIRE(back.tasks.size() == s.tasks.size());
        for (std::size_t i = 0; i < s.tasks.size(); ++i) {
            CHECK(back.tasks[i].location == s.tasks[i].location);
            CHECK(back.tasks[i].time_cost == s.tasks[i].time_cost);
        }

        const Plan plan = random_plan(s, rng);
        CHECK(plan_from_json(plan_to_json(plan)) == plan);
    }
}
