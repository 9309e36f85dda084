#include "cmrp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cmrp {

namespace {

// Geometry tables for the oracle's own route costing. Built straight from the
// scenario; shares no evaluation code with cmrp mission_times.
struct OracleGeometry {
    int n_prime = 0;
    int m = 0;
    std::vector<double> sub_x, sub_y, sub_t;
    std::vector<double> start_leg;        // [k * n_prime + s] start_k -> sub s, seconds
    std::vector<double> return_leg;       // sub s -> depot, seconds
    std::vector<double> start_home;       // start_k -> depot, seconds
    std::vector<double> hop;              // [a * n_prime + b] sub a -> sub b travel, seconds

    explicit OracleGeometry(const Scenario& scenario) {
        const int n = scenario.task_count();
        const int delta = scenario.discretization;
        m = scenario.agent_count();
        n_prime = n * delta;
        const double inv_speed = 1.0 / scenario.speed;

        sub_x.resize(n_prime);
        sub_y.resize(n_prime);
        sub_t.resize(n_prime);
        for (int i = 0; i < n; ++i) {
            for (int d = 0; d < delta; ++d) {
                const int s = i * delta + d;
                sub_x[s] = scenario.tasks[i].location.x;
                sub_y[s] = scenario.tasks[i].location.y;
                sub_t[s] = scenario.tasks[i].time_cost / static_cast<double>(delta);
            }
        }
        start_leg.resize(static_cast<std::size_t>(m) * n_prime);
        start_home.resize(m);
        for (int k = 0; k < m; ++k) {
            const Point2D& st = scenario.starts[k];
            start_home[k] = std::hypot(st.x - scenario.depot.x, st.y - scenario.depot.y) * inv_speed;
            for (int s = 0; s < n_prime; ++s) {
                start_leg[static_cast<std::size_t>(k) * n_prime + s] =
                    std::hypot(st.x - sub_x[s], st.y - sub_y[s]) * inv_speed;
            }
        }
        return_leg.resize(n_prime);
        for (int s = 0; s < n_prime; ++s) {
            return_leg[s] =
                std::hypot(sub_x[s] - scenario.depot.x, sub_y[s] - scenario.depot.y) * inv_speed;
        }
        hop.resize(static_cast<std::size_t>(n_prime) * n_prime);
        for (int a = 0; a < n_prime; ++a) {
            for (int b = 0; b < n_prime; ++b) {
                hop[static_cast<std::size_t>(a) * n_prime + b] =
                    std::hypot(sub_x[a] - sub_x[b], sub_y[a] - sub_y[b]) * inv_speed;
            }
        }
    }

    // Max mission time of an explicit plan (used for sampled plans).
    double plan_max_time(const Plan& plan) const {
        double worst = 0.0;
        for (int k = 0; k < m; ++k) {
            double total;
            const auto& route = plan.routes[k];
            if (route.empty()) {
                total = start_home[k];
            } else {
                total = start_leg[static_cast<std::size_t>(k) * n_prime + route.front()] +
                        sub_t[route.front()];
                for (std::size_t p = 1; p < route.size(); ++p) {
                    total += hop[static_cast<std::size_t>(route[p - 1]) * n_prime + route[p]] +
                             sub_t[route[p]];
                }
                total += return_leg[route.back()];
            }
            worst = std::max(worst, total);
        }
        return worst;
    }
};

// Shared enumeration core: permutations in lexicographic order, separator cut
// vectors in lexicographic order within each permutation. cuts[k] is the end
// position of agent k's segment; agent k owns perm[cuts[k-1] .. cuts[k]).
template <typename Visit>
void enumerate_core(const OracleGeometry& geo, Visit&& visit) {
    const int n_prime = geo.n_prime;
    const int m = geo.m;

    std::vector<int> perm(n_prime);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<double> prefix(std::max(n_prime, 1), 0.0);
    std::vector<int> cuts(m - 1, 0);

    do {
        for (int p = 1; p < n_prime; ++p) {
            prefix[p] = prefix[p - 1] +
                        geo.hop[static_cast<std::size_t>(perm[p - 1]) * n_prime + perm[p]] +
                        geo.sub_t[perm[p]];
        }
        std::fill(cuts.begin(), cuts.end(), 0);
        for (;;) {
            double worst = 0.0;
            int begin = 0;
            for (int k = 0; k < m; ++k) {
                const int end = (k == m - 1) ? n_prime : cuts[k];
                double total;
                if (begin == end) {
                    total = geo.start_home[k];
                } else {
                    const int first = perm[begin];
                    const int last = perm[end - 1];
                    total = geo.start_leg[static_cast<std::size_t>(k) * n_prime + first] +
                            geo.sub_t[first] + (prefix[end - 1] - prefix[begin]) +
                            geo.return_leg[last];
                }
                worst = std::max(worst, total);
                begin = end;
            }
            visit(perm, cuts, worst);

            int i = m - 2;
            while (i >= 0 && cuts[i] == n_prime) --i;
            if (i < 0) break;
            ++cuts[i];
            for (int j = i + 1; j < m - 1; ++j) cuts[j] = cuts[i];
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
}

Plan plan_from_cuts(const std::vector<int>& perm, const std::vector<int>& cuts, int m) {
    Plan plan;
    plan.routes.resize(m);
    const int n_prime = static_cast<int>(perm.size());
    int begin = 0;
    for (int k = 0; k < m; ++k) {
        const int end = (k == m - 1) ? n_prime : cuts[k];
        plan.routes[k].assign(perm.begin() + begin, perm.begin() + end);
        begin = end;
    }
    return plan;
}

}  // namespace

PopulationStats enumerate_population(const Scenario& scenario, const EnumerateOptions& options) {
    validate_scenario(scenario);
    const BigInt expected = count_solutions(scenario.subtask_count(), scenario.agent_count());
    if (expected > options.cap) throw PopulationTooLarge(expected, options.cap);

    const OracleGeometry geo(scenario);
    std::vector<double> max_times;
    max_times.reserve(static_cast<std::size_t>(expected));

    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_perm, best_cuts;
    enumerate_core(geo, [&](const std::vector<int>& perm, const std::vector<int>& cuts,
                            double worst) {
        max_times.push_back(worst);
        if (worst < best) {
            best = worst;
            best_perm = perm;
            best_cuts = cuts;
        }
    });

    PopulationStats stats;
    stats.population_size = max_times.size();
    stats.optimal_time = best;
    stats.optimal_plan = plan_from_cuts(best_perm, best_cuts, geo.m);
    const std::size_t mid = (max_times.size() - 1) / 2;
    std::nth_element(max_times.begin(), max_times.begin() + mid, max_times.end());
    stats.median_time = max_times[mid];
    return stats;
}

void for_each_plan(const Scenario& scenario,
                   const std::function<void(const Plan&, double max_time)>& visit) {
    validate_scenario(scenario);
    const OracleGeometry geo(scenario);
    enumerate_core(geo, [&](const std::vector<int>& perm, const std::vector<int>& cuts,
                            double worst) { visit(plan_from_cuts(perm, cuts, geo.m), worst); });
}

Plan random_plan(const Scenario& scenario, Rng& rng) {
    const int n_prime = scenario.subtask_count();
    const int m = scenario.agent_count();

    std::vector<int> perm(n_prime);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n_prime - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(i + 1)));
        std::swap(perm[i], perm[j]);
    }

    // Uniform separator placement: an (m-1)-subset of {1..n'+m-1} drawn with
    // Floyd's algorithm maps bijectively onto nondecreasing cut vectors.
    std::vector<int> picks;
    picks.reserve(m - 1);
    for (int j = n_prime + 1; j <= n_prime + m - 1; ++j) {
        const int r = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(j)));
        if (std::find(picks.begin(), picks.end(), r) != picks.end()) {
            picks.push_back(j);
        } else {
            picks.push_back(r);
        }
    }
    std::sort(picks.begin(), picks.end());
    std::vector<int> cuts(m - 1);
    for (int k = 0; k < m - 1; ++k) cuts[k] = picks[k] - (k + 1);

    return plan_from_cuts(perm, cuts, m);
}

double sample_median(const Scenario& scenario, int k, Rng& rng) {
    if (k < 1 || k % 2 == 0) throw std::invalid_argument("sample count must be odd and positive");
    const OracleGeometry geo(scenario);
    std::vector<double> times;
    times.reserve(k);
    for (int i = 0; i < k; ++i) times.push_back(geo.plan_max_time(random_plan(scenario, rng)));
    std::nth_element(times.begin(), times.begin() + k / 2, times.end());
    return times[k / 2];
}

}  // namespace cmrp
