#include "cmrp/local_search.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "cmrp/cost_matrix.hpp"
#include "cmrp/rng.hpp"

namespace cmrp {

namespace {

// Route times via cost-matrix lookups; forbidden entries never appear because
// routes only chain start -> sub-tasks -> depot.
class Evaluator {
public:
    explicit Evaluator(const Scenario& scenario)
        : scenario_(scenario), matrix_(build_cost_matrix(scenario)) {}

    double route_time(int agent, const std::vector<int>& route) const {
        int at = scenario_.start_vertex(agent);
        double total = 0.0;
        for (int s : route) {
            const int v = scenario_.subtask_vertex(s);
            total += matrix_(at, v);
            at = v;
        }
        return total + matrix_(at, Scenario::kDepotVertex);
    }

    std::vector<double> all_times(const Plan& plan) const {
        std::vector<double> times(plan.routes.size());
        for (std::size_t k = 0; k < plan.routes.size(); ++k) {
            times[k] = route_time(static_cast<int>(k), plan.routes[k]);
        }
        return times;
    }

private:
    const Scenario& scenario_;
    CostMatrix matrix_;
};

// Lexicographic min-max key: per-agent times sorted descending.
std::vector<double> sorted_key(std::vector<double> times) {
    std::sort(times.begin(), times.end(), std::greater<>());
    return times;
}

class Descent {
public:
    Descent(const Scenario& scenario, const Evaluator& eval, Plan plan, const SearchConfig& config)
        : eval_(eval),
          config_(config),
          m_(scenario.agent_count()),
          plan_(std::move(plan)),
          times_(eval.all_times(plan_)),
          key_(sorted_key(times_)) {}

    Plan run() {
        const auto deadline_start = std::chrono::steady_clock::now();
        int accepted = 0;
        while (accepted < config_.max_iterations && !out_of_time(deadline_start)) {
            if (!sweep()) break;  // local optimum
            ++accepted;
        }
        return plan_;
    }

private:
    bool out_of_time(std::chrono::steady_clock::time_point start) const {
        if (config_.time_budget_s == std::numeric_limits<double>::infinity()) return false;
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        return elapsed.count() >= config_.time_budget_s;
    }

    // Scans neighborhoods in configured order; applies the first improving
    // move and returns true, or false when no move improves.
    bool sweep() {
        for (Neighborhood nb : config_.neighborhoods) {
            switch (nb) {
                case Neighborhood::TwoOpt:
                    if (try_two_opt()) return true;
                    break;
                case Neighborhood::OrOpt:
                    if (try_or_opt()) return true;
                    break;
                case Neighborhood::Relocate:
                    if (try_relocate()) return true;
                    break;
                case Neighborhood::Swap:
                    if (try_swap()) return true;
                    break;
            }
        }
        return false;
    }

    bool accept_single(int agent, std::vector<int>&& route) {
        const double t = eval_.route_time(agent, route);
        std::vector<double> times = times_;
        times[agent] = t;
        std::vector<double> key = sorted_key(times);
        if (key < key_) {
            plan_.routes[agent] = std::move(route);
            times_ = std::move(times);
            key_ = std::move(key);
            return true;
        }
        return false;
    }

    bool accept_pair(int a, std::vector<int>&& route_a, int b, std::vector<int>&& route_b) {
        std::vector<double> times = times_;
        times[a] = eval_.route_time(a, route_a);
        times[b] = eval_.route_time(b, route_b);
        std::vector<double> key = sorted_key(times);
        if (key < key_) {
            plan_.routes[a] = std::move(route_a);
            plan_.routes[b] = std::move(route_b);
            times_ = std::move(times);
            key_ = std::move(key);
            return true;
        }
        return false;
    }

    bool try_two_opt() {
        for (int a = 0; a < m_; ++a) {
            const auto& route = plan_.routes[a];
            const int len = static_cast<int>(route.size());
            for (int i = 0; i + 1 < len; ++i) {
                for (int j = i + 1; j < len; ++j) {
                    std::vector<int> cand = route;
                    std::reverse(cand.begin() + i, cand.begin() + j + 1);
                    if (accept_single(a, std::move(cand))) return true;
                }
            }
        }
        return false;
    }

    bool try_or_opt() {
        for (int a = 0; a < m_; ++a) {
            const auto& route = plan_.routes[a];
            const int len = static_cast<int>(route.size());
            for (int seg = 1; seg <= 3; ++seg) {
                if (seg >= len) break;
                for (int i = 0; i + seg <= len; ++i) {
                    for (int p = 0; p <= len - seg; ++p) {
                        if (p == i) continue;
                        std::vector<int> cand;
                        cand.reserve(len);
                        cand.insert(cand.end(), route.begin(), route.begin() + i);
                        cand.insert(cand.end(), route.begin() + i + seg, route.end());
                        cand.insert(cand.begin() + p, route.begin() + i, route.begin() + i + seg);
                        if (accept_single(a, std::move(cand))) return true;
                    }
                }
            }
        }
        return false;
    }

    bool try_relocate() {
        for (int a = 0; a < m_; ++a) {
            const auto& from = plan_.routes[a];
            for (int i = 0; i < static_cast<int>(from.size()); ++i) {
                for (int b = 0; b < m_; ++b) {
                    if (b == a) continue;
                    const auto& to = plan_.routes[b];
                    for (int p = 0; p <= static_cast<int>(to.size()); ++p) {
                        std::vector<int> route_a = from;
                        route_a.erase(route_a.begin() + i);
                        std::vector<int> route_b = to;
                        route_b.insert(route_b.begin() + p, from[i]);
                        if (accept_pair(a, std::move(route_a), b, std::move(route_b))) return true;
                    }
                }
            }
        }
        return false;
    }

    bool try_swap() {
        for (int a = 0; a < m_; ++a) {
            for (int b = a + 1; b < m_; ++b) {
                const auto& ra = plan_.routes[a];
                const auto& rb = plan_.routes[b];
                for (int i = 0; i < static_cast<int>(ra.size()); ++i) {
                    for (int j = 0; j < static_cast<int>(rb.size()); ++j) {
                        std::vector<int> route_a = ra;
                        std::vector<int> route_b = rb;
                        std::swap(route_a[i], route_b[j]);
                        if (accept_pair(a, std::move(route_a), b, std::move(route_b))) return true;
                    }
                }
            }
        }
        return false;
    }

    const Evaluator& eval_;
    const SearchConfig& config_;
    int m_;
    Plan plan_;
    std::vector<double> times_;
    std::vector<double> key_;
};

}  // namespace

Plan construct(const Scenario& scenario) {
    validate_scenario(scenario);
    const Evaluator eval(scenario);
    const int m = scenario.agent_count();
    const int n_prime = scenario.subtask_count();

    Plan plan;
    plan.routes.resize(m);
    std::vector<double> times(m);
    for (int k = 0; k < m; ++k) times[k] = eval.route_time(k, {});

    for (int s = 0; s < n_prime; ++s) {
        double best_max = std::numeric_limits<double>::infinity();
        int best_agent = -1, best_pos = -1;
        double best_time = 0.0;
        for (int k = 0; k < m; ++k) {
            for (int p = 0; p <= static_cast<int>(plan.routes[k].size()); ++p) {
                std::vector<int> cand = plan.routes[k];
                cand.insert(cand.begin() + p, s);
                const double t = eval.route_time(k, cand);
                double cand_max = t;
                for (int other = 0; other < m; ++other) {
                    if (other != k) cand_max = std::max(cand_max, times[other]);
                }
                if (cand_max < best_max) {
                    best_max = cand_max;
                    best_agent = k;
                    best_pos = p;
                    best_time = t;
                }
            }
        }
        plan.routes[best_agent].insert(plan.routes[best_agent].begin() + best_pos, s);
        times[best_agent] = best_time;
    }
    return plan;
}

Plan improve(const Scenario& scenario, const Plan& plan, const SearchConfig& config) {
    const ValidationReport report = validate_plan(scenario, plan);
    if (!report.ok()) throw std::invalid_argument("infeasible input plan: " + report.message);
    if (config.neighborhoods.empty()) throw std::invalid_argument("no neighborhoods enabled");
    const Evaluator eval(scenario);
    return Descent(scenario, eval, plan, config).run();
}

Plan iterated_search(const Scenario& scenario, const NOptConfig& config) {
    const Evaluator eval(scenario);
    Plan best = improve(scenario, construct(scenario), config.search);
    const int n_prime = scenario.subtask_count();
    if (n_prime == 0 || config.restarts <= 0) return best;

    std::vector<double> best_key = sorted_key(eval.all_times(best));
    Rng rng(config.search.seed);
    const int m = scenario.agent_count();
    for (int r = 0; r < config.restarts; ++r) {
        Plan kicked = best;
        for (int q = 0; q < config.kick_strength; ++q) {
            const int s = static_cast<int>(rng.uniform_int(n_prime));
            for (auto& route : kicked.routes) {
                auto it = std::find(route.begin(), route.end(), s);
                if (it != route.end()) {
                    route.erase(it);
                    break;
                }
            }
            auto& target = kicked.routes[rng.uniform_int(m)];
            target.insert(target.begin() + rng.uniform_int(target.size() + 1), s);
        }
        Plan cand = improve(scenario, kicked, config.search);
        std::vector<double> cand_key = sorted_key(eval.all_times(cand));
        if (cand_key < best_key) {
            best = std::move(cand);
            best_key = std::move(cand_key);
        }
    }
    return best;
}

}  // namespace cmrp
