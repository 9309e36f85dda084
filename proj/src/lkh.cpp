#include "cmrp/lkh.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cmrp/cost_matrix.hpp"
#include "cmrp/rng.hpp"

namespace cmrp {

namespace {

long long scaled_cost(double cost, double scale) {
    if (std::isinf(cost)) return kLkhExcludedEdge;
    return std::llround(cost * scale);
}

std::string resolve_binary(const LkhConfig& config) {
    if (!config.binary.empty()) return config.binary;
    if (const char* env = std::getenv("CMRP_LKH3_BIN"); env && *env) return env;
    return {};
}

}  // namespace

void lkh3_export(const Scenario& scenario, const std::string& problem_path,
                 const std::string& param_path, const std::string& tour_path,
                 const LkhConfig& config) {
    validate_scenario(scenario);
    const CostMatrix matrix = build_cost_matrix(scenario);
    const int size = matrix.size();

    std::ofstream problem(problem_path);
    if (!problem) throw std::runtime_error("cannot write problem file: " + problem_path);
    problem << "NAME : cmrp_" << scenario.subtask_count() << "_" << scenario.agent_count() << "\n"
            << "TYPE : ATSP\n"
            << "COMMENT : min-max replanning instance, costs x" << config.scale << "\n"
            << "DIMENSION : " << size << "\n"
            << "EDGE_WEIGHT_TYPE : EXPLICIT\n"
            << "EDGE_WEIGHT_FORMAT : FULL_MATRIX\n"
            << "EDGE_WEIGHT_SECTION\n";
    for (int i = 0; i < size; ++i) {
        for (int j = 0; j < size; ++j) {
            const long long value =
                (i == j) ? kLkhExcludedEdge : scaled_cost(matrix(i, j), config.scale);
            problem << value << (j + 1 < size ? " " : "\n");
        }
    }
    problem << "EOF\n";
    if (!problem) throw std::runtime_error("write failed: " + problem_path);

    std::ofstream params(param_path);
    if (!params) throw std::runtime_error("cannot write parameter file: " + param_path);
    params << "PROBLEM_FILE = " << problem_path << "\n"
           << "SALESMEN = " << scenario.agent_count() << "\n"
           << "DEPOT = 1\n"
           << "MTSP_OBJECTIVE = MINMAX\n"
           << "MTSP_MIN_SIZE = 1\n"
           << "MTSP_SOLUTION_FILE = " << tour_path << "\n"
           << "RUNS = " << config.runs << "\n"
           << "SEED = " << config.seed << "\n"
           << "TRACE_LEVEL = 0\n";
    if (config.max_trials > 0) params << "MAX_TRIALS = " << config.max_trials << "\n";
    if (!params) throw std::runtime_error("write failed: " + param_path);
}

void write_tour_file(const Scenario& scenario, const Plan& plan, const std::string& path,
                     double scale) {
    const ValidationReport report = validate_plan(scenario, plan);
    if (!report.ok()) throw std::invalid_argument("infeasible plan: " + report.message);
    const MissionTimes times = mission_times(scenario, plan);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write tour file: " + path);
    out << "Dimension : " << scenario.vertex_count() << "\n";
    out << "Cost.max = " << std::llround(times.max_time * scale) << "\n";
    for (int k = 0; k < scenario.agent_count(); ++k) {
        out << 1 << " " << scenario.start_vertex(k) + 1;
        for (int s : plan.routes[k]) out << " " << scenario.subtask_vertex(s) + 1;
        out << " (#" << plan.routes[k].size() + 1 << ") Cost: "
            << std::llround(times.per_agent[k] * scale) << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

Plan parse_tour_file(const Scenario& scenario, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open tour file: " + path);

    const int m = scenario.agent_count();
    const int v_count = scenario.vertex_count();
    const int first_subtask = scenario.subtask_vertex(0);

    // Collect vertex sequences: one per "route" line, or one giant tour from a
    // TOUR_SECTION block. Ids above the dimension are depot copies some
    // solvers emit and are treated as depot separators.
    std::vector<std::vector<int>> sequences;
    bool in_tour_section = false;
    std::vector<int> giant;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find("TOUR_SECTION") != std::string::npos) {
            in_tour_section = true;
            continue;
        }
        std::string digits = line;
        const std::size_t colon = digits.find(':');
        if (digits.find("Route") != std::string::npos && colon != std::string::npos) {
            digits = digits.substr(colon + 1);
        }
        const std::size_t paren = digits.find('(');
        if (paren != std::string::npos) digits = digits.substr(0, paren);

        std::istringstream stream(digits);
        std::vector<int> ids;
        int id;
        bool numeric = true;
        std::string token;
        while (stream >> token) {
            try {
                std::size_t used = 0;
                id = std::stoi(token, &used);
                if (used != token.size()) {
                    numeric = false;
                    break;
                }
            } catch (const std::exception&) {
                numeric = false;
                break;
            }
            ids.push_back(id);
        }
        if (!numeric || ids.empty()) continue;
        if (in_tour_section) {
            for (int v : ids) {
                if (v == -1) {
                    in_tour_section = false;
                    break;
                }
                giant.push_back(v);
            }
        } else {
            sequences.push_back(std::move(ids));
        }
    }
    if (!giant.empty()) {
        // Split the giant tour at the depot (id 1) and at depot copies.
        std::vector<int> current;
        for (int v : giant) {
            if (v == 1 || v > v_count) {
                if (!current.empty()) sequences.push_back(std::move(current));
                current.clear();
            } else {
                current.push_back(v);
            }
        }
        if (!current.empty()) sequences.push_back(std::move(current));
    }

    Plan plan;
    plan.routes.resize(m);
    std::vector<char> agent_seen(m, 0);
    for (const auto& seq : sequences) {
        std::vector<int> vertices;
        for (int v : seq) {
            if (v == 1 || v > v_count) continue;  // depot / depot copy
            vertices.push_back(v - 1);            // to 0-based
        }
        if (vertices.empty()) continue;
        const int head = vertices.front();
        if (head < 1 || head >= first_subtask) {
            throw std::runtime_error("tour route does not begin at a start vertex: vertex id " +
                                     std::to_string(head + 1));
        }
        const int agent = head - 1;
        if (agent_seen[agent]) {
            throw std::runtime_error("start vertex " + std::to_string(head + 1) +
                                     " appears in two routes");
        }
        agent_seen[agent] = 1;
        for (std::size_t i = 1; i < vertices.size(); ++i) {
            const int v = vertices[i];
            if (v < first_subtask || v >= v_count) {
                throw std::runtime_error("unexpected vertex id " + std::to_string(v + 1) +
                                         " inside a route (start vertices are entry-forbidden)");
            }
            plan.routes[agent].push_back(v - first_subtask);
        }
    }

    const ValidationReport report = validate_plan(scenario, plan);
    if (!report.ok()) throw std::runtime_error("parsed tour is infeasible: " + report.message);
    return plan;
}

Plan lkh3_solve(const Scenario& scenario, const LkhConfig& config) {
    const std::string binary = resolve_binary(config);
    if (binary.empty()) {
        throw std::runtime_error(
            "external solver unavailable: set CMRP_LKH3_BIN or LkhConfig.binary");
    }

    namespace fs = std::filesystem;
    fs::path dir;
    if (!config.work_dir.empty()) {
        dir = config.work_dir;
        fs::create_directories(dir);
    } else {
        Rng rng(static_cast<std::uint64_t>(
            std::chrono::steady_clock::now().time_since_epoch().count()));
        dir = fs::temp_directory_path() / ("cmrp_lkh_" + std::to_string(rng.next_u64()));
        fs::create_directories(dir);
    }
    const std::string problem = (dir / "instance.atsp").string();
    const std::string params = (dir / "instance.par").string();
    const std::string tour = (dir / "instance.tour").string();
    lkh3_export(scenario, problem, params, tour, config);

    const std::string command = "\"" + binary + "\" \"" + params + "\" > \"" +
                                (dir / "solver.log").string() + "\" 2>&1";
    const int rc = std::system(command.c_str());
    if (rc != 0 || !fs::exists(tour)) {
        throw std::runtime_error("external solver failed (exit " + std::to_string(rc) +
                                 "), log at " + (dir / "solver.log").string());
    }
    Plan plan = parse_tour_file(scenario, tour);
    if (!config.keep_files && config.work_dir.empty()) {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    return plan;
}

}  // namespace cmrp
