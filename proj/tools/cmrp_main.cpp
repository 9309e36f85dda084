#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmrp/bench.hpp"
#include "cmrp/json_io.hpp"
#include "cmrp/lkh.hpp"
#include "cmrp/local_search.hpp"
#include "cmrp/nn_io.hpp"
#include "cmrp/oracle.hpp"
#include "cmrp/svg.hpp"
#include "cmrp/train.hpp"

namespace {

using namespace cmrp;

IntRange parse_range(const std::string& text) {
    const std::size_t colon = text.find(':');
    if (colon == std::string::npos) return IntRange::fixed(std::stoi(text));
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
}

std::string fmt(double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.9g", v);
    return buffer;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write: " + path);
    out << text;
}

int cmd_generate(const std::string& n, const std::string& m, const std::string& delta, int count,
                 std::uint64_t seed, const std::string& out, double domain, double tmin,
                 double tmax, double speed, const std::string& preset) {
    GeneratorConfig config;
    config.n_tasks = parse_range(n);
    config.n_agents = parse_range(m);
    config.discretization = parse_range(delta);
    config.seed = seed;
    config.domain_size = domain;
    config.time_cost_min = tmin;
    config.time_cost_max = tmax;
    config.speed = speed;
    if (!preset.empty()) config = apply_problem_type(config, problem_type_from_name(preset));

    std::vector<nlohmann::json> lines;
    lines.reserve(count);
    for (int i = 0; i < count; ++i) {
        lines.push_back(scenario_to_json(generate(config, static_cast<std::uint64_t>(i))));
    }
    write_jsonl(out, lines);
    std::cout << "wrote " << count << " scenarios to " << out << "\n";
    return 0;
}

int cmd_enumerate(const std::string& in, long cap, const std::string& out) {
    const std::vector<Scenario> scenarios = read_scenarios(in);
    EnumerateOptions options;
    options.cap = cap;
    std::string csv = "# cmrp-enumerate-v1\ninstance,n,m,delta,population,opt_p,med_p\n";
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        const Scenario& scenario = scenarios[i];
        const PopulationStats stats = enumerate_population(scenario, options);
        csv += std::to_string(i) + "," + std::to_string(scenario.task_count()) + "," +
               std::to_string(scenario.agent_count()) + "," +
               std::to_string(scenario.discretization) + "," + stats.population_size.str() + "," +
               fmt(stats.optimal_time) + "," + fmt(stats.median_time) + "\n";
    }
    write_text(out, csv);
    std::cout << "enumerated " << scenarios.size() << " instances to " << out << "\n";
    return 0;
}

int cmd_solve(const std::string& method, const std::string& in, const std::string& out,
              const std::string& model_path, std::uint64_t seed, int restarts,
              const std::string& lkh_binary, int lkh_runs) {
    const std::vector<Scenario> scenarios = read_scenarios(in);
    std::vector<Plan> plans;
    plans.reserve(scenarios.size());

    if (method == "heuristic") {
        NOptConfig config;
        config.restarts = restarts;
        for (std::size_t i = 0; i < scenarios.size(); ++i) {
            config.search.seed = splitmix64(seed + i);
            plans.push_back(iterated_search(scenarios[i], config));
        }
    } else if (method == "neural") {
        if (model_path.empty()) throw std::runtime_error("--model is required for --method neural");
        const auto params = nn::load_model<float>(model_path);
        for (const Scenario& scenario : scenarios) {
            plans.push_back(nn::rollout(scenario, params, nn::DecodeMode::Greedy, nullptr).plan);
        }
    } else if (method == "external") {
        LkhConfig config;
        config.binary = lkh_binary;
        config.runs = lkh_runs;
        config.seed = seed;
        for (const Scenario& scenario : scenarios) plans.push_back(lkh3_solve(scenario, config));
    } else {
        throw std::runtime_error("unknown method '" + method + "'");
    }

    write_plans(out, plans);
    double mean = 0.0;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        mean += mission_times(scenarios[i], plans[i]).max_time;
    }
    std::cout << "solved " << scenarios.size() << " instances (mean max mission time "
              << fmt(mean / static_cast<double>(scenarios.size())) << " s) to " << out << "\n";
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& model_out,
              const std::string& report_out) {
    const TrainConfig config = load_train_config(config_path);
    auto [params, report] = train<float>(config);
    nn::save_model(params, model_out);
    if (!report_out.empty()) write_text(report_out, report.to_csv());
    std::cout << "trained " << report.epochs.size() << " epochs; best val mean max time "
              << fmt(report.best_val_mean) << " s (epoch " << report.best_epoch << ")\n";
    return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out_prefix,
              const std::string& format) {
    const SweepConfig config = load_sweep_config(config_path);
    const SweepResult result = run_sweep(config);

    write_text(out_prefix + "_records.csv", result.records_csv());
    if (format == "json") {
        write_text(out_prefix + "_aggregate.json", result.aggregates_json());
    } else {
        write_text(out_prefix + "_aggregate.csv", result.aggregates_csv());
    }

    // Mean mission time per cell, one series per solver.
    std::vector<std::string> labels;
    std::vector<svg::Series> series(5);
    series[0].name = "Opt-P";
    series[1].name = "Med-P";
    series[2].name = "Med-S";
    series[3].name = "NOpt";
    series[4].name = "Neural";
    for (const CellAggregate& a : result.aggregates) {
        labels.push_back(a.cell.label());
        auto push = [](svg::Series& s, const std::optional<double>& v) {
            s.values.push_back(v.value_or(0.0));
        };
        push(series[0], a.mean_opt_p);
        push(series[1], a.mean_med_p);
        push(series[2], a.mean_med_s);
        push(series[3], a.mean_nopt);
        push(series[4], a.mean_neural);
    }
    std::vector<svg::Series> present;
    for (const svg::Series& s : series) {
        bool any = false;
        for (double v : s.values) any = any || v != 0.0;
        if (any) present.push_back(s);
    }
    if (!present.empty()) {
        svg::line_chart("mean max mission time per cell", labels, present, "seconds",
                        out_prefix + "_means.svg");
    }

    // Cumulative curve of normalized mission times wherever Opt-P and Med-P
    // both exist.
    std::vector<double> normalized;
    for (const EvalRecord& r : result.records) {
        if (r.neural && r.opt_p && r.med_p) {
            const NormalizedTime nt = normalized_mission_time(*r.neural, *r.opt_p, *r.med_p);
            if (!nt.degenerate) normalized.push_back(nt.value);
        }
    }
    if (!normalized.empty()) {
        std::vector<double> thresholds;
        for (int i = 0; i <= 60; ++i) thresholds.push_back(-0.2 + i * 0.02);
        std::vector<std::string> tick_labels;
        svg::Series curve{"share below threshold", {}};
        for (const auto& [t, frac] : cumulative_curve(normalized, thresholds)) {
            char label[16];
            std::snprintf(label, sizeof(label), "%.2f", t);
            tick_labels.push_back((tick_labels.size() % 10 == 0) ? label : "");
            curve.values.push_back(frac);
        }
        svg::line_chart("normalized mission time vs Opt-P, cumulative", tick_labels, {curve},
                        "fraction", out_prefix + "_cumulative.svg");
    }

    for (const CellAggregate& a : result.aggregates) {
        if (!a.skip_reason.empty()) {
            std::cerr << "cell " << a.cell.label() << " incomplete: " << a.skip_reason << "\n";
        }
    }
    std::cout << result.aggregates_csv();
    return result.complete() ? 0 : 1;
}

int cmd_plot(const std::string& scenario_path, int index,
             const std::vector<std::string>& plan_specs, bool ladder, std::uint64_t seed,
             const std::string& n, const std::string& m, const std::string& delta,
             const std::string& solvers_csv, const std::string& model_path,
             const std::string& out) {
    if (ladder) {
        std::vector<std::string> solvers;
        std::string token;
        for (char c : solvers_csv + ",") {
            if (c == ',') {
                if (!token.empty()) solvers.push_back(token);
                token.clear();
            } else {
                token += c;
            }
        }
        std::optional<nn::ModelParams<float>> model;
        if (!model_path.empty()) model = nn::load_model<float>(model_path);

        std::vector<svg::TourRow> rows;
        for (const auto& [label, type] : problem_type_ladder()) {
            GeneratorConfig config;
            config.n_tasks = parse_range(n);
            config.n_agents = parse_range(m);
            config.discretization = parse_range(delta);
            config.seed = seed;
            config = apply_problem_type(config, type);
            const Scenario scenario = generate(config, 0);

            svg::TourRow row;
            row.label = label;
            row.scenario = scenario;
            for (const std::string& solver : solvers) {
                if (solver == "heuristic") {
                    NOptConfig nopt;
                    nopt.search.seed = seed;
                    row.plans.emplace_back("NOpt", iterated_search(scenario, nopt));
                } else if (solver == "optimal") {
                    row.plans.emplace_back("Opt-P", enumerate_population(scenario).optimal_plan);
                } else if (solver == "random") {
                    Rng rng(seed);
                    row.plans.emplace_back("Random", random_plan(scenario, rng));
                } else if (solver == "neural") {
                    if (!model) throw std::runtime_error("--model required for neural column");
                    row.plans.emplace_back(
                        "Neural",
                        nn::rollout(scenario, *model, nn::DecodeMode::Greedy, nullptr).plan);
                } else {
                    throw std::runtime_error("unknown solver '" + solver + "'");
                }
            }
            rows.push_back(std::move(row));
        }
        svg::plot_tours_grid(rows, out);
        std::cout << "wrote " << out << "\n";
        return 0;
    }

    const std::vector<Scenario> scenarios = read_scenarios(scenario_path);
    if (index < 0 || index >= static_cast<int>(scenarios.size())) {
        throw std::runtime_error("scenario index out of range");
    }
    std::vector<std::pair<std::string, Plan>> plans;
    for (const std::string& spec : plan_specs) {
        const std::size_t eq = spec.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("--plans expects label=path, got '" + spec + "'");
        }
        const std::vector<Plan> file_plans = read_plans(spec.substr(eq + 1));
        if (index >= static_cast<int>(file_plans.size())) {
            throw std::runtime_error("plan file " + spec.substr(eq + 1) + " has no entry " +
                                     std::to_string(index));
        }
        plans.emplace_back(spec.substr(0, eq), file_plans[index]);
    }
    svg::plot_tours(scenarios[index], plans, out);
    std::cout << "wrote " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cooperative mission replanning toolkit"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Generate random scenarios as JSON lines");
    std::string g_n = "4", g_m = "3", g_delta = "1", g_out = "scenarios.jsonl", g_preset;
    int g_count = 100;
    std::uint64_t g_seed = 1;
    double g_domain = 10.0, g_tmin = 1.0, g_tmax = 10.0, g_speed = 1.0;
    gen->add_option("--n", g_n, "task count, fixed (4) or range (2:6)");
    gen->add_option("--m", g_m, "agent count, fixed or range");
    gen->add_option("--delta", g_delta, "discretization level, fixed or range");
    gen->add_option("--count", g_count, "number of instances");
    gen->add_option("--seed", g_seed, "base seed");
    gen->add_option("--out", g_out, "output JSONL path");
    gen->add_option("--domain", g_domain, "domain edge length, meters");
    gen->add_option("--tmin", g_tmin, "min task time cost, s");
    gen->add_option("--tmax", g_tmax, "max task time cost, s");
    gen->add_option("--speed", g_speed, "agent speed, m/s");
    gen->add_option("--preset", g_preset, "problem-type preset (basic|starts|times|starts-times|full)");

    // enumerate
    auto* enumerate = app.add_subcommand("enumerate", "Brute-force population statistics");
    std::string e_in, e_out = "stats.csv";
    long e_cap = 100'000'000;
    enumerate->add_option("--in", e_in, "scenarios JSONL")->required();
    enumerate->add_option("--cap", e_cap, "refuse populations above this size");
    enumerate->add_option("--out", e_out, "output CSV path");

    // solve
    auto* solve = app.add_subcommand("solve", "Solve scenarios with a chosen method");
    std::string s_method = "heuristic", s_in, s_out = "plans.jsonl", s_model, s_lkh;
    std::uint64_t s_seed = 1;
    int s_restarts = 60, s_lkh_runs = 1;
    solve->add_option("--method", s_method, "heuristic|external|neural");
    solve->add_option("--in", s_in, "scenarios JSONL")->required();
    solve->add_option("--out", s_out, "plans JSONL path");
    solve->add_option("--model", s_model, "model file for --method neural");
    solve->add_option("--seed", s_seed, "search seed");
    solve->add_option("--restarts", s_restarts, "iterated-search restarts");
    solve->add_option("--lkh-binary", s_lkh, "external solver binary (or CMRP_LKH3_BIN)");
    solve->add_option("--lkh-runs", s_lkh_runs, "external solver RUNS parameter");

    // train
    auto* tr = app.add_subcommand("train", "Train the neural solver");
    std::string t_config, t_out = "model.json", t_report = "report.csv";
    tr->add_option("--config", t_config, "train config JSON")->required();
    tr->add_option("--out", t_out, "output model path");
    tr->add_option("--report", t_report, "output report CSV path");

    // bench
    auto* bench = app.add_subcommand("bench", "Run the evaluation sweep");
    std::string b_config, b_prefix = "bench", b_format = "csv";
    bench->add_option("--config", b_config, "sweep config JSON")->required();
    bench->add_option("--out-prefix", b_prefix, "output file prefix");
    bench->add_option("--format", b_format, "aggregate format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));

    // plot
    auto* plot = app.add_subcommand("plot", "Render tours as SVG");
    std::string p_scenario, p_out = "tours.svg", p_solvers = "heuristic", p_model;
    std::string p_n = "4", p_m = "3", p_delta = "2";
    std::vector<std::string> p_plans;
    bool p_ladder = false;
    int p_index = 0;
    std::uint64_t p_seed = 1;
    plot->add_option("--scenario", p_scenario, "scenarios JSONL");
    plot->add_option("--index", p_index, "scenario line to plot");
    plot->add_option("--plans", p_plans, "label=plans.jsonl (repeatable)");
    plot->add_flag("--ladder", p_ladder, "render the five problem-type presets");
    plot->add_option("--seed", p_seed, "seed for --ladder");
    plot->add_option("--n", p_n, "tasks for --ladder");
    plot->add_option("--m", p_m, "agents for --ladder");
    plot->add_option("--delta", p_delta, "discretization for the full row of --ladder");
    plot->add_option("--solvers", p_solvers, "columns for --ladder: heuristic,optimal,random,neural");
    plot->add_option("--model", p_model, "model file for the neural column");
    plot->add_option("--out", p_out, "output SVG path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            return cmd_generate(g_n, g_m, g_delta, g_count, g_seed, g_out, g_domain, g_tmin,
                                g_tmax, g_speed, g_preset);
        }
        if (enumerate->parsed()) return cmd_enumerate(e_in, e_cap, e_out);
        if (solve->parsed()) {
            return cmd_solve(s_method, s_in, s_out, s_model, s_seed, s_restarts, s_lkh,
                             s_lkh_runs);
        }
        if (tr->parsed()) return cmd_train(t_config, t_out, t_report);
        if (bench->parsed()) return cmd_bench(b_config, b_prefix, b_format);
        if (plot->parsed()) {
            return cmd_plot(p_scenario, p_index, p_plans, p_ladder, p_seed, p_n, p_m, p_delta,
                            p_solvers, p_model, p_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
