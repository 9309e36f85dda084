#include "cmrp/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "cmrp/json_io.hpp"
#include "cmrp/nn_io.hpp"
#include "cmrp/oracle.hpp"
#include "cmrp/parallel.hpp"

namespace cmrp {

SweepConfig sweep_config_from_json_text(const std::string& json_text) {
    const nlohmann::json j = nlohmann::json::parse(json_text);
    SweepConfig config;
    for (const auto& jc : j.at("cells")) {
        config.cells.push_back(
            {jc.at("n").get<int>(), jc.at("m").get<int>(), jc.value("delta", 1)});
    }
    config.instances_per_cell = j.value("instances_per_cell", config.instances_per_cell);
    if (j.contains("seeds")) config.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("generator")) {
        config.base_generator = generator_config_from_json(j.at("generator"));
    }
    if (j.contains("problem_type")) {
        config.problem_type = problem_type_from_name(j.at("problem_type").get<std::string>());
    }
    config.run_optp = j.value("run_optp", config.run_optp);
    if (j.contains("enumerate_cap")) config.enumerate_cap = j.at("enumerate_cap").get<long>();
    config.run_meds = j.value("run_meds", config.run_meds);
    config.meds_samples = j.value("meds_samples", config.meds_samples);
    config.run_nopt = j.value("run_nopt", config.run_nopt);
    if (j.contains("nopt")) {
        const auto& jn = j.at("nopt");
        config.nopt.restarts = jn.value("restarts", config.nopt.restarts);
        config.nopt.kick_strength = jn.value("kick_strength", config.nopt.kick_strength);
        config.nopt.search.max_iterations =
            jn.value("max_iterations", config.nopt.search.max_iterations);
        config.nopt.search.time_budget_s =
            jn.value("time_budget_s", config.nopt.search.time_budget_s);
    }
    config.model_path = j.value("model", config.model_path);
    config.timing_reps = j.value("timing_reps", config.timing_reps);
    config.threads = j.value("threads", config.threads);
    return config;
}

SweepConfig load_sweep_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open sweep config: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return sweep_config_from_json_text(text);
}

NormalizedTime normalized_mission_time(double mt_model, double mt_benchmark, double mt_medp) {
    const double denom = mt_medp - mt_benchmark;
    if (std::abs(denom) < 1e-12) return {0.0, true};
    return {(mt_model - mt_benchmark) / denom, false};
}

std::vector<std::pair<double, double>> cumulative_curve(const std::vector<double>& values,
                                                        const std::vector<double>& thresholds) {
    if (values.empty()) throw std::invalid_argument("cumulative_curve: no values");
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<double, double>> curve;
    curve.reserve(thresholds.size());
    for (double t : thresholds) {
        const auto below = std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
        curve.emplace_back(t, static_cast<double>(below) / static_cast<double>(sorted.size()));
    }
    return curve;
}

std::map<double, double> threshold_proportions(const std::vector<double>& values,
                                               const std::vector<double>& levels) {
    std::map<double, double> proportions;
    for (const auto& [threshold, fraction] : cumulative_curve(values, levels)) {
        proportions[threshold] = fraction;
    }
    return proportions;
}

double normalized_runtime_percent(double rt_model, double rt_benchmark) {
    if (!(rt_benchmark > 0.0)) throw std::invalid_argument("benchmark runtime must be positive");
    return rt_model / rt_benchmark * 100.0;
}

const std::vector<std::pair<std::string, ProblemType>>& problem_type_ladder() {
    static const std::vector<std::pair<std::string, ProblemType>> ladder = {
        {"basic", ProblemType::Basic},
        {"starts", ProblemType::Starts},
        {"times", ProblemType::Times},
        {"starts-times", ProblemType::StartsTimes},
        {"full", ProblemType::Full},
    };
    return ladder;
}

ProblemType problem_type_from_name(const std::string& name) {
    for (const auto& [label, type] : problem_type_ladder()) {
        if (label == name) return type;
    }
    throw std::invalid_argument("unknown problem type '" + name + "'");
}

GeneratorConfig apply_problem_type(GeneratorConfig config, ProblemType type) {
    switch (type) {
        case ProblemType::Basic:
            config.starts_at_depot = true;
            config.time_cost_min = config.time_cost_max = 0.0;
            config.discretization = IntRange::fixed(1);
            break;
        case ProblemType::Starts:
            config.starts_at_depot = false;
            config.time_cost_min = config.time_cost_max = 0.0;
            config.discretization = IntRange::fixed(1);
            break;
        case ProblemType::Times:
            config.starts_at_depot = true;
            config.discretization = IntRange::fixed(1);
            break;
        case ProblemType::StartsTimes:
            config.starts_at_depot = false;
            config.discretization = IntRange::fixed(1);
            break;
        case ProblemType::Full:
            config.starts_at_depot = false;
            break;
    }
    return config;
}

namespace {

constexpr std::uint64_t kMedsSalt = 0x6d65645f73616dull;
constexpr std::uint64_t kNOptSalt = 0x6e6f70745f6c73ull;

std::string fmt(double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.9g", v);
    return buffer;
}

std::string opt_fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

template <class Fn>
double timed(int reps, Fn&& fn) {
    fn();  // warmup, excluded
    std::vector<double> samples(reps);
    for (int r = 0; r < reps; ++r) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        samples[r] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                         .count();
    }
    std::nth_element(samples.begin(), samples.begin() + reps / 2, samples.end());
    return samples[reps / 2];
}

std::optional<double> mean_of(const std::vector<EvalRecord>& records,
                              std::optional<double> EvalRecord::*field) {
    double sum = 0.0;
    long count = 0;
    for (const EvalRecord& r : records) {
        if (r.*field) {
            sum += *(r.*field);
            ++count;
        }
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

std::optional<double> median_of(const std::vector<EvalRecord>& records,
                                std::optional<double> EvalRecord::*field) {
    std::vector<double> values;
    for (const EvalRecord& r : records) {
        if (r.*field) values.push_back(*(r.*field));
    }
    if (values.empty()) return std::nullopt;
    const std::size_t mid = (values.size() - 1) / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    return values[mid];
}

}  // namespace

bool SweepResult::complete() const {
    return std::all_of(aggregates.begin(), aggregates.end(),
                       [](const CellAggregate& a) { return a.skip_reason.empty(); });
}

std::string SweepResult::records_csv() const {
    std::string out = "# cmrp-eval-v1\n";
    out +=
        "instance_id,n,m,delta,seed,opt_p,med_p,med_s,nopt,neural,wall_nopt_s,wall_neural_s\n";
    for (const EvalRecord& r : records) {
        out += std::to_string(r.instance_id) + "," + std::to_string(r.n) + "," +
               std::to_string(r.m) + "," + std::to_string(r.delta) + "," +
               std::to_string(r.seed) + "," + opt_fmt(r.opt_p) + "," + opt_fmt(r.med_p) + "," +
               opt_fmt(r.med_s) + "," + opt_fmt(r.nopt) + "," + opt_fmt(r.neural) + "," +
               opt_fmt(r.wall_nopt_s) + "," + opt_fmt(r.wall_neural_s) + "\n";
    }
    return out;
}

std::string SweepResult::aggregates_csv() const {
    std::string out = "# cmrp-eval-aggregate-v1\n";
    out += "cell,n,m,delta,instances,mean_opt_p,mean_med_p,mean_med_s,mean_nopt,mean_neural,"
           "neural_gap_to_nopt_pct,median_wall_nopt_s,median_wall_neural_s,skip_reason\n";
    for (const CellAggregate& a : aggregates) {
        out += a.cell.label() + "," + std::to_string(a.cell.n) + "," + std::to_string(a.cell.m) +
               "," + std::to_string(a.cell.delta) + "," + std::to_string(a.instances) + "," +
               opt_fmt(a.mean_opt_p) + "," + opt_fmt(a.mean_med_p) + "," + opt_fmt(a.mean_med_s) +
               "," + opt_fmt(a.mean_nopt) + "," + opt_fmt(a.mean_neural) + "," +
               opt_fmt(a.neural_gap_to_nopt_pct) + "," + opt_fmt(a.median_wall_nopt_s) + "," +
               opt_fmt(a.median_wall_neural_s) + "," + a.skip_reason + "\n";
    }
    return out;
}

std::string SweepResult::aggregates_json() const {
    nlohmann::json cells = nlohmann::json::array();
    for (const CellAggregate& a : aggregates) {
        nlohmann::json j = {{"cell", a.cell.label()},
                            {"n", a.cell.n},
                            {"m", a.cell.m},
                            {"delta", a.cell.delta},
                            {"instances", a.instances}};
        auto put = [&](const char* key, const std::optional<double>& v) {
            if (v) j[key] = *v;
        };
        put("mean_opt_p", a.mean_opt_p);
        put("mean_med_p", a.mean_med_p);
        put("mean_med_s", a.mean_med_s);
        put("mean_nopt", a.mean_nopt);
        put("mean_neural", a.mean_neural);
        put("neural_gap_to_nopt_pct", a.neural_gap_to_nopt_pct);
        put("median_wall_nopt_s", a.median_wall_nopt_s);
        put("median_wall_neural_s", a.median_wall_neural_s);
        if (!a.skip_reason.empty()) j["skip_reason"] = a.skip_reason;
        cells.push_back(std::move(j));
    }
    return nlohmann::json({{"format", "cmrp-eval-aggregate-v1"}, {"cells", cells}}).dump(2);
}

SweepResult run_sweep(const SweepConfig& config) {
    if (config.cells.empty()) throw std::invalid_argument("sweep has no cells");

    // Timing runs are single-threaded so wall times mean something.
    const int threads = config.timing_reps > 0 ? 1 : std::max(1, config.threads);

    std::optional<nn::ModelParams<float>> model;
    std::string model_error;
    if (!config.model_path.empty()) {
        try {
            model = nn::load_model<float>(config.model_path);
        } catch (const std::exception& e) {
            model_error = e.what();
        }
    }

    SweepResult result;
    for (const Cell& cell : config.cells) {
        GeneratorConfig gen = apply_problem_type(config.base_generator, config.problem_type);
        gen.n_tasks = IntRange::fixed(cell.n);
        gen.n_agents = IntRange::fixed(cell.m);
        if (config.problem_type == ProblemType::Full) {
            gen.discretization = IntRange::fixed(cell.delta);
        }

        CellAggregate aggregate;
        aggregate.cell = cell;
        if (!config.model_path.empty() && !model) {
            aggregate.skip_reason = "neural model unavailable: " + model_error;
        }

        std::vector<EvalRecord> cell_records;
        const int n_prime = cell.n * gen.discretization.hi;
        const bool enumerable =
            config.run_optp && count_solutions(n_prime, cell.m) <= config.enumerate_cap;

        for (std::uint64_t seed : config.seeds) {
            GeneratorConfig seeded = gen;
            seeded.seed = seed;
            const long base_id = static_cast<long>(cell_records.size());
            std::vector<EvalRecord> seed_records(config.instances_per_cell);

            parallel_blocks(config.instances_per_cell, threads, [&](long begin, long end, int) {
                for (long i = begin; i < end; ++i) {
                    const Scenario scenario = generate(seeded, static_cast<std::uint64_t>(i));
                    EvalRecord record;
                    record.instance_id = base_id + i;
                    record.n = cell.n;
                    record.m = cell.m;
                    record.delta = scenario.discretization;
                    record.seed = seed;

                    if (enumerable) {
                        EnumerateOptions options;
                        options.cap = config.enumerate_cap;
                        const PopulationStats stats = enumerate_population(scenario, options);
                        record.opt_p = stats.optimal_time;
                        record.med_p = stats.median_time;
                    }
                    if (config.run_meds) {
                        Rng rng = Rng::for_index(splitmix64(seed ^ kMedsSalt),
                                                 static_cast<std::uint64_t>(i));
                        record.med_s = sample_median(scenario, config.meds_samples, rng);
                    }
                    if (config.run_nopt) {
                        NOptConfig nopt = config.nopt;
                        nopt.search.seed =
                            splitmix64(splitmix64(seed ^ kNOptSalt) + static_cast<std::uint64_t>(i));
                        Plan plan;
                        if (config.timing_reps > 0) {
                            record.wall_nopt_s = timed(config.timing_reps,
                                                       [&] { plan = iterated_search(scenario, nopt); });
                        } else {
                            plan = iterated_search(scenario, nopt);
                        }
                        record.nopt = mission_times(scenario, plan).max_time;
                    }
                    if (model) {
                        nn::RolloutResult rollout_result;
                        auto run_neural = [&] {
                            rollout_result =
                                nn::rollout(scenario, *model, nn::DecodeMode::Greedy, nullptr);
                        };
                        if (config.timing_reps > 0) {
                            record.wall_neural_s = timed(config.timing_reps, run_neural);
                        } else {
                            run_neural();
                        }
                        record.neural = rollout_result.times.max_time;
                    }
                    seed_records[i] = std::move(record);
                }
            });
            cell_records.insert(cell_records.end(), seed_records.begin(), seed_records.end());
        }

        aggregate.instances = static_cast<long>(cell_records.size());
        aggregate.mean_opt_p = mean_of(cell_records, &EvalRecord::opt_p);
        aggregate.mean_med_p = mean_of(cell_records, &EvalRecord::med_p);
        aggregate.mean_med_s = mean_of(cell_records, &EvalRecord::med_s);
        aggregate.mean_nopt = mean_of(cell_records, &EvalRecord::nopt);
        aggregate.mean_neural = mean_of(cell_records, &EvalRecord::neural);
        if (aggregate.mean_neural && aggregate.mean_nopt && *aggregate.mean_nopt > 0.0) {
            aggregate.neural_gap_to_nopt_pct =
                (*aggregate.mean_neural / *aggregate.mean_nopt - 1.0) * 100.0;
        }
        aggregate.median_wall_nopt_s = median_of(cell_records, &EvalRecord::wall_nopt_s);
        aggregate.median_wall_neural_s = median_of(cell_records, &EvalRecord::wall_neural_s);

        result.aggregates.push_back(std::move(aggregate));
        result.records.insert(result.records.end(), cell_records.begin(), cell_records.end());
    }
    return result;
}

}  // namespace cmrp
