#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmrp/counting.hpp"
#include "cmrp/generator.hpp"
#include "cmrp/local_search.hpp"

namespace cmrp {

// (mt_model - mt_benchmark) / (mt_medp - mt_benchmark): 0 = matches the
// benchmark, 1 = matches the median random plan. A nearly-degenerate
// denominator flags the record instead of producing garbage; flagged records
// stay out of the aggregates.
struct NormalizedTime {
    double value = 0.0;
    bool degenerate = false;
};

NormalizedTime normalized_mission_time(double mt_model, double mt_benchmark, double mt_medp);

// Fraction of values strictly below each threshold; monotone in the threshold.
std::vector<std::pair<double, double>> cumulative_curve(const std::vector<double>& values,
                                                        const std::vector<double>& thresholds);

std::map<double, double> threshold_proportions(const std::vector<double>& values,
                                               const std::vector<double>& levels = {0.01, 0.1});

// rt_model / rt_benchmark * 100.
double normalized_runtime_percent(double rt_model, double rt_benchmark);

// The five progressively harder problem types: plain min-max routing, then
// per-agent start locations, then task time costs, then both, then the full
// problem with task splitting.
enum class ProblemType { Basic, Starts, Times, StartsTimes, Full };

const std::vector<std::pair<std::string, ProblemType>>& problem_type_ladder();
ProblemType problem_type_from_name(const std::string& name);

// Applies a problem-type preset to a generator configuration (start
// placement, time-cost range, discretization).
GeneratorConfig apply_problem_type(GeneratorConfig config, ProblemType type);

struct Cell {
    int n = 4;
    int m = 3;
    int delta = 1;

    std::string label() const {
        return "n" + std::to_string(n) + "_m" + std::to_string(m) + "_d" + std::to_string(delta);
    }
};

struct SweepConfig {
    std::vector<Cell> cells;
    int instances_per_cell = 10000;
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    GeneratorConfig base_generator;  // domain, time range, speed; sizes come from the cell
    ProblemType problem_type = ProblemType::Full;

    bool run_optp = true;  // only where the population fits under the cap
    BigInt enumerate_cap = 10'000'000;
    bool run_meds = true;
    int meds_samples = 101;
    bool run_nopt = true;
    NOptConfig nopt;
    std::string model_path;  // empty = no neural column

    int timing_reps = 0;  // 0 = no timing; otherwise median of reps after one warmup
    int threads = 1;
};

struct EvalRecord {
    long instance_id = 0;
    int n = 0, m = 0, delta = 0;
    std::uint64_t seed = 0;
    std::optional<double> opt_p, med_p, med_s, nopt, neural;
    std::optional<double> wall_nopt_s, wall_neural_s;
};

struct CellAggregate {
    Cell cell;
    long instances = 0;
    std::optional<double> mean_opt_p, mean_med_p, mean_med_s, mean_nopt, mean_neural;
    std::optional<double> neural_gap_to_nopt_pct;  // (mean_neural/mean_nopt - 1) * 100
    std::optional<double> median_wall_nopt_s, median_wall_neural_s;
    std::string skip_reason;  // non-empty = this cell could not run as requested
};

struct SweepResult {
    std::vector<EvalRecord> records;
    std::vector<CellAggregate> aggregates;

    bool complete() const;
    std::string records_csv() const;     // versioned; wall_* columns carry timing
    std::string aggregates_csv() const;
    std::string aggregates_json() const;
};

// Evaluates every (cell, seed, instance) against the configured solvers.
// Deterministic given the seeds, timing columns aside. Records are ordered by
// (cell, seed, instance id).
SweepResult run_sweep(const SweepConfig& config);

SweepConfig sweep_config_from_json_text(const std::string& json_text);
SweepConfig load_sweep_config(const std::string& path);

}  // namespace cmrp
