#pragma once

#include <cstdint>
#include <string>

#include "cmrp/plan.hpp"
#include "cmrp/scenario.hpp"

namespace cmrp {

// Adapter to an external LKH-3 binary for the near-optimal benchmark. The
// binary path comes from config.binary or the CMRP_LKH3_BIN environment
// variable. Solver parameters are passed through untouched; the defaults below
// are the adapter's, not claims about any particular benchmark setup.
struct LkhConfig {
    std::string binary;
    int runs = 1;
    int max_trials = 0;  // 0 = solver default
    std::uint64_t seed = 1;
    double scale = 1e4;  // cost-to-integer multiplier for the explicit matrix
    std::string work_dir;  // empty = unique directory under the system temp path
    bool keep_files = false;
};

// Integer cost written for forbidden (infinite) edges. Far above any feasible
// route total at the default scale, far below integer overflow for full tours.
inline constexpr long long kLkhExcludedEdge = 10'000'000;

// Writes the asymmetric full-matrix problem file and the min-max
// multi-salesman parameter file.
void lkh3_export(const Scenario& scenario, const std::string& problem_path,
                 const std::string& param_path, const std::string& tour_path,
                 const LkhConfig& config = {});

// Writes a solution in the per-route layout the external solver emits; used
// for round-trip tests of the parser.
void write_tour_file(const Scenario& scenario, const Plan& plan, const std::string& path,
                     double scale = 1e4);

// Parses a solution file back into a Plan. Accepts both per-route lines and a
// single giant-tour section; fails with the offending line on anything
// malformed or infeasible.
Plan parse_tour_file(const Scenario& scenario, const std::string& path);

// Export, run the external binary, parse. Throws std::runtime_error
// "external solver unavailable" when no binary is configured.
Plan lkh3_solve(const Scenario& scenario, const LkhConfig& config = {});

}  // namespace cmrp
