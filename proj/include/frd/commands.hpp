#pragma once

#include "frd/analysis.hpp"
#include "frd/config.hpp"
#include "frd/fluctuation.hpp"
#include "frd/report.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace frd {

struct RunOptions {
    bool require_cached = false;  // verify: never build a missing Poisson table
    bool inject_fault = false;    // verify: perturb one Gamma_n value beyond its range
    std::string export_what = "all";  // export: kernels, symbols or all
};

Engine make_engine(const RunConfig& cfg, bool require_cached = false);

std::vector<Check> verify_checks(Engine& engine, const RunConfig& cfg, bool inject_fault = false);
std::vector<RateReport> rate_reports(Engine& engine, const RunConfig& cfg);

struct LevyOutcome {
    LevyParams params;
    double decay_rate = 0.0;       // fitted c used for the cut-off
    double normalization = 0.0;    // quadrature of a^{-alpha/2} / (a + 1)
    double normalization_exact = 0.0;
    std::vector<RateReport> reports;
    LevyReconstruction reconstruction;
};
LevyOutcome levy_outcome(Engine& engine, const RunConfig& cfg);

// Each command writes under cfg.output_dir and returns the process exit status.
int cmd_decompose(const RunConfig& cfg, const RunOptions& opt, std::ostream& out);
int cmd_verify(const RunConfig& cfg, const RunOptions& opt, std::ostream& out);
int cmd_rates(const RunConfig& cfg, const RunOptions& opt, std::ostream& out);
int cmd_levy(const RunConfig& cfg, const RunOptions& opt, std::ostream& out);
int cmd_export(const RunConfig& cfg, const RunOptions& opt, std::ostream& out);

} // namespace frd
