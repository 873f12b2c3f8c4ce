#pragma once

#include "frd/analysis.hpp"
#include "frd/config.hpp"

#include <string>
#include <vector>

namespace frd {

// One CSV line: a single (quantity, n, parameter, k) measurement together with its fit.
struct RateRow {
    std::string quantity;
    int n = 0;
    double a_or_alpha = 0.0;
    int k = 0;
    double norm_value = 0.0;
    double fitted_rate = 0.0;
    double expected_rate = 0.0;
    bool pass = false;

    bool operator==(const RateRow&) const = default;
};

std::vector<RateRow> rows_of(const RateReport& r);

// 17 significant digits; parses back to the identical doubles.
std::string format_double(double x);
std::string rates_csv(const std::vector<RateRow>& rows);
std::vector<RateRow> parse_rates_csv(const std::string& text);

std::string rates_json(const std::vector<RateReport>& reports, const RunConfig& cfg, const std::string& command);

// Outcome of a structural check of cmd_verify.
struct Check {
    std::string name;
    std::string scope;  // e.g. "n=2 a=1"
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string detail;
};

std::string checks_csv(const std::vector<Check>& checks);
std::string checks_json(const std::vector<Check>& checks, const RunConfig& cfg);

// Writes text to path, creating parent directories.
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

} // namespace frd
