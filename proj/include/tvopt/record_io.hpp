#pragma once

// Run outputs: a flat CSV per trajectory, a JSON report with verdicts and
// summary metrics, and a manifest tying both to the exact (config, seed) pair
// that reproduces them.

#include <cstdint>
#include <string>
#include <vector>

#include "tvopt/analysis.hpp"
#include "tvopt/problems.hpp"
#include "tvopt/running.hpp"

namespace tvopt {

inline constexpr const char* kToolVersion = "0.1.0";

// Fixed column order:
// k, t_k, x_0..x_{n-1}, t_residual, g_residual, tracking_error, objective_gap,
// bound_tracking, bound_fpr_avg
// One row per k = 1..T+1; report == nullptr (aborted run) zeroes the derived
// columns and writes however many iterates exist.
void write_record_csv(const std::string& path, const RunRecord& record, const BoundReport* report,
                      double h);

struct CsvData {
    std::vector<long> k;
    std::vector<double> t_k;
    std::vector<Vec> iterates;
    std::vector<double> t_residual, g_residual, tracking_error, objective_gap, bound_tracking,
        bound_fpr_avg;
};

CsvData read_record_csv(const std::string& path);

std::string report_json_string(const RunRecord& record, const BoundReport& report,
                               const ProblemStream& stream);
void write_report_json(const std::string& path, const RunRecord& record, const BoundReport& report,
                       const ProblemStream& stream);

std::string sha256_hex(const std::string& data);

void write_manifest(const std::string& path, const std::string& config_text, std::uint64_t seed,
                    const std::string& scenario, const std::vector<std::string>& outputs,
                    const std::string& error = "");

}  // namespace tvopt
