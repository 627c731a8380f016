#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "secagg/config.hpp"

namespace secagg {

struct CommReport {
    std::vector<int> sweep_n;
    std::vector<std::uint64_t> client_bytes;    // mean sent+received per client
    std::vector<std::uint64_t> federator_bytes; // sent+received
    double client_slope = 0.0;                  // log-log fit vs n
    double federator_slope = 0.0;
};

/// One protocol round per sweep entry on random unit updates; the modulus is
/// pinned to the largest n so the element width is constant across cells.
CommReport comm_report(const ExperimentConfig& base, const std::vector<int>& sweep_n, int d);

void write_comm_report_csv(const CommReport& r, const std::string& path);

struct CompareCell {
    std::string scenario;   // config file stem (attack scenario)
    std::string aggregator;
    double acc_mean = 0.0;
    double acc_std = 0.0;
    double asr_mean = 0.0;
    double asr_std = 0.0;
};

/// Runs every (scenario x aggregator) cell for `repeats` seeds; rows are
/// attacks, columns aggregators.
std::vector<CompareCell> compare_runs(const std::vector<std::pair<std::string, ExperimentConfig>>& scenarios,
                                      const std::vector<std::string>& aggregators, int repeats);

void write_compare_csv(const std::vector<CompareCell>& cells, const std::string& path);
std::string format_compare_table(const std::vector<CompareCell>& cells);

} // namespace secagg
