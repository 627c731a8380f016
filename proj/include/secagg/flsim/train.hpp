#pragma once

#include <optional>
#include <string>
#include <vector>

#include "secagg/config.hpp"
#include "secagg/flsim/aggregate.hpp"
#include "secagg/flsim/dataset.hpp"
#include "secagg/flsim/model.hpp"
#include "secagg/protocol.hpp"

namespace secagg::flsim {

struct RoundMetrics {
    int iteration = 0;
    double loss = 0.0;
    double test_accuracy = 0.0;
    double asr = 0.0;
    std::uint64_t client_bytes_avg = 0;
    std::uint64_t federator_bytes = 0;
    bool aborted = false;
    int excluded_total = 0;
};

struct TrainingResult {
    std::vector<RoundMetrics> rounds;
    double final_accuracy = 0.0;
    double final_asr = 0.0;
    int aborted_rounds = 0;
    Model model;
    /// Secure runs only: per-round decoded ratios for oracle comparisons.
    std::vector<std::vector<Rational>> decoded_ratios;
};

/// Full multi-iteration loop with the configured aggregator, attack, and
/// dropout schedule. Writes metrics.csv / summary.json (and transcripts when
/// enabled) under out_dir when set.
TrainingResult run_training(const ExperimentConfig& cfg);

/// Resolves the dataset: synthetic generation or IDX load (dataset.dir,
/// overridable by SECAGG_DATA_DIR).
TrainTest resolve_dataset(const ExperimentConfig& cfg, rng::Stream& rs);

} // namespace secagg::flsim
