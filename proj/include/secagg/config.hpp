#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "secagg/adversary.hpp"

namespace secagg {

struct DatasetConfig {
    std::string kind = "synthetic"; // synthetic | idx
    int features = 20;
    int classes = 10;
    int train_samples = 2000;
    int test_samples = 500;
    double noise = 0.35;
    std::string dir; // IDX directory; SECAGG_DATA_DIR overrides
};

struct ExperimentConfig {
    int n = 10;
    int t = 2;
    int e = 0;
    int s = 0;
    int q = 128;
    double epsilon = 0.02;
    int coeff_scale = 0; // 0 -> defaults to q
    double gamma = 0.1;
    double eta = 0.5;
    double eta_local = 0.5;
    int local_iters = 1;
    int batch = 64;
    int iterations = 10;
    int root_size = 100;
    std::string aggregator = "lobyitfl_secure";
    std::string model = "logreg"; // logreg | mlp
    int hidden = 128;
    DatasetConfig dataset;
    AttackConfig attack;
    std::vector<std::uint32_t> byzantine; // defaults to the last e ids
    std::vector<DropoutEvent> dropouts;
    std::vector<double> h_coeffs; // optional discriminator override, ascending degree
    std::uint64_t seed = 1;
    std::string out_dir;
    bool store_transcripts = false;

    void validate() const; // throws std::invalid_argument naming the field
    std::vector<std::uint32_t> byzantine_ids() const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_json(const std::string& text);

} // namespace secagg
