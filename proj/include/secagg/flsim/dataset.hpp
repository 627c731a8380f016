#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "secagg/rng.hpp"

namespace secagg::flsim {

struct Dataset {
    Eigen::MatrixXd features; // samples x feature dim
    Eigen::VectorXi labels;
    int num_classes = 0;

    Eigen::Index size() const { return features.rows(); }
    Eigen::Index dim() const { return features.cols(); }
};

/// Gaussian mixture with one spherical cluster per class; quick stand-in for
/// image data in CI runs.
Dataset synthetic_dataset(int samples, int feature_dim, int num_classes, double noise,
                          rng::Stream& rs);

Dataset subset(const Dataset& d, const std::vector<int>& rows);

/// Uniform sample without replacement (root dataset, desk-scale subsets).
Dataset sample_dataset(const Dataset& d, int count, rng::Stream& rs);

/// Group-based label partition: a sample with label j lands in group j with
/// probability gamma, otherwise uniformly in one of the other groups; clients
/// map round-robin onto groups and split group data evenly.
std::vector<Dataset> partition(const Dataset& d, int n_clients, double gamma, rng::Stream& rs);

/// IDX-format loader (big-endian magic 0x803 images / 0x801 labels); images
/// scaled to [0, 1].
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Looks for a train/test IDX pair under dir using the standard file names.
struct TrainTest {
    Dataset train;
    Dataset test;
};
TrainTest load_idx_dir(const std::string& dir, int train_limit, int test_limit, rng::Stream& rs);

} // namespace secagg::flsim
