#pragma once

#include <Eigen/Dense>

#include "secagg/flsim/dataset.hpp"
#include "secagg/quant.hpp"
#include "secagg/rng.hpp"

namespace secagg::flsim {

enum class Arch { Logreg, Mlp };

struct ModelSpec {
    Arch arch = Arch::Logreg;
    int feature_dim = 0;
    int num_classes = 0;
    int hidden = 128;

    int param_dim() const {
        if (arch == Arch::Logreg) return num_classes * (feature_dim + 1);
        return hidden * (feature_dim + 1) + num_classes * (hidden + 1);
    }
};

/// Flattened parameter vector; layout is row-major weights then bias per layer.
struct Model {
    ModelSpec spec;
    RealVec w;
};

Model init_model(const ModelSpec& spec, rng::Stream& rs);

/// Softmax cross-entropy over the batch; writes the analytic gradient when
/// grad is non-null. ReLU hidden activation for the MLP.
double loss_and_grad(const Model& m, const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                     RealVec* grad);

Eigen::VectorXi predict(const Model& m, const Eigen::MatrixXd& X);
double accuracy(const Model& m, const Dataset& d);

/// One client's local training pass: C minibatch SGD steps from the given
/// model; returns the parameter delta w_after - w_before.
RealVec local_train(const Model& m, const Dataset& d, double eta_local, int local_iters,
                    int batch, rng::Stream& rs);

} // namespace secagg::flsim
