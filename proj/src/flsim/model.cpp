#include "secagg/flsim/model.hpp"

#include <cmath>
#include <numeric>

namespace secagg::flsim {

namespace {

struct LogregView {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> W;
    Eigen::Map<const Eigen::VectorXd> b;
};

LogregView logreg_view(const Model& m) {
    const int L = m.spec.num_classes, f = m.spec.feature_dim;
    return {{m.w.data(), L, f}, {m.w.data() + L * f, L}};
}

struct MlpView {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> W1;
    Eigen::Map<const Eigen::VectorXd> b1;
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> W2;
    Eigen::Map<const Eigen::VectorXd> b2;
};

MlpView mlp_view(const Model& m) {
    const int h = m.spec.hidden, f = m.spec.feature_dim, L = m.spec.num_classes;
    const double* p = m.w.data();
    return {{p, h, f}, {p + h * f, h}, {p + h * f + h, L, h}, {p + h * f + h + L * h, L}};
}

// Row-wise softmax in place, returns mean cross-entropy against y.
double softmax_xent(Eigen::MatrixXd& logits, const Eigen::VectorXi& y) {
    double loss = 0.0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        double mx = logits.row(i).maxCoeff();
        Eigen::ArrayXd ex = (logits.row(i).array() - mx).exp();
        double Z = ex.sum();
        loss -= std::log(ex[y[i]] / Z);
        logits.row(i) = (ex / Z).matrix();
    }
    return loss / static_cast<double>(logits.rows());
}

} // namespace

Model init_model(const ModelSpec& spec, rng::Stream& rs) {
    Model m;
    m.spec = spec;
    m.w = RealVec::Zero(spec.param_dim());
    if (spec.arch == Arch::Mlp) {
        // Small uniform init for the hidden layer; output layer starts at zero.
        const int h = spec.hidden, f = spec.feature_dim;
        const double scale = 1.0 / std::sqrt(static_cast<double>(f));
        for (int i = 0; i < h * f; ++i) m.w[i] = (2.0 * rs.next_unit() - 1.0) * scale;
    }
    return m;
}

double loss_and_grad(const Model& m, const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                     RealVec* grad) {
    const Eigen::Index N = X.rows();
    const int L = m.spec.num_classes;
    if (m.spec.arch == Arch::Logreg) {
        LogregView v = logreg_view(m);
        Eigen::MatrixXd logits = X * v.W.transpose();
        logits.rowwise() += v.b.transpose();
        double loss = softmax_xent(logits, y); // logits now holds probabilities
        if (grad) {
            for (Eigen::Index i = 0; i < N; ++i) logits(i, y[i]) -= 1.0;
            logits /= static_cast<double>(N);
            Eigen::MatrixXd dW = logits.transpose() * X; // L x f
            Eigen::VectorXd db = logits.colwise().sum();
            grad->resize(m.w.size());
            const int f = m.spec.feature_dim;
            Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                grad->data(), L, f) = dW;
            Eigen::Map<Eigen::VectorXd>(grad->data() + L * f, L) = db;
        }
        return loss;
    }
    MlpView v = mlp_view(m);
    const int h = m.spec.hidden, f = m.spec.feature_dim;
    Eigen::MatrixXd z1 = X * v.W1.transpose();
    z1.rowwise() += v.b1.transpose();
    Eigen::MatrixXd a1 = z1.cwiseMax(0.0);
    Eigen::MatrixXd logits = a1 * v.W2.transpose();
    logits.rowwise() += v.b2.transpose();
    double loss = softmax_xent(logits, y);
    if (grad) {
        for (Eigen::Index i = 0; i < N; ++i) logits(i, y[i]) -= 1.0;
        logits /= static_cast<double>(N);
        Eigen::MatrixXd dW2 = logits.transpose() * a1; // L x h
        Eigen::VectorXd db2 = logits.colwise().sum();
        Eigen::MatrixXd da1 = logits * v.W2; // N x h
        Eigen::MatrixXd dz1 = (z1.array() > 0.0).select(da1, 0.0);
        Eigen::MatrixXd dW1 = dz1.transpose() * X; // h x f
        Eigen::VectorXd db1 = dz1.colwise().sum();
        grad->resize(m.w.size());
        double* p = grad->data();
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(p, h, f) =
            dW1;
        Eigen::Map<Eigen::VectorXd>(p + h * f, h) = db1;
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            p + h * f + h, L, h) = dW2;
        Eigen::Map<Eigen::VectorXd>(p + h * f + h + L * h, L) = db2;
    }
    return loss;
}

Eigen::VectorXi predict(const Model& m, const Eigen::MatrixXd& X) {
    Eigen::MatrixXd logits;
    if (m.spec.arch == Arch::Logreg) {
        LogregView v = logreg_view(m);
        logits = X * v.W.transpose();
        logits.rowwise() += v.b.transpose();
    } else {
        MlpView v = mlp_view(m);
        Eigen::MatrixXd a1 = (X * v.W1.transpose()).rowwise() + v.b1.transpose();
        a1 = a1.cwiseMax(0.0);
        logits = a1 * v.W2.transpose();
        logits.rowwise() += v.b2.transpose();
    }
    Eigen::VectorXi out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        Eigen::Index best;
        logits.row(i).maxCoeff(&best);
        out[i] = static_cast<int>(best);
    }
    return out;
}

double accuracy(const Model& m, const Dataset& d) {
    if (d.size() == 0) return 0.0;
    Eigen::VectorXi pred = predict(m, d.features);
    int hit = 0;
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (pred[i] == d.labels[i]) ++hit;
    return static_cast<double>(hit) / static_cast<double>(d.size());
}

RealVec local_train(const Model& m, const Dataset& d, double eta_local, int local_iters, int batch,
                    rng::Stream& rs) {
    Model cur = m;
    RealVec grad;
    for (int c = 0; c < local_iters; ++c) {
        Eigen::MatrixXd X;
        Eigen::VectorXi y;
        if (d.size() <= batch) {
            X = d.features;
            y = d.labels;
        } else {
            X.resize(batch, d.dim());
            y.resize(batch);
            for (int b = 0; b < batch; ++b) {
                int row = static_cast<int>(rs.next_below(static_cast<std::uint64_t>(d.size())));
                X.row(b) = d.features.row(row);
                y[b] = d.labels[row];
            }
        }
        loss_and_grad(cur, X, y, &grad);
        cur.w -= eta_local * grad;
    }
    return cur.w - m.w;
}

} // namespace secagg::flsim
