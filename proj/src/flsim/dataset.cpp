#include "secagg/flsim/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace secagg::flsim {

Dataset synthetic_dataset(int samples, int feature_dim, int num_classes, double noise,
                          rng::Stream& rs) {
    Dataset d;
    d.num_classes = num_classes;
    d.features.resize(samples, feature_dim);
    d.labels.resize(samples);

    // Class means on the unit sphere, fixed by the stream.
    Eigen::MatrixXd means(num_classes, feature_dim);
    rng::Stream ms = rs.fork({0x6d65616eULL});
    for (int c = 0; c < num_classes; ++c) {
        for (int f = 0; f < feature_dim; ++f) means(c, f) = 2.0 * ms.next_unit() - 1.0;
        means.row(c).normalize();
    }
    for (int i = 0; i < samples; ++i) {
        int label = static_cast<int>(rs.next_below(static_cast<std::uint64_t>(num_classes)));
        d.labels[i] = label;
        for (int f = 0; f < feature_dim; ++f) {
            // Box-Muller
            double u1 = rs.next_unit();
            double u2 = rs.next_unit();
            if (u1 < 1e-300) u1 = 1e-300;
            double gauss = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
            d.features(i, f) = means(label, f) + noise * gauss;
        }
    }
    return d;
}

Dataset subset(const Dataset& d, const std::vector<int>& rows) {
    Dataset out;
    out.num_classes = d.num_classes;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), d.features.cols());
    out.labels.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) = d.features.row(rows[i]);
        out.labels[static_cast<Eigen::Index>(i)] = d.labels[rows[i]];
    }
    return out;
}

Dataset sample_dataset(const Dataset& d, int count, rng::Stream& rs) {
    std::vector<int> idx(static_cast<std::size_t>(d.size()));
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = idx.size(); i > 1; --i) {
        std::size_t j = rs.next_below(i);
        std::swap(idx[i - 1], idx[j]);
    }
    idx.resize(static_cast<std::size_t>(std::min<Eigen::Index>(count, d.size())));
    return subset(d, idx);
}

std::vector<Dataset> partition(const Dataset& d, int n_clients, double gamma, rng::Stream& rs) {
    const int groups = d.num_classes;
    std::vector<std::vector<int>> group_rows(static_cast<std::size_t>(groups));
    for (int i = 0; i < d.size(); ++i) {
        int label = d.labels[i];
        int grp;
        if (rs.next_unit() < gamma) {
            grp = label;
        } else {
            grp = static_cast<int>(rs.next_below(static_cast<std::uint64_t>(groups - 1)));
            if (grp >= label) ++grp;
        }
        group_rows[static_cast<std::size_t>(grp)].push_back(i);
    }
    // Clients round-robin over groups; group data dealt uniformly within.
    std::vector<std::vector<int>> client_rows(static_cast<std::size_t>(n_clients));
    for (int grp = 0; grp < groups; ++grp) {
        std::vector<int> members;
        for (int c = grp; c < n_clients; c += groups) members.push_back(c);
        if (members.empty()) members.push_back(grp % n_clients);
        auto& rows = group_rows[static_cast<std::size_t>(grp)];
        for (std::size_t i = rows.size(); i > 1; --i) {
            std::size_t j = rs.next_below(i);
            std::swap(rows[i - 1], rows[j]);
        }
        for (std::size_t i = 0; i < rows.size(); ++i)
            client_rows[static_cast<std::size_t>(members[i % members.size()])].push_back(rows[i]);
    }
    std::vector<Dataset> out;
    out.reserve(static_cast<std::size_t>(n_clients));
    for (int c = 0; c < n_clients; ++c)
        out.push_back(subset(d, client_rows[static_cast<std::size_t>(c)]));
    return out;
}

} // namespace secagg::flsim
