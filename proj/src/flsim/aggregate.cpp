#include "secagg/flsim/aggregate.hpp"

#include <cmath>

namespace secagg::flsim {

RealVec fedavg(const std::vector<RealVec>& updates) {
    if (updates.empty()) throw std::runtime_error("fedavg: no updates");
    RealVec acc = RealVec::Zero(updates[0].size());
    for (const RealVec& u : updates) acc += u;
    return acc / static_cast<double>(updates.size());
}

namespace {

RealVec fltrust_weighted(const std::vector<RealVec>& updates, const RealVec& u0,
                         const std::vector<double>& ts) {
    const double norm0 = u0.norm();
    double mass = 0.0;
    RealVec acc = RealVec::Zero(u0.size());
    for (std::size_t i = 0; i < updates.size(); ++i) {
        const double ni = updates[i].norm();
        if (ni == 0.0) continue;
        acc += ts[i] * (updates[i] / ni);
        mass += ts[i];
    }
    if (mass == 0.0) return RealVec::Zero(u0.size()); // round carries no trust
    return norm0 * acc / mass;
}

} // namespace

RealVec fltrust_relu(const std::vector<RealVec>& updates, const RealVec& u0) {
    const double norm0 = u0.norm();
    if (norm0 == 0.0) return RealVec::Zero(u0.size());
    std::vector<double> ts(updates.size(), 0.0);
    for (std::size_t i = 0; i < updates.size(); ++i) {
        const double ni = updates[i].norm();
        if (ni == 0.0) continue;
        ts[i] = std::max(0.0, updates[i].dot(u0) / (ni * norm0));
    }
    return fltrust_weighted(updates, u0, ts);
}

RealVec fltrust_poly_real(const std::vector<RealVec>& updates, const RealVec& u0,
                          const DiscriminatorPoly& h) {
    const double norm0 = u0.norm();
    if (norm0 == 0.0) return RealVec::Zero(u0.size());
    std::vector<double> ts(updates.size(), 0.0);
    for (std::size_t i = 0; i < updates.size(); ++i) {
        const double ni = updates[i].norm();
        if (ni == 0.0) continue;
        ts[i] = eval_real(h, updates[i].dot(u0) / (ni * norm0));
    }
    return fltrust_weighted(updates, u0, ts);
}

FixedpointResult fltrust_poly_fixedpoint_oracle(const std::vector<QuantizedUpdate>& updates,
                                                const QuantizedUpdate& u0, const DiscriminatorPoly& h,
                                                std::int64_t eps_num, std::int64_t eps_den) {
    FixedpointResult out;
    const int q = u0.q;
    const int k = h.degree();
    const std::size_t d = u0.coords.size();
    std::vector<mpz_class> enc = h.encoded();

    // q^{2(k-j)} scale factors.
    std::vector<mpz_class> scale(static_cast<std::size_t>(k) + 1);
    for (int j = 0; j <= k; ++j)
        mpz_ui_pow_ui(scale[static_cast<std::size_t>(j)].get_mpz_t(),
                      static_cast<unsigned long>(q), static_cast<unsigned long>(2 * (k - j)));

    mpz_class sigma1 = 0;
    std::vector<mpz_class> sigma2(d, mpz_class(0));
    for (std::size_t i = 0; i < updates.size(); ++i) {
        const QuantizedUpdate& u = updates[i];
        if (!norm_check_passes(norm_sq(u), q, eps_num, eps_den)) continue;
        out.active.push_back(static_cast<std::uint32_t>(i));
        mpz_class cosine = 0;
        for (std::size_t c = 0; c < d; ++c)
            cosine += mpz_class(static_cast<long>(u0.coords[c])) *
                      mpz_class(static_cast<long>(u.coords[c]));
        mpz_class ts = 0;
        mpz_class cpow = 1;
        for (int j = 0; j <= k; ++j) {
            ts += enc[static_cast<std::size_t>(j)] * scale[static_cast<std::size_t>(j)] * cpow;
            cpow *= cosine;
        }
        sigma1 += ts;
        for (std::size_t c = 0; c < d; ++c)
            sigma2[c] += ts * mpz_class(static_cast<long>(u.coords[c]));
    }
    if (out.active.empty() || sigma1 == 0) return out;
    out.defined = true;
    out.ratios.reserve(d);
    for (std::size_t c = 0; c < d; ++c) {
        mpq_class r(sigma2[c], sigma1);
        r.canonicalize();
        out.ratios.push_back({r.get_num(), r.get_den()});
    }
    return out;
}

} // namespace secagg::flsim
