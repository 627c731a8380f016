#include "secagg/quant.hpp"

#include <cmath>

namespace secagg {

RealVec normalize(const RealVec& u) {
    const double n = u.norm();
    if (n == 0.0) throw QuantError("degenerate update");
    return u / n;
}

QuantizedUpdate quantize(const RealVec& unit, int q, rng::Stream& rs) {
    if (q < 1) throw QuantError("q must be >= 1");
    QuantizedUpdate out;
    out.q = q;
    out.coords.resize(static_cast<std::size_t>(unit.size()));
    for (Eigen::Index i = 0; i < unit.size(); ++i) {
        double x = unit[i];
        if (std::abs(x) > 1.0 + 1e-9) throw QuantError("out of range");
        x = std::clamp(x, -1.0, 1.0);
        const double scaled = static_cast<double>(q) * x;
        double lo = std::floor(scaled);
        const double frac = scaled - lo;
        std::int64_t v = static_cast<std::int64_t>(lo);
        if (rs.bernoulli(frac)) v += 1;
        if (v > q) v = q;
        if (v < -q) v = -q;
        out.coords[static_cast<std::size_t>(i)] = v;
    }
    return out;
}

std::vector<Fp> embed(const QuantizedUpdate& u, const Modulus& m) {
    std::vector<Fp> out;
    out.reserve(u.coords.size());
    for (std::int64_t c : u.coords) out.push_back(phi(m, c));
    return out;
}

QuantizedUpdate de_embed(const std::vector<Fp>& v, int q) {
    QuantizedUpdate out;
    out.q = q;
    out.coords.reserve(v.size());
    for (const Fp& e : v) {
        mpz_class x = phi_inv(e);
        if (!mpz_fits_slong_p(x.get_mpz_t())) throw QuantError("de-embedded value out of range");
        out.coords.push_back(mpz_get_si(x.get_mpz_t()));
    }
    return out;
}

double dequantize_ratio(const mpz_class& num, const mpz_class& den, int q) {
    if (mpz_sgn(den.get_mpz_t()) == 0) throw QuantError("zero denominator");
    mpq_class r(num, den);
    r.canonicalize();
    return r.get_d() / static_cast<double>(q);
}

mpz_class norm_sq(const QuantizedUpdate& u) {
    mpz_class s = 0;
    for (std::int64_t c : u.coords) {
        mpz_class cc(static_cast<long>(c));
        s += cc * cc;
    }
    return s;
}

bool norm_check_passes(const mpz_class& nsq, int q, std::int64_t eps_num, std::int64_t eps_den) {
    mpz_class q2 = mpz_class(q) * q;
    mpz_class diff = nsq - q2;
    mpz_class lhs = abs(diff) * static_cast<long>(eps_den);
    mpz_class rhs = q2 * static_cast<long>(eps_num);
    return lhs < rhs;
}

} // namespace secagg
