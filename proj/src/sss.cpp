#include "secagg/sss.hpp"

#include <set>

namespace secagg {

Fp share_at(const Fp& secret, std::span<const Fp> coeffs, ShareIndex index) {
    const Modulus& m = secret.modulus();
    Fp x(m, static_cast<std::uint64_t>(index));
    Fp acc = secret;
    Fp xp = Fp::one(m);
    for (const Fp& c : coeffs) {
        xp = xp * x;
        acc = acc + c * xp;
    }
    return acc;
}

std::vector<ValueShare> share_with_coeffs(const Fp& secret, int n, std::span<const Fp> coeffs) {
    const Modulus& m = secret.modulus();
    if (mpz_class(n) >= m.p()) throw SssError("not enough evaluation points");
    std::vector<ValueShare> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i)
        out.push_back({static_cast<ShareIndex>(i), share_at(secret, coeffs, static_cast<ShareIndex>(i))});
    return out;
}

std::vector<ValueShare> share(const Fp& secret, int n, int t, rng::Stream& rs) {
    if (t < 0 || n <= t) throw SssError("need n > t >= 0");
    const Modulus& m = secret.modulus();
    std::vector<Fp> coeffs;
    coeffs.reserve(static_cast<std::size_t>(t));
    for (int j = 0; j < t; ++j) coeffs.push_back(Fp::uniform(m, rs));
    return share_with_coeffs(secret, n, coeffs);
}

std::vector<Fp> lagrange_at_zero(const Modulus& m, std::span<const ShareIndex> points) {
    std::vector<Fp> out;
    out.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        Fp num = Fp::one(m);
        Fp den = Fp::one(m);
        Fp xi(m, static_cast<std::uint64_t>(points[i]));
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (j == i) continue;
            Fp xj(m, static_cast<std::uint64_t>(points[j]));
            num = num * xj;
            den = den * (xj - xi);
        }
        out.push_back(num * inverse(den));
    }
    return out;
}

Fp reconstruct(std::span<const ValueShare> shares, int t) {
    if (shares.size() < static_cast<std::size_t>(t) + 1) throw SssError("insufficient shares");
    std::set<ShareIndex> seen;
    std::vector<ShareIndex> points;
    points.reserve(shares.size());
    for (const ValueShare& s : shares) {
        if (!seen.insert(s.index).second) throw SssError("duplicate share index");
        points.push_back(s.index);
    }
    const Modulus& m = shares[0].value.modulus();
    std::vector<Fp> coeffs = lagrange_at_zero(m, points);
    Fp acc = Fp::zero(m);
    for (std::size_t i = 0; i < shares.size(); ++i) acc = acc + coeffs[i] * shares[i].value;
    return acc;
}

ValueShare lincomb(std::span<const ValueShare> shares, std::span<const Fp> coeffs, const Fp& offset) {
    if (shares.size() != coeffs.size()) throw SssError("coefficient count mismatch");
    Fp acc = offset;
    ShareIndex idx = 0;
    for (std::size_t i = 0; i < shares.size(); ++i) {
        if (i == 0) {
            idx = shares[i].index;
        } else if (shares[i].index != idx) {
            throw SssError("share index mismatch");
        }
        acc = acc + coeffs[i] * shares[i].value;
    }
    if (shares.empty()) idx = 0; // share of a public constant is index-free
    return {idx, acc};
}

} // namespace secagg
