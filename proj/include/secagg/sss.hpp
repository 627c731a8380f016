#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "secagg/field.hpp"
#include "secagg/rng.hpp"

namespace secagg {

/// Party index i in [1, n]; the share is the polynomial evaluation at x = i.
using ShareIndex = std::uint32_t;

struct ValueShare {
    ShareIndex index = 0;
    Fp value;
};

class SssError : public std::runtime_error {
public:
    explicit SssError(const std::string& what) : std::runtime_error(what) {}
};

/// (n, t) Shamir sharing: random degree-t polynomial f with f(0) = secret,
/// share i = f(i). Requires p > n.
std::vector<ValueShare> share(const Fp& secret, int n, int t, rng::Stream& rs);

/// Same, with the caller supplying the t random coefficients (tests, TTP).
std::vector<ValueShare> share_with_coeffs(const Fp& secret, int n, std::span<const Fp> coeffs);

/// Polynomial evaluation of secret||coeffs at a single point.
Fp share_at(const Fp& secret, std::span<const Fp> coeffs, ShareIndex index);

/// Lagrange interpolation at 0 from >= t+1 shares with distinct indices.
Fp reconstruct(std::span<const ValueShare> shares, int t);

/// Lagrange coefficients at 0 for the given evaluation points.
std::vector<Fp> lagrange_at_zero(const Modulus& m, std::span<const ShareIndex> points);

/// sum(coeffs[j] * shares[j]) + offset at a common index; a valid share of
/// the same combination of the secrets (public offset enters every index).
ValueShare lincomb(std::span<const ValueShare> shares, std::span<const Fp> coeffs, const Fp& offset);

} // namespace secagg
