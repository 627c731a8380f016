#pragma once

#include <cstdint>
#include <vector>

#include "secagg/discriminator.hpp"
#include "secagg/field.hpp"
#include "secagg/quant.hpp"

namespace secagg::flsim {

RealVec fedavg(const std::vector<RealVec>& updates);

/// FLTrust: TS_i = ReLU(cos(theta_i)) between normalized updates and the
/// root update; zero trust mass yields the zero aggregate.
RealVec fltrust_relu(const std::vector<RealVec>& updates, const RealVec& u0);

/// Same with TS_i = h(cos(theta_i)); trust scores may be negative.
RealVec fltrust_poly_real(const std::vector<RealVec>& updates, const RealVec& u0,
                          const DiscriminatorPoly& h);

/// Exact-integer shadow of the shared evaluation (steps 3-5): applies the
/// norm band, evaluates the encoded discriminator on raw integer cosines and
/// returns the reduced per-coordinate fraction Sigma2_j / Sigma1. The secure
/// pipeline must decode to these exact rationals.
struct FixedpointResult {
    bool defined = false; // Sigma1 != 0 and at least one active client
    std::vector<Rational> ratios;
    std::vector<std::uint32_t> active;
};

FixedpointResult fltrust_poly_fixedpoint_oracle(const std::vector<QuantizedUpdate>& updates,
                                                const QuantizedUpdate& u0, const DiscriminatorPoly& h,
                                                std::int64_t eps_num, std::int64_t eps_den);

} // namespace secagg::flsim
