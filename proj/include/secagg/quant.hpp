#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "secagg/field.hpp"
#include "secagg/rng.hpp"

namespace secagg {

using RealVec = Eigen::VectorXd;

/// Model update on the 2q+1-level integer grid; coordinates in [-q, q].
struct QuantizedUpdate {
    std::vector<std::int64_t> coords;
    int q = 0;
};

class QuantError : public std::runtime_error {
public:
    explicit QuantError(const std::string& what) : std::runtime_error(what) {}
};

/// u / ||u||_2. Zero input raises "degenerate update"; the protocol
/// substitutes the zero update and lets the norm check exclude it.
RealVec normalize(const RealVec& u);

/// Unbiased two-point stochastic rounding of q*x per coordinate.
/// Requires |x| <= 1 for every coordinate.
QuantizedUpdate quantize(const RealVec& unit, int q, rng::Stream& rs);

std::vector<Fp> embed(const QuantizedUpdate& u, const Modulus& m);
QuantizedUpdate de_embed(const std::vector<Fp>& v, int q);

/// (num/den)/q: undoes the quantizer scale left on the decoded quotient.
double dequantize_ratio(const mpz_class& num, const mpz_class& den, int q);

/// Exact integer squared norm of the quantized update.
mpz_class norm_sq(const QuantizedUpdate& u);

/// The norm validation band |norm_sq - q^2| < eps * q^2, evaluated exactly
/// with eps as the rational eps_num/eps_den.
bool norm_check_passes(const mpz_class& norm_sq, int q, std::int64_t eps_num, std::int64_t eps_den);

} // namespace secagg
