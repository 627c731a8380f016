#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <vector>

#include "secagg/field.hpp"

namespace secagg {

/// Trust-score polynomial h(x) = h_0 + h_1 x + ... + h_k x^k together with
/// its fixed-point encoding at coefficient scale q_c.
struct DiscriminatorPoly {
    std::vector<double> coeffs; // h_0 .. h_k
    int coeff_scale = 0;        // q_c

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }

    /// round(h_j * q_c)
    std::vector<mpz_class> encoded() const;
};

/// The published degree-3 polynomial that mimics ReLU: small near-zero values
/// on the negative tail, conservative attenuation of uncertain updates.
DiscriminatorPoly default_h(int coeff_scale);

double eval_real(const DiscriminatorPoly& h, double x);
double eval_real_derivative(const DiscriminatorPoly& h, double x);

/// The per-round shared evaluation plan for trust scores: one public-dot
/// cosine per target, k-1 scalar Beaver multiplications for the power chain,
/// a public linear combination with power-matching q^{2(k-j)} factors, and
/// one scalar-vector multiplication per target.
struct TsSchedule {
    int k = 0;
    int q = 0;
    int coeff_scale = 0;
    std::vector<std::uint32_t> targets;
    std::vector<mpz_class> combine_coeffs; // encoded h_j * q^{2(k-j)}, j = 0..k

    std::size_t scheduled_scalar_muls() const {
        return static_cast<std::size_t>(k - 1) * targets.size();
    }
    std::size_t scheduled_scalar_vec_muls() const { return targets.size(); }

    /// Common scale q_c * q^{2k} of every trust score the plan emits.
    mpz_class ts_scale() const;
};

TsSchedule ts_program(const DiscriminatorPoly& h, int q, std::vector<std::uint32_t> active_targets);

/// Plain-integer shadow of the shared program on an exact cosine value;
/// ground truth for fixed-point fidelity checks.
mpz_class ts_shadow(const TsSchedule& plan, const mpz_class& cosine);

} // namespace secagg
