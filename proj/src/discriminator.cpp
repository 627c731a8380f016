#include "secagg/discriminator.hpp"

#include <cmath>

namespace secagg {

std::vector<mpz_class> DiscriminatorPoly::encoded() const {
    std::vector<mpz_class> out;
    out.reserve(coeffs.size());
    for (double h : coeffs) {
        const double scaled = h * static_cast<double>(coeff_scale);
        out.emplace_back(static_cast<long>(std::llround(scaled)));
    }
    return out;
}

DiscriminatorPoly default_h(int coeff_scale) {
    return {{0.01363545, 0.1860353, 0.56578977, 0.46897526}, coeff_scale};
}

double eval_real(const DiscriminatorPoly& h, double x) {
    double acc = 0.0;
    for (auto it = h.coeffs.rbegin(); it != h.coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

double eval_real_derivative(const DiscriminatorPoly& h, double x) {
    double acc = 0.0;
    for (int j = h.degree(); j >= 1; --j) acc = acc * x + static_cast<double>(j) * h.coeffs[j];
    return acc;
}

mpz_class TsSchedule::ts_scale() const {
    mpz_class s;
    mpz_ui_pow_ui(s.get_mpz_t(), static_cast<unsigned long>(q), static_cast<unsigned long>(2 * k));
    return s * coeff_scale;
}

TsSchedule ts_program(const DiscriminatorPoly& h, int q, std::vector<std::uint32_t> active_targets) {
    if (h.degree() < 1) throw FieldError("discriminator degree must be >= 1");
    if (h.coeff_scale < 1) throw FieldError("coefficient scale must be >= 1");
    TsSchedule plan;
    plan.k = h.degree();
    plan.q = q;
    plan.coeff_scale = h.coeff_scale;
    plan.targets = std::move(active_targets);
    std::vector<mpz_class> enc = h.encoded();
    plan.combine_coeffs.reserve(enc.size());
    for (int j = 0; j <= plan.k; ++j) {
        mpz_class qpow;
        mpz_ui_pow_ui(qpow.get_mpz_t(), static_cast<unsigned long>(q),
                      static_cast<unsigned long>(2 * (plan.k - j)));
        plan.combine_coeffs.push_back(enc[static_cast<std::size_t>(j)] * qpow);
    }
    return plan;
}

mpz_class ts_shadow(const TsSchedule& plan, const mpz_class& cosine) {
    mpz_class acc = 0;
    mpz_class cpow = 1;
    for (int j = 0; j <= plan.k; ++j) {
        acc += plan.combine_coeffs[static_cast<std::size_t>(j)] * cpow;
        cpow *= cosine;
    }
    return acc;
}

} // namespace secagg
