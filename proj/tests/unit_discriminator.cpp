#include <doctest.h>

#include "secagg/discriminator.hpp"

#include <cmath>

using namespace secagg;

TEST_CASE("published coefficients and evaluations") {
    DiscriminatorPoly h = default_h(1024);
    CHECK(h.degree() == 3);
    CHECK(eval_real(h, 0.0) == doctest::Approx(0.01363545).epsilon(1e-12));
    // Sum of the four printed coefficients.
    CHECK(eval_real(h, 1.0) == doctest::Approx(1.23443578).epsilon(1e-12));
    // Alternating-sign sum.
    CHECK(eval_real(h, -1.0) == doctest::Approx(-0.07558534).epsilon(1e-12));
    // Small magnitude on the left tail.
    CHECK(std::abs(eval_real(h, -0.9)) < 0.15);
}

TEST_CASE("shape of the discriminator") {
    DiscriminatorPoly h = default_h(128);
    // Monotone on [0.2, 1].
    for (double x = 0.2; x <= 1.0; x += 0.01) CHECK(eval_real_derivative(h, x) > 0.0);
    // Left tail: negative at the far end, near-zero magnitude throughout
    // (strongly misaligned updates get inverted or attenuated, never
    // rewarded).
    for (double x = -1.0; x <= -0.7; x += 0.01) CHECK(eval_real(h, x) < 0.0);
    for (double x = -1.0; x <= 0.0; x += 0.01) CHECK(std::abs(eval_real(h, x)) < 0.09);
    // Positive on [0, 1].
    for (double x = 0.0; x <= 1.0; x += 0.01) CHECK(eval_real(h, x) > 0.0);
}

TEST_CASE("fixed-point encoding error") {
    for (int qc : {128, 1024}) {
        DiscriminatorPoly h = default_h(qc);
        std::vector<mpz_class> enc = h.encoded();
        REQUIRE(enc.size() == 4);
        for (int j = 0; j <= 3; ++j) {
            double back = enc[static_cast<std::size_t>(j)].get_d() / qc;
            CHECK(std::abs(back - h.coeffs[static_cast<std::size_t>(j)]) <= 0.5 / qc + 1e-12);
        }
    }
}

TEST_CASE("schedule counts") {
    DiscriminatorPoly h = default_h(64);
    TsSchedule plan = ts_program(h, 64, {0, 2, 5});
    CHECK(plan.scheduled_scalar_muls() == 2 * 3);
    CHECK(plan.scheduled_scalar_vec_muls() == 3);
    CHECK(plan.ts_scale() == mpz_class(64) * mpz_class(64) * mpz_class(64) * mpz_class(64) *
                                 mpz_class(64) * mpz_class(64) * 64);

    TsSchedule empty = ts_program(h, 64, {});
    CHECK(empty.scheduled_scalar_muls() == 0);
    CHECK(empty.targets.empty());
}

TEST_CASE("integer shadow tracks the real polynomial on grid cosines") {
    const int q = 128, qc = 128;
    DiscriminatorPoly h = default_h(qc);
    TsSchedule plan = ts_program(h, q, {0});
    const double scale = mpz_class(plan.ts_scale()).get_d();
    rng::Stream rs(9);
    for (int trial = 0; trial < 1000; ++trial) {
        // Exact integer cosine in [-q^2, q^2].
        long c = static_cast<long>(rs.next_below(2 * q * q + 1)) - q * q;
        mpz_class shadow = ts_shadow(plan, mpz_class(c));
        double x = static_cast<double>(c) / (q * q);
        double err = std::abs(shadow.get_d() / scale - eval_real(h, x));
        CHECK(err <= 2.0 / qc + 3.0 * 2.0 / q);
    }
}
