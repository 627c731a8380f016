#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "secagg/rng.hpp"

namespace secagg {

class FieldError : public std::runtime_error {
public:
    explicit FieldError(const std::string& what) : std::runtime_error(what) {}
};

/// Odd prime modulus. Arithmetic takes a word-sized fast path when p < 2^63.
class Modulus {
public:
    explicit Modulus(mpz_class p);

    const mpz_class& p() const { return p_; }
    std::size_t bits() const { return bits_; }
    std::size_t byte_width() const { return (bits_ + 7) / 8; }
    bool word_sized() const { return word_sized_; }
    std::uint64_t word() const { return word_; }

    bool operator==(const Modulus& o) const { return p_ == o.p_; }
    bool operator!=(const Modulus& o) const { return p_ != o.p_; }

private:
    mpz_class p_;
    std::size_t bits_ = 0;
    bool word_sized_ = false;
    std::uint64_t word_ = 0;
};

/// Residue mod p with value semantics. Elements keep a non-owning pointer to
/// their Modulus, which must outlive them; mixing moduli is rejected.
class Fp {
public:
    Fp() : mod_(nullptr) {}
    Fp(const Modulus& m, mpz_class v) : v_(std::move(v)), mod_(&m) { reduce(); }
    Fp(const Modulus& m, std::uint64_t v) : mod_(&m) {
        mpz_set_ui(v_.get_mpz_t(), v);
        reduce();
    }

    static Fp zero(const Modulus& m) { return Fp(m, std::uint64_t{0}); }
    static Fp one(const Modulus& m) { return Fp(m, std::uint64_t{1}); }
    static Fp uniform(const Modulus& m, rng::Stream& rs);

    const mpz_class& value() const { return v_; }
    const Modulus& modulus() const {
        if (!mod_) throw FieldError("uninitialized field element");
        return *mod_;
    }
    bool is_zero() const { return mpz_sgn(v_.get_mpz_t()) == 0; }

    Fp operator+(const Fp& o) const;
    Fp operator-(const Fp& o) const;
    Fp operator*(const Fp& o) const;
    Fp operator-() const;
    Fp& operator+=(const Fp& o) { return *this = *this + o; }
    Fp& operator-=(const Fp& o) { return *this = *this - o; }
    Fp& operator*=(const Fp& o) { return *this = *this * o; }

    bool operator==(const Fp& o) const { return v_ == o.v_; }
    bool operator!=(const Fp& o) const { return v_ != o.v_; }

    std::uint64_t to_u64() const { return mpz_get_ui(v_.get_mpz_t()); }

    /// Fixed-width big-endian encoding (modulus byte width).
    void append_bytes(std::vector<std::uint8_t>& out) const;
    static Fp from_bytes(const Modulus& m, const std::uint8_t* data, std::size_t len);

private:
    void reduce();
    const Modulus& same_modulus(const Fp& o) const;

    mpz_class v_;
    const Modulus* mod_;
};

Fp inverse(const Fp& a);
Fp pow(const Fp& a, std::uint64_t e);

/// Signed-integer embedding: x >= 0 -> x, x < 0 -> p + x. Requires |x| < p/2.
Fp phi(const Modulus& m, const mpz_class& x);
Fp phi(const Modulus& m, std::int64_t x);

/// Inverse embedding onto the symmetric range (-(p-1)/2 .. (p-1)/2).
mpz_class phi_inv(const Fp& e);

bool is_prime(const mpz_class& n);
mpz_class next_prime_geq(mpz_class n);

/// Bounds used to decode the masked quotient by rational reconstruction:
/// the true numerator is within +-num_bound and the true denominator within
/// (0, den_bound] for every input that survives the norm validation.
struct ReconstructionBounds {
    mpz_class num_bound;
    mpz_class den_bound;
};

ReconstructionBounds reconstruction_bounds(int n, int d, int k, int q, int coeff_scale);

/// Overflow-free bound on the shared polynomial evaluation (2 n d^k q^(2k+1)).
mpz_class aggregation_overflow_bound(int n, int d, int k, int q);

/// Smallest prime large enough for both the overflow bound and unique
/// rational reconstruction of the decoded quotient.
Modulus min_modulus(int n, int d, int k, int q, int coeff_scale);

/// Recovers a fraction a/b with |a| <= num_bound, 0 < b <= den_bound,
/// gcd(a, b) = 1 and a = e * b mod p; the result is the unique such pair
/// whenever 2 * num_bound * den_bound < p. Throws
/// FieldError("reconstruction failure") when no pair is found.
struct Rational {
    mpz_class num;
    mpz_class den;
};

Rational rational_reconstruct(const Fp& e, const mpz_class& num_bound, const mpz_class& den_bound);

} // namespace secagg
