#include "secagg/field.hpp"

#include <array>

namespace secagg {

namespace {

std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

std::uint64_t powmod_u64(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1 % m;
    a %= m;
    while (e) {
        if (e & 1) r = mulmod_u64(r, a, m);
        a = mulmod_u64(a, a, m);
        e >>= 1;
    }
    return r;
}

// Deterministic Miller-Rabin for n < 2^64 with the standard witness set.
bool miller_rabin_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t sp : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % sp == 0) return n == sp;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        std::uint64_t x = powmod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

mpz_class pow_int(mpz_class base, unsigned long e) {
    mpz_class r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

} // namespace

Modulus::Modulus(mpz_class p) : p_(std::move(p)) {
    if (p_ < 3) throw FieldError("modulus must be >= 3");
    if (mpz_even_p(p_.get_mpz_t())) throw FieldError("modulus must be odd");
    if (!is_prime(p_)) throw FieldError("modulus must be prime");
    bits_ = mpz_sizeinbase(p_.get_mpz_t(), 2);
    word_sized_ = bits_ <= 63;
    if (word_sized_) word_ = mpz_get_ui(p_.get_mpz_t());
}

void Fp::reduce() {
    mpz_mod(v_.get_mpz_t(), v_.get_mpz_t(), mod_->p().get_mpz_t());
}

const Modulus& Fp::same_modulus(const Fp& o) const {
    if (!mod_ || !o.mod_) throw FieldError("uninitialized field element");
    if (mod_ != o.mod_ && mod_->p() != o.mod_->p()) throw FieldError("modulus mismatch");
    return *mod_;
}

Fp Fp::operator+(const Fp& o) const {
    const Modulus& m = same_modulus(o);
    Fp r;
    r.mod_ = &m;
    if (m.word_sized()) {
        std::uint64_t s = to_u64() + o.to_u64();
        if (s >= m.word()) s -= m.word();
        mpz_set_ui(r.v_.get_mpz_t(), s);
    } else {
        r.v_ = v_ + o.v_;
        if (r.v_ >= m.p()) r.v_ -= m.p();
    }
    return r;
}

Fp Fp::operator-(const Fp& o) const {
    const Modulus& m = same_modulus(o);
    Fp r;
    r.mod_ = &m;
    if (m.word_sized()) {
        std::uint64_t a = to_u64(), b = o.to_u64();
        mpz_set_ui(r.v_.get_mpz_t(), a >= b ? a - b : a + m.word() - b);
    } else {
        r.v_ = v_ - o.v_;
        if (mpz_sgn(r.v_.get_mpz_t()) < 0) r.v_ += m.p();
    }
    return r;
}

Fp Fp::operator*(const Fp& o) const {
    const Modulus& m = same_modulus(o);
    Fp r;
    r.mod_ = &m;
    if (m.word_sized()) {
        mpz_set_ui(r.v_.get_mpz_t(), mulmod_u64(to_u64(), o.to_u64(), m.word()));
    } else {
        r.v_ = v_ * o.v_;
        mpz_mod(r.v_.get_mpz_t(), r.v_.get_mpz_t(), m.p().get_mpz_t());
    }
    return r;
}

Fp Fp::operator-() const {
    if (!mod_) throw FieldError("uninitialized field element");
    Fp r;
    r.mod_ = mod_;
    if (is_zero()) return Fp::zero(*mod_);
    r.v_ = mod_->p() - v_;
    return r;
}

Fp Fp::uniform(const Modulus& m, rng::Stream& rs) {
    if (m.word_sized()) return Fp(m, rs.next_below(m.word()));
    const std::size_t words = (m.bits() + 63) / 64;
    const std::size_t top_shift = words * 64 - m.bits();
    mpz_class v;
    while (true) {
        v = 0;
        for (std::size_t i = 0; i < words; ++i) {
            mpz_mul_2exp(v.get_mpz_t(), v.get_mpz_t(), 64);
            mpz_class w;
            std::uint64_t x = rs.next_u64();
            if (i == 0) x >>= top_shift;
            mpz_set_ui(w.get_mpz_t(), x);
            v += w;
        }
        if (v < m.p()) return Fp(m, v);
    }
}

void Fp::append_bytes(std::vector<std::uint8_t>& out) const {
    const std::size_t w = modulus().byte_width();
    std::array<std::uint8_t, 64> buf{};
    std::size_t count = 0;
    if (!is_zero()) {
        if (w > buf.size()) {
            std::vector<std::uint8_t> big(w);
            mpz_export(big.data(), &count, 1, 1, 1, 0, v_.get_mpz_t());
            out.insert(out.end(), w - count, 0);
            out.insert(out.end(), big.begin(), big.begin() + count);
            return;
        }
        mpz_export(buf.data(), &count, 1, 1, 1, 0, v_.get_mpz_t());
    }
    out.insert(out.end(), w - count, 0);
    out.insert(out.end(), buf.begin(), buf.begin() + count);
}

Fp Fp::from_bytes(const Modulus& m, const std::uint8_t* data, std::size_t len) {
    mpz_class v;
    mpz_import(v.get_mpz_t(), len, 1, 1, 1, 0, data);
    if (v >= m.p()) throw FieldError("residue out of range");
    return Fp(m, v);
}

Fp inverse(const Fp& a) {
    if (a.is_zero()) throw FieldError("no inverse");
    const Modulus& m = a.modulus();
    mpz_class r;
    if (mpz_invert(r.get_mpz_t(), a.value().get_mpz_t(), m.p().get_mpz_t()) == 0)
        throw FieldError("no inverse");
    return Fp(m, r);
}

Fp pow(const Fp& a, std::uint64_t e) {
    const Modulus& m = a.modulus();
    mpz_class ee;
    mpz_set_ui(ee.get_mpz_t(), e);
    mpz_class r;
    mpz_powm(r.get_mpz_t(), a.value().get_mpz_t(), ee.get_mpz_t(), m.p().get_mpz_t());
    return Fp(m, r);
}

Fp phi(const Modulus& m, const mpz_class& x) {
    mpz_class twice = 2 * abs(x);
    if (twice >= m.p()) throw FieldError("embedding overflow");
    if (x >= 0) return Fp(m, x);
    return Fp(m, mpz_class(m.p() + x));
}

Fp phi(const Modulus& m, std::int64_t x) { return phi(m, mpz_class(static_cast<long>(x))); }

mpz_class phi_inv(const Fp& e) {
    const mpz_class& p = e.modulus().p();
    if (2 * e.value() < p) return e.value();
    return e.value() - p;
}

bool is_prime(const mpz_class& n) {
    if (n < 2) return false;
    if (mpz_fits_ulong_p(n.get_mpz_t()) && mpz_get_ui(n.get_mpz_t()) <= ~0ULL)
        return miller_rabin_u64(mpz_get_ui(n.get_mpz_t()));
    // Above 2^64: probabilistic with 64 rounds.
    return mpz_probab_prime_p(n.get_mpz_t(), 64) > 0;
}

mpz_class next_prime_geq(mpz_class n) {
    if (n <= 2) return 2;
    if (mpz_even_p(n.get_mpz_t())) n += 1;
    while (!is_prime(n)) n += 2;
    return n;
}

namespace {

// Covers the discriminator coefficient mass and the worst-case cosine
// overshoot |<u0,u>| <= (1 + sqrt(d)/q)^k * q^2k for inputs that passed the
// norm validation; keeps the true aggregate numerator/denominator strictly
// inside the reconstruction bounds.
mpz_class headroom_multiplier(int d, int k, int q) {
    mpz_class s;
    mpz_class dd(d);
    mpz_sqrt(s.get_mpz_t(), dd.get_mpz_t());
    s += 1; // ceil(sqrt(d))
    mpz_class num = pow_int(mpz_class(q) + s, static_cast<unsigned long>(k)) * 4;
    mpz_class den = pow_int(mpz_class(q), static_cast<unsigned long>(k));
    mpz_class m = num / den + 1;
    return m + 1;
}

} // namespace

ReconstructionBounds reconstruction_bounds(int n, int d, int k, int q, int coeff_scale) {
    if (n < 1 || d < 1 || k < 1 || q < 1 || coeff_scale < 1)
        throw FieldError("reconstruction_bounds: parameters must be >= 1");
    mpz_class m = headroom_multiplier(d, k, q);
    mpz_class q_pow_2k = pow_int(mpz_class(q), static_cast<unsigned long>(2 * k));
    ReconstructionBounds b;
    b.den_bound = m * coeff_scale * n * q_pow_2k;
    b.num_bound = b.den_bound * d * q;
    return b;
}

mpz_class aggregation_overflow_bound(int n, int d, int k, int q) {
    return 2 * mpz_class(n) * pow_int(mpz_class(d), static_cast<unsigned long>(k)) *
               pow_int(mpz_class(q), static_cast<unsigned long>(2 * k + 1)) +
           1;
}

Modulus min_modulus(int n, int d, int k, int q, int coeff_scale) {
    if (n < 1 || d < 1 || k < 1 || q < 1 || coeff_scale < 1)
        throw FieldError("min_modulus: parameters must be >= 1");
    ReconstructionBounds b = reconstruction_bounds(n, d, k, q, coeff_scale);
    mpz_class lo = aggregation_overflow_bound(n, d, k, q);
    mpz_class rr = 2 * b.num_bound * b.den_bound + 1;
    if (rr > lo) lo = rr;
    if (lo < 3) lo = 3;
    return Modulus(next_prime_geq(lo));
}

Rational rational_reconstruct(const Fp& e, const mpz_class& num_bound, const mpz_class& den_bound) {
    const mpz_class& p = e.modulus().p();
    if (num_bound < 0 || den_bound < 1) throw FieldError("invalid reconstruction bounds");

    // Extended Euclid on (p, e); the first remainder <= num_bound yields the
    // candidate, unique whenever 2 * num_bound * den_bound < p.
    mpz_class r0 = p, r1 = e.value();
    mpz_class t0 = 0, t1 = 1;
    while (r1 > num_bound) {
        mpz_class quo = r0 / r1;
        mpz_class r2 = r0 - quo * r1;
        mpz_class t2 = t0 - quo * t1;
        r0 = r1;
        r1 = r2;
        t0 = t1;
        t1 = t2;
    }
    if (mpz_sgn(t1.get_mpz_t()) == 0) throw FieldError("reconstruction failure");
    Rational out;
    if (t1 < 0) {
        out.num = -r1;
        out.den = -t1;
    } else {
        out.num = r1;
        out.den = t1;
    }
    if (out.den > den_bound) throw FieldError("reconstruction failure");
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), out.num.get_mpz_t(), out.den.get_mpz_t());
    if (g != 1 && !(out.num == 0 && out.den == 1)) throw FieldError("reconstruction failure");
    // Confirm num = e * den mod p.
    mpz_class check = out.num - e.value() * out.den;
    mpz_mod(check.get_mpz_t(), check.get_mpz_t(), p.get_mpz_t());
    if (mpz_sgn(check.get_mpz_t()) != 0) throw FieldError("reconstruction failure");
    return out;
}

} // namespace secagg
