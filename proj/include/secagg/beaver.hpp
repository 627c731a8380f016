#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "secagg/field.hpp"
#include "secagg/mac.hpp"
#include "secagg/rng.hpp"
#include "secagg/sss.hpp"

namespace secagg {

// One party's view of a preprocessed triple. S is TaggedShare on clients and
// KeyTrace on the federator replay.
template <typename S>
struct ScalarTripleView {
    S a, b, c;
};

template <typename S>
struct DotTripleView {
    std::vector<S> o, v;
    S w;
};

template <typename S>
struct ScalarVecTripleView {
    S x;
    std::vector<S> y, z;
};

/// Per-iteration triple counts: one dot triple per norm check, (k-1) scalar
/// triples per trust-score power chain plus one for the lambda * Sigma1
/// product, one scalar-vector triple per trust-score scaling plus one for
/// lambda * Sigma2.
struct TripleBudget {
    int dot = 0;
    int scalar = 0;
    int scalar_vec = 0;
    int dot_dim = 0;

    bool operator==(const TripleBudget&) const = default;
};

TripleBudget triple_budget(int n, int k, int d);

// Masked-difference openings; both results are uniform and independent of
// the inputs.
template <typename S>
std::pair<S, S> mul_open(const S& x, const S& y, const ScalarTripleView<S>& t) {
    return {x - t.a, y - t.b};
}

template <typename S>
S mul_complete(const ScalarTripleView<S>& t, const Fp& d, const Fp& e) {
    return (t.c + t.b.scaled(d) + t.a.scaled(e)).plus_public(d * e);
}

template <typename S>
std::pair<std::vector<S>, std::vector<S>> dot_open(std::span<const S> x, std::span<const S> y,
                                                   const DotTripleView<S>& t) {
    return {vec_sub(x, std::span<const S>(t.o)), vec_sub(y, std::span<const S>(t.v))};
}

template <typename S>
S dot_complete(const DotTripleView<S>& t, std::span<const Fp> d, std::span<const Fp> e) {
    if (d.empty()) throw FieldError("empty dot product");
    if (d.size() != t.v.size() || e.size() != t.o.size()) throw FieldError("dimension mismatch");
    S acc = t.w;
    Fp de = Fp::zero(d[0].modulus());
    for (std::size_t i = 0; i < d.size(); ++i) {
        acc = acc + t.v[i].scaled(d[i]) + t.o[i].scaled(e[i]);
        de = de + d[i] * e[i];
    }
    return acc.plus_public(de);
}

template <typename S>
std::pair<S, std::vector<S>> scalar_vec_open(const S& s, std::span<const S> v,
                                             const ScalarVecTripleView<S>& t) {
    if (v.size() != t.y.size()) throw FieldError("dimension mismatch");
    return {s - t.x, vec_sub(v, std::span<const S>(t.y))};
}

template <typename S>
std::vector<S> scalar_vec_complete(const ScalarVecTripleView<S>& t, const Fp& d,
                                   std::span<const Fp> e) {
    if (e.size() != t.z.size()) throw FieldError("dimension mismatch");
    std::vector<S> out;
    out.reserve(t.z.size());
    for (std::size_t i = 0; i < t.z.size(); ++i)
        out.push_back((t.z[i] + t.y[i].scaled(d) + t.x.scaled(e[i])).plus_public(d * e[i]));
    return out;
}

// TTP-style generation with explicit keys; all parties' views plus the beta
// registry and the plaintext (for tests and audits).
struct GeneratedScalarTriple {
    std::vector<ScalarTripleView<TaggedShare>> parties;
    std::vector<Fp> beta_a, beta_b, beta_c;
    Fp a, b, c;
};

struct GeneratedDotTriple {
    std::vector<DotTripleView<TaggedShare>> parties;
    std::vector<std::vector<Fp>> beta_o, beta_v; // [coord][party]
    std::vector<Fp> beta_w;
    std::vector<Fp> o, v;
    Fp w;
};

struct GeneratedScalarVecTriple {
    std::vector<ScalarVecTripleView<TaggedShare>> parties;
    std::vector<Fp> beta_x;
    std::vector<std::vector<Fp>> beta_y, beta_z;
    Fp x;
    std::vector<Fp> y, z;
};

GeneratedScalarTriple gen_scalar_triple(const Modulus& m, int n, int t, const Fp& alpha,
                                        rng::Stream& rs);
GeneratedDotTriple gen_dot_triple(const Modulus& m, int n, int t, int d, const Fp& alpha,
                                  rng::Stream& rs);
GeneratedScalarVecTriple gen_scalar_vec_triple(const Modulus& m, int n, int t, int d,
                                               const Fp& alpha, rng::Stream& rs);

/// Slot pool with one-time consumption.
template <typename T>
class Pool {
public:
    Pool() = default;
    explicit Pool(std::vector<T> items) : items_(std::move(items)), used_(items_.size(), false) {}

    const T& take(std::size_t slot) {
        if (slot >= items_.size()) throw FieldError("preprocessing exhausted");
        if (used_[slot]) throw FieldError("triple already consumed");
        used_[slot] = true;
        return items_[slot];
    }

    /// Non-consuming access (audits, serialization).
    const T& at(std::size_t slot) const {
        if (slot >= items_.size()) throw FieldError("pool slot out of range");
        return items_[slot];
    }

    std::size_t size() const { return items_.size(); }
    std::size_t consumed() const {
        std::size_t c = 0;
        for (bool u : used_) c += u;
        return c;
    }

private:
    std::vector<T> items_;
    std::vector<bool> used_;
};

} // namespace secagg
