#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "secagg/field.hpp"
#include "secagg/rng.hpp"
#include "secagg/sss.hpp"

namespace secagg {

/// One-time MAC key: tag(x) = alpha * x + beta. alpha is global per
/// deployment (resampled if 0), beta is fresh per tagged share.
struct MacKey {
    Fp alpha;
    Fp beta;
};

Fp mac_tag(const Fp& value, const MacKey& key);

inline Fp sample_nonzero(const Modulus& m, rng::Stream& rs) {
    Fp v = Fp::uniform(m, rs);
    while (v.is_zero()) v = Fp::uniform(m, rs);
    return v;
}

/// A share value with its MAC tag as held by a client. Linear maps apply to
/// value and tag alike; public constants move only the value.
struct TaggedShare {
    Fp value;
    Fp tag;

    TaggedShare operator+(const TaggedShare& o) const { return {value + o.value, tag + o.tag}; }
    TaggedShare operator-(const TaggedShare& o) const { return {value - o.value, tag - o.tag}; }
    TaggedShare scaled(const Fp& c) const { return {c * value, c * tag}; }
    TaggedShare plus_public(const Fp& c) const { return {value + c, tag}; }
};

/// The federator-side mirror of a TaggedShare: the accumulated public offset
/// and the expected beta mass under the same linear program.
struct KeyTrace {
    Fp offset;
    Fp beta;

    KeyTrace operator+(const KeyTrace& o) const { return {offset + o.offset, beta + o.beta}; }
    KeyTrace operator-(const KeyTrace& o) const { return {offset - o.offset, beta - o.beta}; }
    KeyTrace scaled(const Fp& c) const { return {c * offset, c * beta}; }
    KeyTrace plus_public(const Fp& c) const { return {offset + c, beta}; }
};

TaggedShare make_tagged(const Fp& value, const MacKey& key);

/// tag == alpha * (value - public_offset) + combined_beta
bool mac_verify(const Fp& claimed_value, const Fp& claimed_tag, const Fp& alpha,
                const Fp& combined_beta, const Fp& public_offset);

bool mac_verify(const TaggedShare& share, const Fp& alpha, const KeyTrace& trace);

/// sum(coeffs[j] * tagged[j]) + offset; tags do not absorb the offset.
TaggedShare lincomb_tagged(std::span<const TaggedShare> tagged, std::span<const Fp> coeffs,
                           const Fp& offset);

// Element-wise helpers shared by client programs (S = TaggedShare) and the
// federator replay (S = KeyTrace).
template <typename S>
std::vector<S> vec_add(std::span<const S> a, std::span<const S> b) {
    if (a.size() != b.size()) throw FieldError("vector size mismatch");
    std::vector<S> out;
    out.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(a[i] + b[i]);
    return out;
}

template <typename S>
std::vector<S> vec_sub(std::span<const S> a, std::span<const S> b) {
    if (a.size() != b.size()) throw FieldError("vector size mismatch");
    std::vector<S> out;
    out.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(a[i] - b[i]);
    return out;
}

template <typename S>
S dot_public(std::span<const Fp> pub, std::span<const S> shares) {
    if (pub.size() != shares.size()) throw FieldError("vector size mismatch");
    if (shares.empty()) throw FieldError("empty dot product");
    S acc = shares[0].scaled(pub[0]);
    for (std::size_t i = 1; i < shares.size(); ++i) acc = acc + shares[i].scaled(pub[i]);
    return acc;
}

} // namespace secagg
