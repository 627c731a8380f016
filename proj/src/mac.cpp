#include "secagg/mac.hpp"

namespace secagg {

Fp mac_tag(const Fp& value, const MacKey& key) { return key.alpha * value + key.beta; }

TaggedShare make_tagged(const Fp& value, const MacKey& key) {
    return {value, mac_tag(value, key)};
}

bool mac_verify(const Fp& claimed_value, const Fp& claimed_tag, const Fp& alpha,
                const Fp& combined_beta, const Fp& public_offset) {
    return claimed_tag == alpha * (claimed_value - public_offset) + combined_beta;
}

bool mac_verify(const TaggedShare& share, const Fp& alpha, const KeyTrace& trace) {
    return mac_verify(share.value, share.tag, alpha, trace.beta, trace.offset);
}

TaggedShare lincomb_tagged(std::span<const TaggedShare> tagged, std::span<const Fp> coeffs,
                           const Fp& offset) {
    if (tagged.size() != coeffs.size()) throw FieldError("coefficient count mismatch");
    TaggedShare acc{offset, Fp::zero(offset.modulus())};
    for (std::size_t i = 0; i < tagged.size(); ++i) acc = acc + tagged[i].scaled(coeffs[i]);
    return acc;
}

} // namespace secagg
