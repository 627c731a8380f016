#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "secagg/beaver.hpp"
#include "secagg/field.hpp"
#include "secagg/mac.hpp"
#include "secagg/rng.hpp"

namespace secagg {

struct ProtocolDims {
    int n = 0;
    int t = 0;
    int d = 0;
    int k = 3;
    int q = 0;
    int coeff_scale = 0;
    int iterations = 1;
};

/// Objects distributed by the TTP; identifies the derivation stream of every
/// sampled value, sharing polynomial and MAC beta.
enum class Obj : std::uint64_t {
    RMask = 1, // per client j: one-time-pad vector r_j
    Lambda,    // per iteration: uniform nonzero masking scalar
    DotO,
    DotV,
    DotW,
    ScalarA,
    ScalarB,
    ScalarC,
    SvX,
    SvY,
    SvZ,
};

/// Everything one client holds for one iteration.
struct IterationBundle {
    std::vector<Fp> r_own;                           // plain one-time pad of this client
    std::vector<std::vector<TaggedShare>> r_shares;  // [j][coord]: share of r_j at this client
    TaggedShare lambda_share;
    Pool<DotTripleView<TaggedShare>> dots;
    Pool<ScalarTripleView<TaggedShare>> scalars;
    Pool<ScalarVecTripleView<TaggedShare>> scalar_vecs;
};

/// Per-client handle over the preprocessed horizon. Iterations materialize
/// lazily from the TTP derivation seed; consumption is monotone in g.
class ClientBundle {
public:
    ClientBundle(std::shared_ptr<const Modulus> mod, ProtocolDims dims, rng::Stream root,
                 Fp alpha, int client_id)
        : mod_(std::move(mod)), dims_(dims), root_(root), alpha_(std::move(alpha)),
          client_id_(client_id) {}

    int client_id() const { return client_id_; }
    const ProtocolDims& dims() const { return dims_; }

    /// Materializes iteration g. Throws "preprocessing exhausted" past the
    /// declared horizon and rejects non-monotone access.
    IterationBundle iteration(int g);

    /// Test-only: materialize without advancing the consumption cursor.
    IterationBundle peek_iteration(int g) const;

private:
    std::shared_ptr<const Modulus> mod_;
    ProtocolDims dims_;
    rng::Stream root_;
    Fp alpha_;
    int client_id_;
    int next_g_ = 0;
};

/// MAC key material delivered to the federator: the global alpha and the
/// beta of every tagged share the TTP distributed, addressed by
/// (iteration, object, slot, coordinate, share index).
class FederatorKeys {
public:
    FederatorKeys(std::shared_ptr<const Modulus> mod, ProtocolDims dims, rng::Stream root,
                  Fp alpha, bool with_digests)
        : mod_(std::move(mod)), dims_(dims), root_(root), alpha_(std::move(alpha)),
          with_digests_(with_digests) {}

    const Fp& alpha() const { return alpha_; }
    const Modulus& modulus() const { return *mod_; }
    const ProtocolDims& dims() const { return dims_; }

    Fp beta(int g, Obj kind, int slot, int coord, int index) const;
    KeyTrace leaf(int g, Obj kind, int slot, int coord, int index) const;

    ScalarTripleView<KeyTrace> scalar_trace(int g, int slot, int index) const;
    DotTripleView<KeyTrace> dot_trace(int g, int slot, int index) const;
    ScalarVecTripleView<KeyTrace> sv_trace(int g, int slot, int index) const;

    /// Test-only plaintext of a TTP object; disabled in privacy-evaluation
    /// mode so the honest-but-curious federator view stays faithful.
    Fp plaintext(int g, Obj kind, int slot, int coord) const;
    bool digests_enabled() const { return with_digests_; }

private:
    std::shared_ptr<const Modulus> mod_;
    ProtocolDims dims_;
    rng::Stream root_;
    Fp alpha_;
    bool with_digests_;
};

struct TtpOutput {
    std::shared_ptr<const Modulus> modulus;
    std::vector<ClientBundle> bundles;
    std::unique_ptr<FederatorKeys> keys;
};

/// One-shot trusted third party. initialize() is rvalue-qualified: the
/// handle is spent before the first training round.
class Ttp {
public:
    Ttp(ProtocolDims dims, rng::Stream master) : dims_(dims), master_(master) {}

    /// Modulus defaults to min_modulus over the dims; tests may override
    /// (e.g. tiny enumeration fields).
    TtpOutput initialize(bool with_digests = false,
                         std::shared_ptr<const Modulus> modulus_override = nullptr) &&;

private:
    ProtocolDims dims_;
    rng::Stream master_;
};

struct AuditReport {
    std::vector<std::string> violations;
    bool clean() const { return violations.empty(); }
};

/// Test-only consistency sweep over one iteration's materialized bundles:
/// pool sizes match the budget, triple relations hold, every tag verifies
/// against the federator keys, pads reconstruct to their plain values.
AuditReport audit_iteration(const std::vector<IterationBundle>& bundles, const FederatorKeys& keys,
                            int g);

/// Deterministic binary round-trip (length-prefixed big-endian residues).
std::vector<std::uint8_t> serialize_bundle(const IterationBundle& b, const Modulus& m);
IterationBundle deserialize_bundle(const std::vector<std::uint8_t>& bytes, const Modulus& m);

} // namespace secagg
