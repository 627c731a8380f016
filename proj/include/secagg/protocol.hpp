#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "secagg/beaver.hpp"
#include "secagg/discriminator.hpp"
#include "secagg/field.hpp"
#include "secagg/mac.hpp"
#include "secagg/message.hpp"
#include "secagg/quant.hpp"
#include "secagg/ttp.hpp"

namespace secagg {

struct ProtocolParams {
    ProtocolDims dims;
    std::int64_t eps_num = 1; // normalization band eps = eps_num / eps_den
    std::int64_t eps_den = 50;
    DiscriminatorPoly h;
    double eta = 0.1;
    std::shared_ptr<const Modulus> modulus;
    bool store_messages = false;
};

/// Byzantine hook applied to a client's outgoing messages.
using MessageTamper = std::function<void(Message&)>;

/// Client sends nothing from `step` onward during `iteration`.
struct DropoutEvent {
    std::uint32_t client = 0;
    int iteration = 0;
    int step = 2;
};

struct RoundInputs {
    int g = 0;
    RealVec root_update;
    std::vector<RealVec> client_updates;
};

struct RoundOutput {
    std::shared_ptr<const Modulus> modulus; // keeps transcript residues valid
    bool aborted = false;
    std::string abort_reason;
    bool model_updated = false;
    RealVec aggregate;              // decoded real aggregate (empty when aborted)
    std::vector<Rational> ratios;   // decoded Sigma2_j / Sigma1, gcd-reduced
    std::vector<std::uint32_t> aggregated_targets; // the clients whose updates entered the sums
    std::vector<std::array<std::size_t, 3>> triples_consumed; // per client: dot, scalar, sv
    RoundTranscript transcript;
};

class ClientState;

class FederatorState {
public:
    FederatorState(ProtocolParams params, std::unique_ptr<FederatorKeys> keys, RealVec initial_model,
                   rng::Stream rng);

    const RealVec& model() const { return model_; }
    void set_model(RealVec w) { model_ = std::move(w); }
    const std::set<std::uint32_t>& excluded() const { return excluded_; }
    const ProtocolParams& params() const { return params_; }
    const FederatorKeys& keys() const { return *keys_; }
    rng::Stream& rng() { return rng_; }

    void exclude(std::uint32_t id) { excluded_.insert(id); }

private:
    ProtocolParams params_;
    std::unique_ptr<FederatorKeys> keys_;
    RealVec model_;
    std::set<std::uint32_t> excluded_;
    rng::Stream rng_;
};

class ClientState {
public:
    ClientState(int id, ClientBundle bundle, rng::Stream rng)
        : id_(id), bundle_(std::move(bundle)), rng_(rng) {}

    int id() const { return id_; }
    ClientBundle& bundle() { return bundle_; }
    rng::Stream& rng() { return rng_; }

private:
    int id_;
    ClientBundle bundle_;
    rng::Stream rng_;
};

/// Executes one global iteration: encode, one-time-pad sharing, norm
/// validation, shared trust-score evaluation, masked reconstruction and the
/// model step. Deterministic given party streams and inputs.
RoundOutput run_iteration(FederatorState& fed, std::vector<ClientState>& clients,
                          const RoundInputs& in,
                          const std::map<std::uint32_t, MessageTamper>& tampers = {},
                          const std::vector<DropoutEvent>& dropouts = {});

/// Convenience: params with the default degree-3 discriminator and
/// min_modulus over the dims (coeff_scale defaults to q).
ProtocolParams make_params(ProtocolDims dims, double eps = 0.02, double eta = 0.1);

/// The step-1 encodings as performed inside run_iteration; exposed so
/// oracles can reproduce the quantized integers bit-exactly. Zero updates
/// come back as the flagged zero vector.
QuantizedUpdate encode_root_update(const rng::Stream& fed_rng, int g, const RealVec& u, int q);
QuantizedUpdate encode_client_update(const rng::Stream& client_rng, int g, const RealVec& u, int q);

} // namespace secagg
