#include "secagg/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace secagg {

namespace {

constexpr std::uint64_t kClientQuant = 0x71636cULL;
constexpr std::uint64_t kFedQuant = 0x716664ULL;

struct ClientLeafSource {
    using S = TaggedShare;
    IterationBundle* b = nullptr;

    S r_leaf(int j, int c) const {
        return b->r_shares[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)];
    }
    DotTripleView<S> dot(int slot) { return b->dots.take(static_cast<std::size_t>(slot)); }
    ScalarTripleView<S> scalar(int slot) { return b->scalars.take(static_cast<std::size_t>(slot)); }
    ScalarVecTripleView<S> sv(int slot) {
        return b->scalar_vecs.take(static_cast<std::size_t>(slot));
    }
    S lambda() const { return b->lambda_share; }
};

struct TraceLeafSource {
    using S = KeyTrace;
    const FederatorKeys* k = nullptr;
    int g = 0;
    int index = 0; // evaluator client id

    S r_leaf(int j, int c) const { return k->leaf(g, Obj::RMask, j, c, index); }
    DotTripleView<S> dot(int slot) const { return k->dot_trace(g, slot, index); }
    ScalarTripleView<S> scalar(int slot) const { return k->scalar_trace(g, slot, index); }
    ScalarVecTripleView<S> sv(int slot) const { return k->sv_trace(g, slot, index); }
    S lambda() const { return k->leaf(g, Obj::Lambda, 0, 0, index); }
};

// One evaluator's walk through steps 2-5. Instantiated with TaggedShare
// leaves on clients and with KeyTrace leaves for the federator's integrity
// replay, so both sides execute the identical linear program.
template <typename Src>
struct EvalPipeline {
    using S = typename Src::S;

    Src src;
    const ProtocolDims* dims = nullptr;

    struct Target {
        std::uint32_t id = 0;
        std::vector<S> u_share;
        std::optional<DotTripleView<S>> dot;
        std::optional<S> norm_share;
        std::vector<S> powers; // C^1 .. C^k
        std::optional<ScalarTripleView<S>> mul_triple;
        std::optional<S> ts;
        std::optional<ScalarVecTripleView<S>> sv_triple;
        std::vector<S> ts_u;
    };

    std::vector<Target> targets;
    std::vector<std::uint32_t> active;
    std::optional<S> sigma1;
    std::vector<S> sigma2;
    std::optional<ScalarTripleView<S>> l1_triple;
    std::optional<ScalarVecTripleView<S>> l2_triple;
    std::optional<S> lsig1;
    std::vector<S> lsig2;

    Target& at(std::uint32_t id) {
        for (Target& t : targets)
            if (t.id == id) return t;
        throw FieldError("unknown target");
    }

    void derive(const std::vector<std::uint32_t>& sharers,
                const std::vector<std::vector<Fp>>& masked) {
        targets.clear();
        targets.reserve(sharers.size());
        for (std::size_t s = 0; s < sharers.size(); ++s) {
            Target t;
            t.id = sharers[s];
            const std::vector<Fp>& m = masked[s];
            t.u_share.reserve(m.size());
            for (std::size_t c = 0; c < m.size(); ++c)
                t.u_share.push_back(
                    src.r_leaf(static_cast<int>(t.id), static_cast<int>(c)).plus_public(m[c]));
            targets.push_back(std::move(t));
        }
    }

    std::pair<std::vector<S>, std::vector<S>> norm_open(std::uint32_t j) {
        Target& t = at(j);
        t.dot = src.dot(static_cast<int>(j));
        return dot_open(std::span<const S>(t.u_share), std::span<const S>(t.u_share), *t.dot);
    }

    void norm_complete(std::uint32_t j, std::span<const Fp> d, std::span<const Fp> e) {
        Target& t = at(j);
        t.norm_share = dot_complete(*t.dot, d, e);
    }

    void cosine(std::uint32_t j, std::span<const Fp> u0_emb) {
        Target& t = at(j);
        t.powers.clear();
        t.powers.push_back(dot_public(u0_emb, std::span<const S>(t.u_share)));
    }

    std::pair<S, S> mul_open_power(std::uint32_t j, int m) {
        Target& t = at(j);
        t.mul_triple = src.scalar((dims->k - 1) * static_cast<int>(j) + m);
        return mul_open(t.powers[static_cast<std::size_t>(m)], t.powers[0], *t.mul_triple);
    }

    void mul_complete_power(std::uint32_t j, const Fp& d, const Fp& e) {
        Target& t = at(j);
        t.powers.push_back(mul_complete(*t.mul_triple, d, e));
    }

    void form_ts(std::uint32_t j, std::span<const Fp> coeffs_emb) {
        Target& t = at(j);
        S acc = t.powers[0].scaled(coeffs_emb[1]);
        for (int m = 2; m <= dims->k; ++m)
            acc = acc + t.powers[static_cast<std::size_t>(m - 1)].scaled(
                            coeffs_emb[static_cast<std::size_t>(m)]);
        t.ts = acc.plus_public(coeffs_emb[0]);
    }

    std::pair<S, std::vector<S>> sv_open_target(std::uint32_t j) {
        Target& t = at(j);
        t.sv_triple = src.sv(static_cast<int>(j));
        return scalar_vec_open(*t.ts, std::span<const S>(t.u_share), *t.sv_triple);
    }

    void sv_complete_target(std::uint32_t j, const Fp& d, std::span<const Fp> e) {
        Target& t = at(j);
        t.ts_u = scalar_vec_complete(*t.sv_triple, d, e);
    }

    void form_sigmas() {
        sigma1.reset();
        sigma2.clear();
        for (std::uint32_t j : active) {
            Target& t = at(j);
            if (!sigma1) {
                sigma1 = *t.ts;
                sigma2 = t.ts_u;
            } else {
                sigma1 = *sigma1 + *t.ts;
                for (std::size_t c = 0; c < sigma2.size(); ++c) sigma2[c] = sigma2[c] + t.ts_u[c];
            }
        }
    }

    std::pair<S, S> lambda1_open() {
        l1_triple = src.scalar((dims->k - 1) * dims->n);
        return mul_open(*sigma1, src.lambda(), *l1_triple);
    }

    std::pair<S, std::vector<S>> lambda2_open() {
        l2_triple = src.sv(dims->n);
        return scalar_vec_open(src.lambda(), std::span<const S>(sigma2), *l2_triple);
    }

    void lambda_complete(const Fp& d1, const Fp& e1, const Fp& d2, std::span<const Fp> e2) {
        lsig1 = mul_complete(*l1_triple, d1, e1);
        lsig2 = scalar_vec_complete(*l2_triple, d2, e2);
    }
};

using ClientPipeline = EvalPipeline<ClientLeafSource>;
using TracePipeline = EvalPipeline<TraceLeafSource>;

struct Router {
    RoundTranscript* tr;
    std::size_t width;
    bool store;

    void deliver(Message&& m) {
        const std::size_t sz = m.byte_size(width);
        const int s = m.sender == kFederator ? -1 : static_cast<int>(m.sender);
        const int r = m.receiver == kFederator ? -1 : static_cast<int>(m.receiver);
        tr->sent_bytes[s] += sz;
        tr->recv_bytes[r] += sz;
        if (store) tr->messages.push_back(std::move(m));
    }
};

std::vector<Fp> embed_coeffs(const TsSchedule& plan, const Modulus& m) {
    std::vector<Fp> out;
    out.reserve(plan.combine_coeffs.size());
    for (const mpz_class& c : plan.combine_coeffs) out.push_back(phi(m, c));
    return out;
}

} // namespace

FederatorState::FederatorState(ProtocolParams params, std::unique_ptr<FederatorKeys> keys,
                               RealVec initial_model, rng::Stream rng)
    : params_(std::move(params)), keys_(std::move(keys)), model_(std::move(initial_model)),
      rng_(rng) {}

QuantizedUpdate encode_root_update(const rng::Stream& fed_rng, int g, const RealVec& u, int q) {
    rng::Stream qs = fed_rng.fork({kFedQuant, static_cast<std::uint64_t>(g)});
    return quantize(normalize(u), q, qs);
}

QuantizedUpdate encode_client_update(const rng::Stream& client_rng, int g, const RealVec& u, int q) {
    rng::Stream qs = client_rng.fork({kClientQuant, static_cast<std::uint64_t>(g)});
    QuantizedUpdate qu;
    try {
        qu = quantize(normalize(u), q, qs);
    } catch (const QuantError&) {
        qu.q = q;
        qu.coords.assign(u.size() > 0 ? static_cast<std::size_t>(u.size()) : 0, 0);
    }
    return qu;
}

ProtocolParams make_params(ProtocolDims dims, double eps, double eta) {
    ProtocolParams p;
    if (dims.coeff_scale <= 0) dims.coeff_scale = dims.q;
    p.dims = dims;
    p.h = default_h(dims.coeff_scale);
    if (p.h.degree() != dims.k) throw FieldError("dims.k must match discriminator degree");
    p.eta = eta;
    const std::int64_t den = 1000000000;
    std::int64_t num = static_cast<std::int64_t>(std::llround(eps * static_cast<double>(den)));
    std::int64_t g = std::gcd(num, den);
    p.eps_num = num / g;
    p.eps_den = den / g;
    p.modulus = std::make_shared<const Modulus>(
        min_modulus(dims.n, dims.d, dims.k, dims.q, dims.coeff_scale));
    return p;
}

RoundOutput run_iteration(FederatorState& fed, std::vector<ClientState>& clients,
                          const RoundInputs& in, const std::map<std::uint32_t, MessageTamper>& tampers,
                          const std::vector<DropoutEvent>& dropouts) {
    const ProtocolParams& params = fed.params();
    const ProtocolDims& dims = params.dims;
    const Modulus& mod = *params.modulus;
    const int n = dims.n;
    const int g = in.g;
    const std::size_t W = mod.byte_width();

    RoundOutput out;
    out.modulus = params.modulus;
    out.transcript.iteration = static_cast<std::uint32_t>(g);
    out.triples_consumed.assign(static_cast<std::size_t>(n), {0, 0, 0});
    Router router{&out.transcript, W, params.store_messages};

    std::vector<int> drop_step(static_cast<std::size_t>(n), 99);
    for (const DropoutEvent& ev : dropouts)
        if (ev.iteration == g && ev.client < static_cast<std::uint32_t>(n))
            drop_step[ev.client] = std::min(drop_step[ev.client], ev.step);

    auto is_excluded = [&](std::uint32_t i) { return fed.excluded().count(i) > 0; };
    auto dropped_at = [&](std::uint32_t i, int step) { return drop_step[i] <= step; };

    // Sends a client message unless the sender dropped; Byzantine tampering
    // applies before delivery. Returns the delivered payload.
    auto client_send = [&](std::uint32_t i, Phase phase, std::uint8_t sub,
                           Payload payload) -> std::optional<Payload> {
        if (dropped_at(i, phase_step(phase))) return std::nullopt;
        Message m;
        m.iteration = static_cast<std::uint32_t>(g);
        m.phase = phase;
        m.sub = sub;
        m.sender = static_cast<std::uint16_t>(i);
        m.receiver = kFederator;
        m.payload = std::move(payload);
        if (auto it = tampers.find(i); it != tampers.end()) it->second(m);
        Payload delivered = m.payload;
        router.deliver(std::move(m));
        return delivered;
    };

    auto fed_send = [&](std::uint32_t i, Phase phase, std::uint8_t sub, const Payload& payload) {
        Message m;
        m.iteration = static_cast<std::uint32_t>(g);
        m.phase = phase;
        m.sub = sub;
        m.sender = kFederator;
        m.receiver = static_cast<std::uint16_t>(i);
        m.payload = payload;
        router.deliver(std::move(m));
    };

    std::set<std::uint32_t> newly_excluded;

    auto abort_round = [&](const std::string& reason) {
        out.aborted = true;
        out.abort_reason = reason;
        out.transcript.aborted = true;
        out.transcript.abort_reason = reason;
        out.transcript.new_exclusions.assign(newly_excluded.begin(), newly_excluded.end());
        return out;
    };

    std::vector<std::uint32_t> initial_active;
    for (int i = 0; i < n; ++i)
        if (!is_excluded(static_cast<std::uint32_t>(i)))
            initial_active.push_back(static_cast<std::uint32_t>(i));
    if (initial_active.empty()) return abort_round("no active clients");

    auto broadcast = [&](Phase phase, std::uint8_t sub, const Payload& payload) {
        for (std::uint32_t i : initial_active)
            if (!is_excluded(i)) fed_send(i, phase, sub, payload);
    };

    // --- Step 1: global model out, everyone encodes. ---
    {
        PayloadModel pm;
        pm.w.assign(fed.model().data(), fed.model().data() + fed.model().size());
        broadcast(Phase::GlobalModel, 0, pm);
    }

    if (in.root_update.size() != dims.d)
        return abort_round("root update dimension mismatch");
    const double root_norm = in.root_update.norm();
    if (root_norm == 0.0) return abort_round("degenerate root update");
    std::vector<Fp> u0_emb = embed(encode_root_update(fed.rng(), g, in.root_update, dims.q), mod);

    struct ClientCtx {
        std::uint32_t id = 0;
        IterationBundle bundle;
        std::vector<Fp> u_emb;
        bool zero_flagged = false;
        ClientPipeline pipe;
    };
    std::vector<std::optional<ClientCtx>> ctx(static_cast<std::size_t>(n));
    for (std::uint32_t i : initial_active) {
        ClientCtx c;
        c.id = i;
        ClientState& cs = clients[i];
        c.bundle = cs.bundle().iteration(g);
        QuantizedUpdate qu = encode_client_update(cs.rng(), g, in.client_updates[i], dims.q);
        c.zero_flagged = std::all_of(qu.coords.begin(), qu.coords.end(),
                                     [](std::int64_t v) { return v == 0; });
        c.u_emb = embed(qu, mod);
        ctx[i] = std::move(c);
        ctx[i]->pipe.dims = &dims;
        ctx[i]->pipe.src.b = &ctx[i]->bundle;
    }

    // --- Step 2: broadcast of the root update, one-time-pad sharing. ---
    {
        PayloadFieldVec pf{u0_emb};
        broadcast(Phase::FederatorUpdate, 0, pf);
    }

    std::vector<std::uint32_t> sharers;
    std::vector<std::vector<Fp>> masked; // by sharer order
    for (std::uint32_t i : initial_active) {
        ClientCtx& c = *ctx[i];
        std::vector<Fp> m;
        m.reserve(c.u_emb.size());
        for (int cc = 0; cc < dims.d; ++cc)
            m.push_back(c.u_emb[static_cast<std::size_t>(cc)] -
                        c.bundle.r_own[static_cast<std::size_t>(cc)]);
        auto delivered = client_send(i, Phase::MaskedUpdate, 0, PayloadFieldVec{std::move(m)});
        if (!delivered) continue;
        sharers.push_back(i);
        masked.push_back(std::get<PayloadFieldVec>(*delivered).v);
    }
    if (sharers.empty()) return abort_round("no shared updates");

    {
        PayloadMaskedEcho echo{sharers, masked};
        broadcast(Phase::MaskedEcho, 0, echo);
    }

    // Client pipelines and the federator's per-evaluator trace pipelines.
    std::vector<std::optional<TracePipeline>> fpipe(static_cast<std::size_t>(n));
    for (std::uint32_t i : initial_active) {
        ctx[i]->pipe.derive(sharers, masked);
        TracePipeline tp;
        tp.dims = &dims;
        tp.src = TraceLeafSource{&fed.keys(), g, static_cast<int>(i)};
        tp.derive(sharers, masked);
        fpipe[i] = std::move(tp);
    }

    const Fp& alpha = fed.keys().alpha();
    std::vector<std::string>& verdicts = out.transcript.verdicts;

    auto exclude_now = [&](std::uint32_t i, const std::string& why) {
        if (!is_excluded(i)) {
            fed.exclude(i);
            newly_excluded.insert(i);
            verdicts.push_back(why);
        }
    };

    // Reconstructs one public value from per-evaluator shares, skipping
    // excluded senders; nullopt when fewer than t+1 verified shares survive.
    auto reconstruct_public =
        [&](const std::vector<std::pair<std::uint32_t, Fp>>& shares) -> std::optional<Fp> {
        std::vector<ValueShare> vs;
        for (const auto& [i, v] : shares) {
            if (is_excluded(i)) continue;
            vs.push_back({static_cast<ShareIndex>(i + 1), v});
            if (static_cast<int>(vs.size()) == dims.t + 1) break;
        }
        if (static_cast<int>(vs.size()) < dims.t + 1) return std::nullopt;
        return reconstruct(vs, dims.t);
    };

    // --- Step 3: norm validation. ---
    // Openings u - o, u - v for every shared update.
    std::map<std::uint32_t, PayloadNormOpen> norm_msgs;
    for (std::uint32_t i : initial_active) {
        ClientCtx& c = *ctx[i];
        if (!dropped_at(i, 3)) {
            PayloadNormOpen p;
            for (std::uint32_t j : sharers) {
                auto [dv, ev] = c.pipe.norm_open(j);
                p.items.push_back({j, std::move(dv), std::move(ev)});
            }
            out.triples_consumed[i][0] = c.bundle.dots.consumed();
            auto delivered = client_send(i, Phase::NormOpen, 0, std::move(p));
            if (delivered) norm_msgs[i] = std::get<PayloadNormOpen>(*delivered);
        }
    }

    // Federator advances every evaluator's trace and verifies arrivals.
    struct NormTraces {
        std::vector<KeyTrace> d, e;
    };
    std::vector<std::map<std::uint32_t, NormTraces>> fed_norm_tr(static_cast<std::size_t>(n));
    for (std::uint32_t i : initial_active) {
        for (std::uint32_t j : sharers) {
            auto [dv, ev] = fpipe[i]->norm_open(j);
            fed_norm_tr[i][j] = {std::move(dv), std::move(ev)};
        }
    }
    for (auto& [i, msg] : norm_msgs) {
        if (msg.items.size() != sharers.size()) {
            exclude_now(i, "norm_open malformed from client " + std::to_string(i));
            continue;
        }
        bool ok = true;
        for (const auto& item : msg.items) {
            auto it = fed_norm_tr[i].find(item.target);
            if (it == fed_norm_tr[i].end() || item.d.size() != static_cast<std::size_t>(dims.d) ||
                item.e.size() != static_cast<std::size_t>(dims.d)) {
                ok = false;
                break;
            }
            for (int c = 0; c < dims.d && ok; ++c) {
                if (!mac_verify(item.d[static_cast<std::size_t>(c)], alpha,
                                it->second.d[static_cast<std::size_t>(c)]) ||
                    !mac_verify(item.e[static_cast<std::size_t>(c)], alpha,
                                it->second.e[static_cast<std::size_t>(c)]))
                    ok = false;
            }
            if (!ok) break;
        }
        if (!ok) exclude_now(i, "mac failure in norm_open from client " + std::to_string(i));
    }

    // Reconstruct and echo the openings.
    PayloadNormOpened norm_opened;
    for (std::uint32_t j : sharers) {
        PayloadNormOpened::Item item;
        item.target = j;
        for (int c = 0; c < dims.d; ++c) {
            std::vector<std::pair<std::uint32_t, Fp>> ds, es;
            for (const auto& [i, msg] : norm_msgs) {
                if (is_excluded(i)) continue;
                for (const auto& mi : msg.items)
                    if (mi.target == j) {
                        ds.emplace_back(i, mi.d[static_cast<std::size_t>(c)].value);
                        es.emplace_back(i, mi.e[static_cast<std::size_t>(c)].value);
                        break;
                    }
            }
            auto dval = reconstruct_public(ds);
            auto eval_ = reconstruct_public(es);
            if (!dval || !eval_) return abort_round("insufficient shares");
            item.d.push_back(*dval);
            item.e.push_back(*eval_);
        }
        norm_opened.items.push_back(std::move(item));
    }
    broadcast(Phase::NormOpened, 0, norm_opened);

    // Norm shares.
    for (std::uint32_t i : initial_active) {
        for (const auto& item : norm_opened.items) {
            if (!is_excluded(i) && !dropped_at(i, 3))
                ctx[i]->pipe.norm_complete(item.target, item.d, item.e);
            fpipe[i]->norm_complete(item.target, item.d, item.e);
        }
    }
    std::map<std::uint32_t, PayloadNormShares> norm_share_msgs;
    for (std::uint32_t i : initial_active) {
        if (is_excluded(i) || dropped_at(i, 3)) continue;
        PayloadNormShares p;
        for (std::uint32_t j : sharers)
            p.items.push_back({j, *ctx[i]->pipe.at(j).norm_share});
        auto delivered = client_send(i, Phase::NormShare, 0, std::move(p));
        if (delivered) norm_share_msgs[i] = std::get<PayloadNormShares>(*delivered);
    }
    for (auto& [i, msg] : norm_share_msgs) {
        bool ok = msg.items.size() == sharers.size();
        for (const auto& item : msg.items) {
            if (!ok) break;
            if (!mac_verify(item.share, alpha, *fpipe[i]->at(item.target).norm_share)) ok = false;
        }
        if (!ok) exclude_now(i, "mac failure in norm_share from client " + std::to_string(i));
    }

    // Reconstruct each squared norm and apply the band.
    for (std::uint32_t j : sharers) {
        std::vector<std::pair<std::uint32_t, Fp>> shares;
        for (const auto& [i, msg] : norm_share_msgs) {
            if (is_excluded(i)) continue;
            for (const auto& item : msg.items)
                if (item.target == j) {
                    shares.emplace_back(i, item.share.value);
                    break;
                }
        }
        auto nval = reconstruct_public(shares);
        if (!nval) return abort_round("insufficient shares");
        mpz_class nsq = phi_inv(*nval);
        if (nsq < 0 || !norm_check_passes(nsq, dims.q, params.eps_num, params.eps_den))
            exclude_now(j, "norm check failed for client " + std::to_string(j));
    }

    {
        PayloadExclusion pe;
        pe.excluded.assign(fed.excluded().begin(), fed.excluded().end());
        broadcast(Phase::Exclusion, 0, pe);
    }

    // --- Step 4: shared trust-score evaluation over the active set. ---
    std::vector<std::uint32_t> active4;
    for (std::uint32_t j : sharers)
        if (!is_excluded(j)) active4.push_back(j);
    if (active4.empty()) return abort_round("no active clients");
    out.aggregated_targets = active4;

    TsSchedule plan = ts_program(params.h, dims.q, active4);
    std::vector<Fp> coeffs_emb = embed_coeffs(plan, mod);

    std::vector<std::uint32_t> evaluators;
    for (std::uint32_t i : initial_active)
        if (!is_excluded(i)) evaluators.push_back(i);

    for (std::uint32_t i : initial_active) {
        fpipe[i]->active = active4;
        for (std::uint32_t j : active4) fpipe[i]->cosine(j, u0_emb);
        if (!is_excluded(i) && !dropped_at(i, 4)) {
            ctx[i]->pipe.active = active4;
            for (std::uint32_t j : active4) ctx[i]->pipe.cosine(j, u0_emb);
        }
    }

    // Power chain: k-1 masked multiplications per target.
    for (int m = 0; m + 1 < dims.k; ++m) {
        std::map<std::uint32_t, PayloadScalarOpen> msgs;
        for (std::uint32_t i : evaluators) {
            if (is_excluded(i) || dropped_at(i, 4)) continue;
            PayloadScalarOpen p;
            for (std::uint32_t j : active4) {
                auto [d, e] = ctx[i]->pipe.mul_open_power(j, m);
                p.items.push_back({j, d, e});
            }
            auto delivered =
                client_send(i, Phase::MulOpen, static_cast<std::uint8_t>(m), std::move(p));
            if (delivered) msgs[i] = std::get<PayloadScalarOpen>(*delivered);
        }
        struct MulTraces {
            KeyTrace d, e;
        };
        std::vector<std::map<std::uint32_t, MulTraces>> tr(static_cast<std::size_t>(n));
        for (std::uint32_t i : initial_active)
            for (std::uint32_t j : active4) {
                auto [d, e] = fpipe[i]->mul_open_power(j, m);
                tr[i][j] = {d, e};
            }
        for (auto& [i, msg] : msgs) {
            bool ok = msg.items.size() == active4.size();
            for (const auto& item : msg.items) {
                if (!ok) break;
                auto it = tr[i].find(item.target);
                if (it == tr[i].end() || !mac_verify(item.d, alpha, it->second.d) ||
                    !mac_verify(item.e, alpha, it->second.e))
                    ok = false;
            }
            if (!ok) exclude_now(i, "mac failure in mul_open from client " + std::to_string(i));
        }
        PayloadScalarOpened opened;
        for (std::uint32_t j : active4) {
            std::vector<std::pair<std::uint32_t, Fp>> ds, es;
            for (const auto& [i, msg] : msgs) {
                if (is_excluded(i)) continue;
                for (const auto& item : msg.items)
                    if (item.target == j) {
                        ds.emplace_back(i, item.d.value);
                        es.emplace_back(i, item.e.value);
                        break;
                    }
            }
            auto dv = reconstruct_public(ds);
            auto ev = reconstruct_public(es);
            if (!dv || !ev) return abort_round("insufficient shares");
            opened.items.push_back({j, *dv, *ev});
        }
        broadcast(Phase::MulOpened, static_cast<std::uint8_t>(m), opened);
        for (std::uint32_t i : initial_active) {
            for (const auto& item : opened.items) {
                fpipe[i]->mul_complete_power(item.target, item.d, item.e);
                if (!is_excluded(i) && !dropped_at(i, 4))
                    ctx[i]->pipe.mul_complete_power(item.target, item.d, item.e);
            }
        }
    }

    // Trust scores and the scalar-vector products TS_j * u_j.
    for (std::uint32_t i : initial_active) {
        for (std::uint32_t j : active4) {
            fpipe[i]->form_ts(j, coeffs_emb);
            if (!is_excluded(i) && !dropped_at(i, 4)) ctx[i]->pipe.form_ts(j, coeffs_emb);
        }
    }

    std::map<std::uint32_t, PayloadSvOpen> sv_msgs;
    for (std::uint32_t i : evaluators) {
        if (is_excluded(i) || dropped_at(i, 4)) continue;
        PayloadSvOpen p;
        for (std::uint32_t j : active4) {
            auto [d, e] = ctx[i]->pipe.sv_open_target(j);
            p.items.push_back({j, d, std::move(e)});
        }
        out.triples_consumed[i][1] = ctx[i]->bundle.scalars.consumed();
        auto delivered = client_send(i, Phase::SvOpen, 0, std::move(p));
        if (delivered) sv_msgs[i] = std::get<PayloadSvOpen>(*delivered);
    }
    {
        struct SvTraces {
            KeyTrace d;
            std::vector<KeyTrace> e;
        };
        std::vector<std::map<std::uint32_t, SvTraces>> tr(static_cast<std::size_t>(n));
        for (std::uint32_t i : initial_active)
            for (std::uint32_t j : active4) {
                auto [d, e] = fpipe[i]->sv_open_target(j);
                tr[i][j] = {d, std::move(e)};
            }
        for (auto& [i, msg] : sv_msgs) {
            bool ok = msg.items.size() == active4.size();
            for (const auto& item : msg.items) {
                if (!ok) break;
                auto it = tr[i].find(item.target);
                if (it == tr[i].end() || item.e.size() != static_cast<std::size_t>(dims.d) ||
                    !mac_verify(item.d, alpha, it->second.d)) {
                    ok = false;
                    break;
                }
                for (int c = 0; c < dims.d; ++c)
                    if (!mac_verify(item.e[static_cast<std::size_t>(c)], alpha,
                                    it->second.e[static_cast<std::size_t>(c)])) {
                        ok = false;
                        break;
                    }
            }
            if (!ok) exclude_now(i, "mac failure in sv_open from client " + std::to_string(i));
        }
    }
    PayloadSvOpened sv_opened;
    for (std::uint32_t j : active4) {
        PayloadSvOpened::Item item;
        item.target = j;
        std::vector<std::pair<std::uint32_t, Fp>> ds;
        for (const auto& [i, msg] : sv_msgs) {
            if (is_excluded(i)) continue;
            for (const auto& mi : msg.items)
                if (mi.target == j) {
                    ds.emplace_back(i, mi.d.value);
                    break;
                }
        }
        auto dv = reconstruct_public(ds);
        if (!dv) return abort_round("insufficient shares");
        item.d = *dv;
        for (int c = 0; c < dims.d; ++c) {
            std::vector<std::pair<std::uint32_t, Fp>> es;
            for (const auto& [i, msg] : sv_msgs) {
                if (is_excluded(i)) continue;
                for (const auto& mi : msg.items)
                    if (mi.target == j) {
                        es.emplace_back(i, mi.e[static_cast<std::size_t>(c)].value);
                        break;
                    }
            }
            auto ev = reconstruct_public(es);
            if (!ev) return abort_round("insufficient shares");
            item.e.push_back(*ev);
        }
        sv_opened.items.push_back(std::move(item));
    }
    broadcast(Phase::SvOpened, 0, sv_opened);
    for (std::uint32_t i : initial_active) {
        for (const auto& item : sv_opened.items) {
            fpipe[i]->sv_complete_target(item.target, item.d, item.e);
            if (!is_excluded(i) && !dropped_at(i, 4))
                ctx[i]->pipe.sv_complete_target(item.target, item.d, item.e);
        }
        fpipe[i]->form_sigmas();
        if (!is_excluded(i) && !dropped_at(i, 4)) ctx[i]->pipe.form_sigmas();
    }

    // Lambda masking of Sigma1 and Sigma2.
    std::map<std::uint32_t, PayloadLambdaOpen> lam_msgs;
    for (std::uint32_t i : evaluators) {
        if (is_excluded(i) || dropped_at(i, 4)) continue;
        PayloadLambdaOpen p{};
        auto [d1, e1] = ctx[i]->pipe.lambda1_open();
        auto [d2, e2] = ctx[i]->pipe.lambda2_open();
        p.s1_d = d1;
        p.s1_e = e1;
        p.s2_d = d2;
        p.s2_e = std::move(e2);
        out.triples_consumed[i][1] = ctx[i]->bundle.scalars.consumed();
        out.triples_consumed[i][2] = ctx[i]->bundle.scalar_vecs.consumed();
        auto delivered = client_send(i, Phase::LambdaOpen, 0, std::move(p));
        if (delivered) lam_msgs[i] = std::get<PayloadLambdaOpen>(*delivered);
    }
    {
        std::vector<std::optional<std::tuple<KeyTrace, KeyTrace, KeyTrace, std::vector<KeyTrace>>>>
            tr(static_cast<std::size_t>(n));
        for (std::uint32_t i : initial_active) {
            auto [d1, e1] = fpipe[i]->lambda1_open();
            auto [d2, e2] = fpipe[i]->lambda2_open();
            tr[i] = std::make_tuple(d1, e1, d2, std::move(e2));
        }
        for (auto& [i, msg] : lam_msgs) {
            auto& [td1, te1, td2, te2] = *tr[i];
            bool ok = msg.s2_e.size() == static_cast<std::size_t>(dims.d) &&
                      mac_verify(msg.s1_d, alpha, td1) && mac_verify(msg.s1_e, alpha, te1) &&
                      mac_verify(msg.s2_d, alpha, td2);
            for (int c = 0; c < dims.d && ok; ++c)
                if (!mac_verify(msg.s2_e[static_cast<std::size_t>(c)], alpha,
                                te2[static_cast<std::size_t>(c)]))
                    ok = false;
            if (!ok) exclude_now(i, "mac failure in lambda_open from client " + std::to_string(i));
        }
    }
    PayloadLambdaOpened lam_opened;
    {
        std::vector<std::pair<std::uint32_t, Fp>> d1s, e1s, d2s;
        for (const auto& [i, msg] : lam_msgs) {
            if (is_excluded(i)) continue;
            d1s.emplace_back(i, msg.s1_d.value);
            e1s.emplace_back(i, msg.s1_e.value);
            d2s.emplace_back(i, msg.s2_d.value);
        }
        auto d1 = reconstruct_public(d1s);
        auto e1 = reconstruct_public(e1s);
        auto d2 = reconstruct_public(d2s);
        if (!d1 || !e1 || !d2) return abort_round("insufficient shares");
        lam_opened.s1_d = *d1;
        lam_opened.s1_e = *e1;
        lam_opened.s2_d = *d2;
        for (int c = 0; c < dims.d; ++c) {
            std::vector<std::pair<std::uint32_t, Fp>> e2s;
            for (const auto& [i, msg] : lam_msgs) {
                if (is_excluded(i)) continue;
                e2s.emplace_back(i, msg.s2_e[static_cast<std::size_t>(c)].value);
            }
            auto ev = reconstruct_public(e2s);
            if (!ev) return abort_round("insufficient shares");
            lam_opened.s2_e.push_back(*ev);
        }
    }
    broadcast(Phase::LambdaOpened, 0, lam_opened);
    for (std::uint32_t i : initial_active) {
        fpipe[i]->lambda_complete(lam_opened.s1_d, lam_opened.s1_e, lam_opened.s2_d,
                                  lam_opened.s2_e);
        if (!is_excluded(i) && !dropped_at(i, 4))
            ctx[i]->pipe.lambda_complete(lam_opened.s1_d, lam_opened.s1_e, lam_opened.s2_d,
                                         lam_opened.s2_e);
    }

    // --- Step 5: verified shares in, masked reconstruction, decode. ---
    std::map<std::uint32_t, PayloadAggShare> agg_msgs;
    for (std::uint32_t i : evaluators) {
        if (is_excluded(i) || dropped_at(i, 5)) continue;
        PayloadAggShare p{};
        p.s1 = *ctx[i]->pipe.lsig1;
        p.s2 = ctx[i]->pipe.lsig2;
        auto delivered = client_send(i, Phase::AggShare, 0, std::move(p));
        if (delivered) agg_msgs[i] = std::get<PayloadAggShare>(*delivered);
    }
    for (auto& [i, msg] : agg_msgs) {
        bool ok = msg.s2.size() == static_cast<std::size_t>(dims.d) &&
                  mac_verify(msg.s1, alpha, *fpipe[i]->lsig1);
        for (int c = 0; c < dims.d && ok; ++c)
            if (!mac_verify(msg.s2[static_cast<std::size_t>(c)], alpha,
                            fpipe[i]->lsig2[static_cast<std::size_t>(c)]))
                ok = false;
        if (!ok) exclude_now(i, "mac failure in agg_share from client " + std::to_string(i));
    }

    std::vector<std::pair<std::uint32_t, Fp>> s1_shares;
    for (const auto& [i, msg] : agg_msgs) {
        if (is_excluded(i)) continue;
        s1_shares.emplace_back(i, msg.s1.value);
    }
    auto lsig1 = reconstruct_public(s1_shares);
    if (!lsig1) return abort_round("insufficient shares");
    out.transcript.new_exclusions.assign(newly_excluded.begin(), newly_excluded.end());
    if (lsig1->is_zero()) return abort_round("zero trust denominator");

    ReconstructionBounds bounds =
        reconstruction_bounds(dims.n, dims.d, dims.k, dims.q, dims.coeff_scale);
    Fp inv_lsig1 = inverse(*lsig1);
    out.aggregate = RealVec::Zero(dims.d);
    out.ratios.reserve(static_cast<std::size_t>(dims.d));
    for (int c = 0; c < dims.d; ++c) {
        std::vector<std::pair<std::uint32_t, Fp>> s2c;
        for (const auto& [i, msg] : agg_msgs) {
            if (is_excluded(i)) continue;
            s2c.emplace_back(i, msg.s2[static_cast<std::size_t>(c)].value);
        }
        auto lsig2c = reconstruct_public(s2c);
        if (!lsig2c) return abort_round("insufficient shares");
        Fp rho = *lsig2c * inv_lsig1;
        Rational rat;
        try {
            rat = rational_reconstruct(rho, bounds.num_bound, bounds.den_bound);
        } catch (const FieldError&) {
            return abort_round("reconstruction failure");
        }
        out.aggregate[c] = root_norm * dequantize_ratio(rat.num, rat.den, dims.q);
        out.ratios.push_back(std::move(rat));
    }

    RealVec w = fed.model();
    w -= params.eta * out.aggregate;
    fed.set_model(std::move(w));
    out.model_updated = true;
    out.transcript.new_exclusions.assign(newly_excluded.begin(), newly_excluded.end());
    return out;
}

} // namespace secagg
