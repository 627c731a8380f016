#include <doctest.h>

#include "secagg/adversary.hpp"
#include "secagg/flsim/aggregate.hpp"
#include "secagg/protocol.hpp"

#include <filesystem>
#include <functional>

using namespace secagg;

namespace {

struct Harness {
    ProtocolParams params;
    std::optional<FederatorState> fed;
    std::vector<ClientState> clients;
    rng::Stream master;
    rng::Stream update_rs;

    Harness(ProtocolDims dims, std::uint64_t seed, double eps = 0.02,
            std::shared_ptr<const Modulus> mod_override = nullptr,
            std::function<void(ProtocolParams&)> mutate = nullptr)
        : master(seed), update_rs(master.fork({0x75ULL})) {
        params = make_params(dims, eps, 0.5);
        if (mod_override) params.modulus = mod_override;
        if (mutate) mutate(params);
        Ttp ttp(dims, master.fork({0x74ULL}));
        TtpOutput out = std::move(ttp).initialize(false, params.modulus);
        for (int i = 0; i < dims.n; ++i)
            clients.emplace_back(i, std::move(out.bundles[static_cast<std::size_t>(i)]),
                                 master.fork({0x63ULL, static_cast<std::uint64_t>(i)}));
        fed.emplace(params, std::move(out.keys), RealVec::Zero(dims.d),
                    master.fork({0x66ULL}));
    }

    RealVec random_unit(int d) {
        RealVec v(d);
        for (int c = 0; c < d; ++c) v[c] = 2.0 * update_rs.next_unit() - 1.0;
        return v / v.norm();
    }

    RoundInputs make_inputs(int g) {
        RoundInputs in;
        in.g = g;
        const int d = params.dims.d;
        in.root_update = random_unit(d);
        for (int i = 0; i < params.dims.n; ++i) in.client_updates.push_back(random_unit(d));
        return in;
    }

    // The independent plain-integer shadow with bit-identical quantization.
    // Mirrors exclusion persistence: already-excluded clients do not share.
    flsim::FixedpointResult oracle(const RoundInputs& in) {
        std::vector<QuantizedUpdate> qus;
        std::vector<std::uint32_t> ids;
        for (int i = 0; i < params.dims.n; ++i) {
            if (fed->excluded().count(static_cast<std::uint32_t>(i))) continue;
            ids.push_back(static_cast<std::uint32_t>(i));
            qus.push_back(encode_client_update(clients[static_cast<std::size_t>(i)].rng(), in.g,
                                               in.client_updates[static_cast<std::size_t>(i)],
                                               params.dims.q));
        }
        QuantizedUpdate q0 = encode_root_update(fed->rng(), in.g, in.root_update, params.dims.q);
        flsim::FixedpointResult r = flsim::fltrust_poly_fixedpoint_oracle(qus, q0, params.h,
                                                                          params.eps_num,
                                                                          params.eps_den);
        for (std::uint32_t& a : r.active) a = ids[a];
        return r;
    }
};

ProtocolDims dims_small(int n = 4, int t = 1, int d = 6, int q = 256, int iters = 4) {
    ProtocolDims dims;
    dims.n = n;
    dims.t = t;
    dims.d = d;
    dims.k = 3;
    dims.q = q;
    dims.coeff_scale = q;
    dims.iterations = iters;
    return dims;
}

} // namespace

TEST_CASE("secure rounds decode to the exact fixed-point oracle") {
    Harness h(dims_small(), 101);
    for (int g = 0; g < 4; ++g) {
        RoundInputs in = h.make_inputs(g);
        flsim::FixedpointResult expect = h.oracle(in);
        RoundOutput out = run_iteration(*h.fed, h.clients, in);
        REQUIRE(!out.aborted);
        REQUIRE(expect.defined);
        CHECK(out.aggregated_targets == expect.active);
        REQUIRE(out.ratios.size() == expect.ratios.size());
        for (std::size_t c = 0; c < out.ratios.size(); ++c) {
            CHECK(out.ratios[c].num == expect.ratios[c].num);
            CHECK(out.ratios[c].den == expect.ratios[c].den);
        }
    }
}

TEST_CASE("single client: trust score cancels to the quantized update") {
    Harness h(dims_small(1, 0, 5, 256, 1), 111);
    RoundInputs in = h.make_inputs(0);
    QuantizedUpdate qu =
        encode_client_update(h.clients[0].rng(), 0, in.client_updates[0], h.params.dims.q);
    RoundOutput out = run_iteration(*h.fed, h.clients, in);
    REQUIRE(!out.aborted);
    for (int c = 0; c < h.params.dims.d; ++c) {
        // ratio reduces to u_c / 1 (scaled by q in dequantize).
        mpz_class expect_num(static_cast<long>(qu.coords[static_cast<std::size_t>(c)]));
        mpz_class g;
        mpz_gcd(g.get_mpz_t(), expect_num.get_mpz_t(), mpz_class(1).get_mpz_t());
        CHECK(out.ratios[static_cast<std::size_t>(c)].num == expect_num);
        CHECK(out.ratios[static_cast<std::size_t>(c)].den == 1);
    }
    // Real aggregate: |u0| * u_c / q within floating error.
    const double norm0 = in.root_update.norm();
    for (int c = 0; c < h.params.dims.d; ++c)
        CHECK(out.aggregate[c] ==
              doctest::Approx(norm0 * static_cast<double>(qu.coords[static_cast<std::size_t>(c)]) /
                              h.params.dims.q));
}

TEST_CASE("dropout invariance after step 2") {
    const int n = 5, s = 2;
    RealVec base_aggregate;
    std::vector<Rational> base_ratios;
    // Reference run without dropouts.
    for (int variant = -1; variant < 0; ++variant) {
        Harness h(dims_small(n, 1, 6, 256, 1), 202);
        RoundOutput out = run_iteration(*h.fed, h.clients, h.make_inputs(0));
        REQUIRE(!out.aborted);
        base_aggregate = out.aggregate;
        base_ratios = out.ratios;
    }
    // Every dropout set of size <= s, at each post-step-2 step.
    for (int step = 3; step <= 5; ++step) {
        for (int a = 0; a < n; ++a) {
            for (int b = a; b < n; ++b) {
                std::vector<DropoutEvent> evs;
                evs.push_back({static_cast<std::uint32_t>(a), 0, step});
                if (b != a) evs.push_back({static_cast<std::uint32_t>(b), 0, step});
                Harness h(dims_small(n, 1, 6, 256, 1), 202);
                RoundOutput out = run_iteration(*h.fed, h.clients, h.make_inputs(0), {}, evs);
                REQUIRE(!out.aborted);
                CHECK(out.aggregate == base_aggregate);
                for (std::size_t c = 0; c < base_ratios.size(); ++c) {
                    CHECK(out.ratios[c].num == base_ratios[c].num);
                    CHECK(out.ratios[c].den == base_ratios[c].den);
                }
            }
        }
    }
}

TEST_CASE("too many dropouts abort the round") {
    const int n = 3, t = 1;
    Harness h(dims_small(n, t, 4, 256, 1), 303);
    // All but one client silent from step 3: 1 < t+1 shares.
    std::vector<DropoutEvent> evs{{0, 0, 3}, {1, 0, 3}};
    RoundOutput out = run_iteration(*h.fed, h.clients, h.make_inputs(0), {}, evs);
    CHECK(out.aborted);
    CHECK(out.abort_reason == "insufficient shares");
}

TEST_CASE("protocol corruption is detected and the sender excluded") {
    for (const char* mode : {"value", "tag", "opening"}) {
        for (int step : {3, 4, 5}) {
            if (std::string(mode) == "opening" && step == 5) continue; // step 5 has no openings
            CAPTURE(mode);
            CAPTURE(step);
            Harness h(dims_small(5, 1, 6, 256, 2), 404);
            std::map<std::uint32_t, MessageTamper> tampers;
            tampers[2] = protocol_corruption(mode, step, h.params.modulus, 99);
            RoundOutput out = run_iteration(*h.fed, h.clients, h.make_inputs(0), tampers);
            REQUIRE(!out.aborted);
            CHECK(h.fed->excluded().count(2) == 1);
            CHECK(h.fed->excluded().size() == 1);
            // Verdict names the culprit.
            bool named = false;
            for (const std::string& v : out.transcript.verdicts)
                if (v.find("client 2") != std::string::npos) named = true;
            CHECK(named);
        }
    }
}

TEST_CASE("tampering detected mid-round leaves the honest result intact") {
    // Corruption at step 4/5 keeps the frozen target set: aggregate equals
    // the oracle over all norm-passing clients.
    Harness h(dims_small(5, 1, 6, 256, 1), 505);
    RoundInputs in = h.make_inputs(0);
    flsim::FixedpointResult expect = h.oracle(in);
    std::map<std::uint32_t, MessageTamper> tampers;
    tampers[3] = protocol_corruption("value", 5, h.params.modulus, 7);
    RoundOutput out = run_iteration(*h.fed, h.clients, in, tampers);
    REQUIRE(!out.aborted);
    CHECK(h.fed->excluded().count(3) == 1);
    CHECK(out.aggregated_targets == expect.active);
    for (std::size_t c = 0; c < out.ratios.size(); ++c) {
        CHECK(out.ratios[c].num == expect.ratios[c].num);
        CHECK(out.ratios[c].den == expect.ratios[c].den);
    }
}

TEST_CASE("zero update is flagged, excluded, and the round continues") {
    Harness h(dims_small(4, 1, 6, 256, 1), 606);
    RoundInputs in = h.make_inputs(0);
    in.client_updates[1] = RealVec::Zero(h.params.dims.d);
    RoundOutput out = run_iteration(*h.fed, h.clients, in);
    REQUIRE(!out.aborted);
    CHECK(h.fed->excluded().count(1) == 1);
    std::vector<std::uint32_t> expect_targets{0, 2, 3};
    CHECK(out.aggregated_targets == expect_targets);
}

TEST_CASE("all-zero discriminator aborts with a zero trust denominator") {
    ProtocolDims dims = dims_small(3, 1, 4, 256, 1);
    Harness h(dims, 707, 0.02, nullptr,
              [](ProtocolParams& p) { p.h.coeffs = {0.0, 0.0, 0.0, 0.0}; });
    RoundOutput out = run_iteration(*h.fed, h.clients, h.make_inputs(0));
    CHECK(out.aborted);
    CHECK(out.abort_reason == "zero trust denominator");
}

TEST_CASE("triple consumption matches the budget at full participation") {
    const int n = 4;
    ProtocolDims dims = dims_small(n, 1, 6, 256, 1);
    Harness h(dims, 808);
    RoundOutput out = run_iteration(*h.fed, h.clients, h.make_inputs(0));
    REQUIRE(!out.aborted);
    TripleBudget budget = triple_budget(n, dims.k, dims.d);
    for (int i = 0; i < n; ++i) {
        CHECK(out.triples_consumed[static_cast<std::size_t>(i)][0] ==
              static_cast<std::size_t>(budget.dot));
        CHECK(out.triples_consumed[static_cast<std::size_t>(i)][1] ==
              static_cast<std::size_t>(budget.scalar));
        CHECK(out.triples_consumed[static_cast<std::size_t>(i)][2] ==
              static_cast<std::size_t>(budget.scalar_vec));
    }
}

TEST_CASE("transcripts are deterministic and round-trip through the file format") {
    auto run_once = [&]() {
        Harness h(dims_small(4, 1, 5, 256, 1), 909, 0.02, nullptr,
                  [](ProtocolParams& p) { p.store_messages = true; });
        return run_iteration(*h.fed, h.clients, h.make_inputs(0));
    };
    RoundOutput a = run_once();
    RoundOutput b = run_once();
    REQUIRE(a.transcript.messages.size() == b.transcript.messages.size());
    Harness hw(dims_small(4, 1, 5, 16, 1), 909);
    const std::size_t width = hw.params.modulus->byte_width();
    std::vector<std::uint8_t> abytes, bbytes;
    for (const Message& m : a.transcript.messages) m.serialize(abytes, width);
    for (const Message& m : b.transcript.messages) m.serialize(bbytes, width);
    CHECK(abytes == bbytes);
    CHECK(a.aggregate == b.aggregate);

    // Byte counters populated for every message; file round-trip scans.
    CHECK(a.transcript.sent_bytes.size() > 0);
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "secagg_test_transcripts";
    fs::create_directories(dir);
    write_transcript(a.transcript, width, (dir / "r0.bin").string(), (dir / "r0.json").string());
    auto [records, payload_bytes] = scan_transcript((dir / "r0.bin").string());
    CHECK(records == a.transcript.messages.size());
    CHECK(payload_bytes > 0);
}
