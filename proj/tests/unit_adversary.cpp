#include <doctest.h>

#include "secagg/adversary.hpp"
#include "secagg/config.hpp"

using namespace secagg;
using flsim::Dataset;

namespace {

Dataset digits_like(int samples, std::uint64_t seed) {
    rng::Stream rs(seed);
    return flsim::synthetic_dataset(samples, 16, 10, 0.3, rs); // 4x4 "images"
}

} // namespace

TEST_CASE("label flip formula and involution") {
    Dataset d = digits_like(40, 1);
    Dataset f = label_flip(d);
    for (Eigen::Index i = 0; i < d.size(); ++i)
        CHECK(f.labels[i] == 9 - d.labels[i]);
    CHECK(f.labels.size() == d.labels.size());
    Dataset ff = label_flip(f);
    for (Eigen::Index i = 0; i < d.size(); ++i) CHECK(ff.labels[i] == d.labels[i]);
    // label 3 -> 6 at L=10.
    Dataset one = d;
    one.labels[0] = 3;
    CHECK(label_flip(one).labels[0] == 6);
}

TEST_CASE("trigger stamping") {
    Dataset d = digits_like(10, 2);
    Dataset t = apply_trigger(d, 3, 0, true);
    // 4x4 square layout: rows 0-2, cols 0-2 set to max.
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) CHECK(t.features(i, r * 4 + c) == 1.0);
        CHECK(t.labels[i] == 0);
    }
    Dataset keep = apply_trigger(d, 3, 0, false);
    for (Eigen::Index i = 0; i < keep.size(); ++i) CHECK(keep.labels[i] == d.labels[i]);
}

TEST_CASE("attack success rate is a fraction") {
    Dataset d = digits_like(50, 3);
    Dataset t = apply_trigger(d, 3, 0, false);
    flsim::ModelSpec spec{flsim::Arch::Logreg, 16, 10, 0};
    rng::Stream rs(4);
    flsim::Model m = flsim::init_model(spec, rs);
    double asr = attack_success_rate(m, t, 0);
    CHECK(asr >= 0.0);
    CHECK(asr <= 1.0);
    // A factor-1, no-trigger update path is just honest training: ASR on an
    // untriggered model against an all-zero-logit model is uniform-ish.
}

TEST_CASE("directed attack crafts a unit-norm update with workable trust") {
    rng::Stream rs(5);
    const int d = 12;
    RealVec u0(d);
    std::vector<RealVec> honest;
    for (int i = 0; i < d; ++i) u0[i] = rs.next_unit() - 0.5;
    for (int c = 0; c < 4; ++c) {
        RealVec u = u0;
        for (int i = 0; i < d; ++i) u[i] += 0.2 * (rs.next_unit() - 0.5);
        honest.push_back(u);
    }
    DiscriminatorPoly h = default_h(1024);
    RealVec crafted = directed_attack(honest, u0, h);
    CHECK(crafted.norm() == doctest::Approx(1.0)); // normalized: passes the norm check
    // Deterministic.
    RealVec again = directed_attack(honest, u0, h);
    CHECK((crafted - again).norm() == doctest::Approx(0.0));
    // Nonnegligible trust under h, and it opposes the honest mean.
    RealVec mean = RealVec::Zero(d);
    for (const RealVec& u : honest) mean += u / u.norm();
    mean /= mean.norm();
    CHECK(eval_real(h, crafted.dot(u0 / u0.norm())) > 1e-3);
    CHECK(crafted.dot(mean) < 0.9);

    // Variants stay unit-norm too.
    for (const char* rule : {"relu", "krum", "tmean"})
        CHECK(directed_attack(honest, u0, h, rule).norm() == doctest::Approx(1.0));
}

TEST_CASE("threat model bound is enforced") {
    AdversarySpec spec;
    spec.byzantine = {0, 1};
    spec.dropouts = {{2, 0, 3}};
    CHECK_NOTHROW(spec.validate(6, 2));
    CHECK_THROWS_AS(spec.validate(5, 2), std::invalid_argument);

    ExperimentConfig cfg;
    cfg.n = 5;
    cfg.e = 2;
    cfg.t = 2;
    cfg.s = 1;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("n:"), std::invalid_argument);
}

TEST_CASE("corruption tamper hits the intended component") {
    auto mod = std::make_shared<const Modulus>(mpz_class(101));
    Message m;
    m.phase = Phase::NormShare;
    m.iteration = 0;
    PayloadNormShares p;
    TaggedShare ts{Fp(*mod, 5u), Fp(*mod, 7u)};
    p.items.push_back({0, ts});
    m.payload = p;

    auto tamper_value = protocol_corruption("value", 3, mod, 1);
    Message mv = m;
    tamper_value(mv);
    auto& sv = std::get<PayloadNormShares>(mv.payload).items[0].share;
    CHECK(sv.value != ts.value);
    CHECK(sv.tag == ts.tag);

    auto tamper_tag = protocol_corruption("tag", 3, mod, 1);
    Message mt = m;
    tamper_tag(mt);
    auto& st = std::get<PayloadNormShares>(mt.payload).items[0].share;
    CHECK(st.value == ts.value);
    CHECK(st.tag != ts.tag);

    auto tamper_both = protocol_corruption("both", 3, mod, 1);
    Message mb = m;
    tamper_both(mb);
    auto& sb = std::get<PayloadNormShares>(mb.payload).items[0].share;
    CHECK(sb.value != ts.value);
    CHECK(sb.tag != ts.tag);

    // Wrong step: untouched.
    auto tamper_off = protocol_corruption("value", 4, mod, 1);
    Message mo = m;
    tamper_off(mo);
    auto& so = std::get<PayloadNormShares>(mo.payload).items[0].share;
    CHECK(so.value == ts.value);
}

TEST_CASE("dropout schedule leaves non-scheduled rounds untouched") {
    // Empty schedule: nothing suppressed (covered end-to-end in protocol
    // tests; here the config surface).
    ExperimentConfig cfg;
    cfg.n = 6;
    cfg.t = 1;
    cfg.s = 1;
    cfg.dropouts = {{3, 1, 4}};
    CHECK_NOTHROW(cfg.validate());
    cfg.dropouts.push_back({4, 1, 2});
    CHECK_THROWS(cfg.validate()); // two distinct dropouts > s
}
