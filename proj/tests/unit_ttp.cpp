#include <doctest.h>

#include "secagg/ttp.hpp"

#include <map>

using namespace secagg;

namespace {

ProtocolDims small_dims() {
    ProtocolDims d;
    d.n = 3;
    d.t = 1;
    d.d = 2;
    d.k = 3;
    d.q = 8;
    d.coeff_scale = 8;
    d.iterations = 2;
    return d;
}

} // namespace

TEST_CASE("initialization hands out budget-sized, verifying bundles") {
    ProtocolDims dims = small_dims();
    Ttp ttp(dims, rng::Stream(11));
    TtpOutput out = std::move(ttp).initialize();
    REQUIRE(out.bundles.size() == 3);
    REQUIRE(out.keys != nullptr);

    std::vector<IterationBundle> mats;
    for (ClientBundle& b : out.bundles) mats.push_back(b.iteration(0));
    TripleBudget budget = triple_budget(dims.n, dims.k, dims.d);
    for (const IterationBundle& m : mats) {
        CHECK(static_cast<int>(m.dots.size()) == budget.dot);
        CHECK(static_cast<int>(m.scalars.size()) == budget.scalar);
        CHECK(static_cast<int>(m.scalar_vecs.size()) == budget.scalar_vec);
    }
    AuditReport rep = audit_iteration(mats, *out.keys, 0);
    CHECK(rep.clean());
}

TEST_CASE("audit flags corruption") {
    ProtocolDims dims = small_dims();
    Ttp ttp(dims, rng::Stream(12));
    TtpOutput out = std::move(ttp).initialize();
    std::vector<IterationBundle> mats;
    for (ClientBundle& b : out.bundles) mats.push_back(b.iteration(0));

    SUBCASE("corrupt c-share value") {
        // Rebuild the scalar pool with a perturbed c-share on party 0.
        std::vector<ScalarTripleView<TaggedShare>> items;
        for (std::size_t s = 0; s < mats[0].scalars.size(); ++s) items.push_back(mats[0].scalars.at(s));
        items[0].c.value += Fp::one(out.keys->modulus());
        mats[0].scalars = Pool<ScalarTripleView<TaggedShare>>(std::move(items));
        AuditReport rep = audit_iteration(mats, *out.keys, 0);
        CHECK(!rep.clean());
    }
    SUBCASE("corrupt a tag (equivalent to a missing/wrong beta entry)") {
        mats[1].lambda_share.tag += Fp::one(out.keys->modulus());
        AuditReport rep = audit_iteration(mats, *out.keys, 0);
        CHECK(!rep.clean());
    }
}

TEST_CASE("pads reconstruct to the owner's plain value") {
    ProtocolDims dims = small_dims();
    Ttp ttp(dims, rng::Stream(13));
    TtpOutput out = std::move(ttp).initialize();
    std::vector<IterationBundle> mats;
    for (ClientBundle& b : out.bundles) mats.push_back(b.iteration(0));
    for (int j = 0; j < dims.n; ++j) {
        for (int c = 0; c < dims.d; ++c) {
            std::vector<ValueShare> sh;
            for (int i = 0; i <= dims.t; ++i)
                sh.push_back({static_cast<ShareIndex>(i + 1),
                              mats[static_cast<std::size_t>(i)]
                                  .r_shares[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)]
                                  .value});
            CHECK(reconstruct(sh, dims.t) ==
                  mats[static_cast<std::size_t>(j)].r_own[static_cast<std::size_t>(c)]);
        }
    }
}

TEST_CASE("monotone consumption and horizon") {
    ProtocolDims dims = small_dims();
    Ttp ttp(dims, rng::Stream(14));
    TtpOutput out = std::move(ttp).initialize();
    ClientBundle& b = out.bundles[0];
    CHECK_NOTHROW(b.iteration(0));
    CHECK_THROWS_AS(b.iteration(0), FieldError); // pad reuse
    CHECK_NOTHROW(b.iteration(1));
    CHECK_THROWS_AS(b.iteration(2), FieldError); // preprocessing exhausted
}

TEST_CASE("lambda is nonzero and plaintext digests gate") {
    ProtocolDims dims = small_dims();
    {
        Ttp ttp(dims, rng::Stream(15));
        TtpOutput out = std::move(ttp).initialize(/*with_digests=*/true);
        for (int g = 0; g < dims.iterations; ++g)
            CHECK(!out.keys->plaintext(g, Obj::Lambda, 0, 0).is_zero());
        // Triple digests agree with reconstruction.
        std::vector<IterationBundle> mats;
        for (ClientBundle& b : out.bundles) mats.push_back(b.iteration(0));
        std::vector<ValueShare> sh;
        for (int i = 0; i <= dims.t; ++i)
            sh.push_back({static_cast<ShareIndex>(i + 1),
                          mats[static_cast<std::size_t>(i)].scalars.at(0).c.value});
        CHECK(reconstruct(sh, dims.t) == out.keys->plaintext(0, Obj::ScalarC, 0, 0));
    }
    {
        Ttp ttp(dims, rng::Stream(15));
        TtpOutput out = std::move(ttp).initialize(/*with_digests=*/false);
        CHECK_THROWS_AS(out.keys->plaintext(0, Obj::Lambda, 0, 0), FieldError);
    }
}

TEST_CASE("bundle serialization round-trip") {
    ProtocolDims dims = small_dims();
    Ttp ttp(dims, rng::Stream(16));
    TtpOutput out = std::move(ttp).initialize();
    IterationBundle b = out.bundles[1].iteration(0);
    std::vector<std::uint8_t> bytes = serialize_bundle(b, *out.modulus);
    IterationBundle back = deserialize_bundle(bytes, *out.modulus);
    std::vector<std::uint8_t> bytes2 = serialize_bundle(back, *out.modulus);
    CHECK(bytes == bytes2);
    CHECK(back.r_own == b.r_own);
    CHECK(back.lambda_share.value == b.lambda_share.value);
    CHECK(back.lambda_share.tag == b.lambda_share.tag);
    CHECK(back.dots.size() == b.dots.size());
}

TEST_CASE("tiny-field override and bundle privacy") {
    // Any single colluding bundle sees only a uniform share of another
    // client's pad: exhaustive over the sharing polynomial at p=11.
    Modulus p11(mpz_class(11));
    for (std::uint64_t r = 0; r < 11; ++r) {
        std::map<std::uint64_t, int> hist;
        for (std::uint64_t coeff = 0; coeff < 11; ++coeff) {
            std::vector<Fp> cs{Fp(p11, coeff)};
            hist[share_at(Fp(p11, r), cs, 2).to_u64()]++;
        }
        CHECK(hist.size() == 11);
        for (const auto& [v, c] : hist) CHECK(c == 1);
    }

    // The override also drives end-to-end tiny-field initialization.
    ProtocolDims dims = small_dims();
    dims.d = 1;
    dims.q = 1;
    dims.coeff_scale = 1;
    auto mod = std::make_shared<const Modulus>(mpz_class(11));
    Ttp ttp(dims, rng::Stream(17));
    TtpOutput out = std::move(ttp).initialize(false, mod);
    CHECK(out.modulus->p() == 11);
    std::vector<IterationBundle> mats;
    for (ClientBundle& b : out.bundles) mats.push_back(b.iteration(0));
    CHECK(audit_iteration(mats, *out.keys, 0).clean());
}
