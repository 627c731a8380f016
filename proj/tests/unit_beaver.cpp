#include <doctest.h>

#include "secagg/beaver.hpp"

#include <map>

using namespace secagg;

namespace {

// Reconstructs the plain value behind one component across party views.
Fp recon(const std::vector<TaggedShare>& by_party, int t) {
    std::vector<ValueShare> vs;
    for (std::size_t i = 0; i < by_party.size(); ++i)
        vs.push_back({static_cast<ShareIndex>(i + 1), by_party[i].value});
    return reconstruct(vs, t);
}

} // namespace

TEST_CASE("triple budget counts") {
    TripleBudget b = triple_budget(10, 3, 50);
    CHECK(b.dot == 10);
    CHECK(b.scalar == 21);
    CHECK(b.scalar_vec == 11);
    CHECK(b.dot_dim == 50);

    TripleBudget tiny = triple_budget(1, 1, 1);
    CHECK(tiny.dot == 1);
    CHECK(tiny.scalar == 1);
    CHECK(tiny.scalar_vec == 2);
}

TEST_CASE("generated triples satisfy their relations and tags") {
    Modulus m(mpz_class("2305843009213693951"));
    rng::Stream rs(1);
    Fp alpha = sample_nonzero(m, rs);

    GeneratedScalarTriple st = gen_scalar_triple(m, 4, 1, alpha, rs);
    std::vector<TaggedShare> as, bs, cs;
    for (const auto& p : st.parties) {
        as.push_back(p.a);
        bs.push_back(p.b);
        cs.push_back(p.c);
    }
    CHECK(recon(as, 1) == st.a);
    CHECK(recon(cs, 1) == st.a * st.b);
    for (std::size_t i = 0; i < st.parties.size(); ++i)
        CHECK(st.parties[i].a.tag == alpha * st.parties[i].a.value + st.beta_a[i]);

    GeneratedDotTriple dt = gen_dot_triple(m, 4, 1, 3, alpha, rs);
    Fp w_expect = Fp::zero(m);
    for (int c = 0; c < 3; ++c) w_expect += dt.o[static_cast<std::size_t>(c)] * dt.v[static_cast<std::size_t>(c)];
    std::vector<TaggedShare> ws;
    for (const auto& p : dt.parties) ws.push_back(p.w);
    CHECK(recon(ws, 1) == w_expect);
    CHECK(dt.w == w_expect);

    GeneratedScalarVecTriple sv = gen_scalar_vec_triple(m, 4, 1, 3, alpha, rs);
    for (int c = 0; c < 3; ++c) {
        std::vector<TaggedShare> zs;
        for (const auto& p : sv.parties) zs.push_back(p.z[static_cast<std::size_t>(c)]);
        CHECK(recon(zs, 1) == sv.x * sv.y[static_cast<std::size_t>(c)]);
    }
}

TEST_CASE("plaintext shadow of the masked multiplication") {
    // With t=0 and a single party, shares equal the plain values:
    // x=3 y=4 a=1 b=2 c=2 opens d=2 e=2 and completes to 12.
    Modulus m(mpz_class(101));
    Fp alpha = Fp::one(m);
    auto plain = [&](std::uint64_t v) { return make_tagged(Fp(m, v), {alpha, Fp::zero(m)}); };
    ScalarTripleView<TaggedShare> triple{plain(1), plain(2), plain(2)};
    auto [d, e] = mul_open(plain(3), plain(4), triple);
    CHECK(d.value.to_u64() == 2);
    CHECK(e.value.to_u64() == 2);
    TaggedShare z = mul_complete(triple, d.value, e.value);
    CHECK(z.value.to_u64() == 12);
}

TEST_CASE("random multiplications match plaintext for all three shapes") {
    Modulus m(mpz_class("2305843009213693951"));
    rng::Stream rs(2);
    Fp alpha = sample_nonzero(m, rs);
    const int n = 4, t = 1, d = 3;

    for (int trial = 0; trial < 1000; ++trial) {
        // Scalar.
        GeneratedScalarTriple st = gen_scalar_triple(m, n, t, alpha, rs);
        Fp x = Fp::uniform(m, rs), y = Fp::uniform(m, rs);
        auto xs = share(x, n, t, rs);
        auto ys = share(y, n, t, rs);
        Fp d_open, e_open;
        {
            std::vector<ValueShare> dsh, esh;
            for (int i = 0; i < n; ++i) {
                TaggedShare xi = make_tagged(xs[static_cast<std::size_t>(i)].value, {alpha, Fp::zero(m)});
                TaggedShare yi = make_tagged(ys[static_cast<std::size_t>(i)].value, {alpha, Fp::zero(m)});
                auto [di, ei] = mul_open(xi, yi, st.parties[static_cast<std::size_t>(i)]);
                dsh.push_back({static_cast<ShareIndex>(i + 1), di.value});
                esh.push_back({static_cast<ShareIndex>(i + 1), ei.value});
            }
            d_open = reconstruct(dsh, t);
            e_open = reconstruct(esh, t);
        }
        CHECK(d_open == x - st.a);
        std::vector<TaggedShare> zs;
        for (int i = 0; i < n; ++i)
            zs.push_back(mul_complete(st.parties[static_cast<std::size_t>(i)], d_open, e_open));
        CHECK(recon(zs, t) == x * y);

        if (trial >= 100) continue; // vector shapes are costlier

        // Dot.
        GeneratedDotTriple dt = gen_dot_triple(m, n, t, d, alpha, rs);
        std::vector<Fp> xv, yv;
        Fp dot_expect = Fp::zero(m);
        std::vector<std::vector<ValueShare>> xsh(static_cast<std::size_t>(d)), ysh(static_cast<std::size_t>(d));
        for (int c = 0; c < d; ++c) {
            xv.push_back(Fp::uniform(m, rs));
            yv.push_back(Fp::uniform(m, rs));
            dot_expect += xv.back() * yv.back();
            xsh[static_cast<std::size_t>(c)] = share(xv.back(), n, t, rs);
            ysh[static_cast<std::size_t>(c)] = share(yv.back(), n, t, rs);
        }
        std::vector<Fp> dvec, evec;
        for (int c = 0; c < d; ++c) {
            std::vector<ValueShare> dsh, esh;
            for (int i = 0; i < n; ++i) {
                Fp di = xsh[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)].value -
                        dt.parties[static_cast<std::size_t>(i)].o[static_cast<std::size_t>(c)].value;
                Fp ei = ysh[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)].value -
                        dt.parties[static_cast<std::size_t>(i)].v[static_cast<std::size_t>(c)].value;
                dsh.push_back({static_cast<ShareIndex>(i + 1), di});
                esh.push_back({static_cast<ShareIndex>(i + 1), ei});
            }
            dvec.push_back(reconstruct(dsh, t));
            evec.push_back(reconstruct(esh, t));
        }
        std::vector<TaggedShare> dots;
        for (int i = 0; i < n; ++i)
            dots.push_back(dot_complete(dt.parties[static_cast<std::size_t>(i)], dvec, evec));
        CHECK(recon(dots, t) == dot_expect);

        // Scalar-vector.
        GeneratedScalarVecTriple sv = gen_scalar_vec_triple(m, n, t, d, alpha, rs);
        Fp s = Fp::uniform(m, rs);
        auto ssh = share(s, n, t, rs);
        std::vector<Fp> vvec;
        std::vector<std::vector<ValueShare>> vsh(static_cast<std::size_t>(d));
        for (int c = 0; c < d; ++c) {
            vvec.push_back(Fp::uniform(m, rs));
            vsh[static_cast<std::size_t>(c)] = share(vvec.back(), n, t, rs);
        }
        std::vector<ValueShare> dsh;
        for (int i = 0; i < n; ++i)
            dsh.push_back({static_cast<ShareIndex>(i + 1),
                           ssh[static_cast<std::size_t>(i)].value -
                               sv.parties[static_cast<std::size_t>(i)].x.value});
        Fp d_sv = reconstruct(dsh, t);
        std::vector<Fp> e_sv;
        for (int c = 0; c < d; ++c) {
            std::vector<ValueShare> esh;
            for (int i = 0; i < n; ++i)
                esh.push_back({static_cast<ShareIndex>(i + 1),
                               vsh[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)].value -
                                   sv.parties[static_cast<std::size_t>(i)].y[static_cast<std::size_t>(c)].value});
            e_sv.push_back(reconstruct(esh, t));
        }
        for (int c = 0; c < d; ++c) {
            std::vector<TaggedShare> zc;
            for (int i = 0; i < n; ++i) {
                auto out = scalar_vec_complete(sv.parties[static_cast<std::size_t>(i)], d_sv, e_sv);
                zc.push_back(out[static_cast<std::size_t>(c)]);
            }
            CHECK(recon(zc, t) == s * vvec[static_cast<std::size_t>(c)]);
        }
    }
}

TEST_CASE("degree preservation: every t+1 subset reconstructs the same value") {
    Modulus m(mpz_class(101));
    rng::Stream rs(3);
    Fp alpha = sample_nonzero(m, rs);
    const int n = 5, t = 2;
    GeneratedScalarTriple st = gen_scalar_triple(m, n, t, alpha, rs);
    Fp x = Fp::uniform(m, rs), y = Fp::uniform(m, rs);
    auto xs = share(x, n, t, rs);
    auto ys = share(y, n, t, rs);
    Fp d = x - st.a, e = y - st.b;
    (void)xs;
    (void)ys;
    std::vector<TaggedShare> zs;
    for (int i = 0; i < n; ++i)
        zs.push_back(mul_complete(st.parties[static_cast<std::size_t>(i)], d, e));
    // All C(5,3) subsets agree.
    Fp expect = x * y;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                std::vector<ValueShare> sub{{static_cast<ShareIndex>(i + 1), zs[static_cast<std::size_t>(i)].value},
                                            {static_cast<ShareIndex>(j + 1), zs[static_cast<std::size_t>(j)].value},
                                            {static_cast<ShareIndex>(k + 1), zs[static_cast<std::size_t>(k)].value}};
                CHECK(reconstruct(sub, t) == expect);
            }
}

TEST_CASE("openings are uniform, exhaustive at p=11") {
    Modulus m(mpz_class(11));
    // d = x - a over uniform a is uniform for every x; joint (d, e) covers
    // the full square for every (x, y).
    for (std::uint64_t x = 0; x < 11; ++x) {
        for (std::uint64_t y = 0; y < 11; ++y) {
            std::map<std::pair<std::uint64_t, std::uint64_t>, int> hist;
            for (std::uint64_t a = 0; a < 11; ++a)
                for (std::uint64_t b = 0; b < 11; ++b)
                    hist[{(Fp(m, x) - Fp(m, a)).to_u64(), (Fp(m, y) - Fp(m, b)).to_u64()}]++;
            CHECK(hist.size() == 121);
            for (const auto& [k, v] : hist) CHECK(v == 1);
        }
    }
}

TEST_CASE("one-time consumption") {
    Modulus m(mpz_class(11));
    Fp alpha = Fp::one(m);
    rng::Stream rs(4);
    GeneratedScalarTriple st = gen_scalar_triple(m, 2, 0, alpha, rs);
    Pool<ScalarTripleView<TaggedShare>> pool({st.parties[0]});
    CHECK_NOTHROW(pool.take(0));
    CHECK_THROWS_AS(pool.take(0), FieldError);
    CHECK_THROWS_AS(pool.take(1), FieldError); // exhausted
    CHECK(pool.consumed() == 1);
}
