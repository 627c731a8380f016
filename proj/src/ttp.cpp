#include "secagg/ttp.hpp"

#include <cstring>

#include "secagg/sss.hpp"

namespace secagg {

namespace {

constexpr std::uint64_t kVal = 0x76616cULL;
constexpr std::uint64_t kPoly = 0x706f6c79ULL;
constexpr std::uint64_t kBeta = 0x62657461ULL;
constexpr std::uint64_t kAlpha = 0x616c706861ULL;

std::uint64_t obj_id(Obj o) { return static_cast<std::uint64_t>(o); }

struct Derive {
    const Modulus& mod;
    const rng::Stream& root;
    int t;

    // Sampled plain values of an object; coordinates come in stream order.
    std::vector<Fp> values(int g, Obj kind, int slot, int count, bool nonzero = false) const {
        rng::Stream s = root.fork({kVal, static_cast<std::uint64_t>(g), obj_id(kind),
                                   static_cast<std::uint64_t>(slot)});
        std::vector<Fp> out;
        out.reserve(static_cast<std::size_t>(count));
        for (int c = 0; c < count; ++c)
            out.push_back(nonzero ? sample_nonzero(mod, s) : Fp::uniform(mod, s));
        return out;
    }

    std::vector<Fp> poly(int g, Obj kind, int slot, int coord) const {
        rng::Stream s = root.fork({kPoly, static_cast<std::uint64_t>(g), obj_id(kind),
                                   static_cast<std::uint64_t>(slot),
                                   static_cast<std::uint64_t>(coord)});
        std::vector<Fp> out;
        out.reserve(static_cast<std::size_t>(t));
        for (int j = 0; j < t; ++j) out.push_back(Fp::uniform(mod, s));
        return out;
    }

    Fp beta(int g, Obj kind, int slot, int coord, int index) const {
        rng::Stream s = root.fork({kBeta, static_cast<std::uint64_t>(g), obj_id(kind),
                                   static_cast<std::uint64_t>(slot),
                                   static_cast<std::uint64_t>(coord),
                                   static_cast<std::uint64_t>(index)});
        return Fp::uniform(mod, s);
    }

    // Share of one object coordinate at party `index`, tagged.
    TaggedShare tagged_share_at(int g, Obj kind, int slot, int coord, const Fp& value,
                                const Fp& alpha, int index) const {
        std::vector<Fp> coeffs = poly(g, kind, slot, coord);
        Fp sh = share_at(value, coeffs, static_cast<ShareIndex>(index + 1));
        return make_tagged(sh, MacKey{alpha, beta(g, kind, slot, coord, index)});
    }
};

IterationBundle materialize(const Modulus& mod, const ProtocolDims& dims, const rng::Stream& root,
                            const Fp& alpha, int g, int my_id) {
    if (g < 0 || g >= dims.iterations) throw FieldError("preprocessing exhausted");
    Derive dv{mod, root, dims.t};
    IterationBundle out;

    out.r_own = dv.values(g, Obj::RMask, my_id, dims.d);
    out.r_shares.resize(static_cast<std::size_t>(dims.n));
    for (int j = 0; j < dims.n; ++j) {
        std::vector<Fp> rj = dv.values(g, Obj::RMask, j, dims.d);
        auto& row = out.r_shares[static_cast<std::size_t>(j)];
        row.reserve(static_cast<std::size_t>(dims.d));
        for (int c = 0; c < dims.d; ++c)
            row.push_back(dv.tagged_share_at(g, Obj::RMask, j, c, rj[c], alpha, my_id));
    }

    Fp lambda = dv.values(g, Obj::Lambda, 0, 1, /*nonzero=*/true)[0];
    out.lambda_share = dv.tagged_share_at(g, Obj::Lambda, 0, 0, lambda, alpha, my_id);

    TripleBudget budget = triple_budget(dims.n, dims.k, dims.d);

    std::vector<DotTripleView<TaggedShare>> dots;
    dots.reserve(static_cast<std::size_t>(budget.dot));
    for (int s = 0; s < budget.dot; ++s) {
        std::vector<Fp> o = dv.values(g, Obj::DotO, s, dims.d);
        std::vector<Fp> v = dv.values(g, Obj::DotV, s, dims.d);
        Fp w = Fp::zero(mod);
        for (int c = 0; c < dims.d; ++c) w += o[c] * v[c];
        DotTripleView<TaggedShare> tv;
        tv.o.reserve(static_cast<std::size_t>(dims.d));
        tv.v.reserve(static_cast<std::size_t>(dims.d));
        for (int c = 0; c < dims.d; ++c) {
            tv.o.push_back(dv.tagged_share_at(g, Obj::DotO, s, c, o[c], alpha, my_id));
            tv.v.push_back(dv.tagged_share_at(g, Obj::DotV, s, c, v[c], alpha, my_id));
        }
        tv.w = dv.tagged_share_at(g, Obj::DotW, s, 0, w, alpha, my_id);
        dots.push_back(std::move(tv));
    }
    out.dots = Pool<DotTripleView<TaggedShare>>(std::move(dots));

    std::vector<ScalarTripleView<TaggedShare>> scalars;
    scalars.reserve(static_cast<std::size_t>(budget.scalar));
    for (int s = 0; s < budget.scalar; ++s) {
        Fp a = dv.values(g, Obj::ScalarA, s, 1)[0];
        Fp b = dv.values(g, Obj::ScalarB, s, 1)[0];
        Fp c = a * b;
        ScalarTripleView<TaggedShare> tv;
        tv.a = dv.tagged_share_at(g, Obj::ScalarA, s, 0, a, alpha, my_id);
        tv.b = dv.tagged_share_at(g, Obj::ScalarB, s, 0, b, alpha, my_id);
        tv.c = dv.tagged_share_at(g, Obj::ScalarC, s, 0, c, alpha, my_id);
        scalars.push_back(std::move(tv));
    }
    out.scalars = Pool<ScalarTripleView<TaggedShare>>(std::move(scalars));

    std::vector<ScalarVecTripleView<TaggedShare>> svs;
    svs.reserve(static_cast<std::size_t>(budget.scalar_vec));
    for (int s = 0; s < budget.scalar_vec; ++s) {
        Fp x = dv.values(g, Obj::SvX, s, 1)[0];
        std::vector<Fp> y = dv.values(g, Obj::SvY, s, dims.d);
        ScalarVecTripleView<TaggedShare> tv;
        tv.x = dv.tagged_share_at(g, Obj::SvX, s, 0, x, alpha, my_id);
        tv.y.reserve(static_cast<std::size_t>(dims.d));
        tv.z.reserve(static_cast<std::size_t>(dims.d));
        for (int c = 0; c < dims.d; ++c) {
            tv.y.push_back(dv.tagged_share_at(g, Obj::SvY, s, c, y[c], alpha, my_id));
            tv.z.push_back(dv.tagged_share_at(g, Obj::SvZ, s, c, x * y[c], alpha, my_id));
        }
        svs.push_back(std::move(tv));
    }
    out.scalar_vecs = Pool<ScalarVecTripleView<TaggedShare>>(std::move(svs));

    return out;
}

} // namespace

IterationBundle ClientBundle::iteration(int g) {
    if (g != next_g_) throw FieldError("bundle consumption must be monotone");
    ++next_g_;
    return materialize(*mod_, dims_, root_, alpha_, g, client_id_);
}

IterationBundle ClientBundle::peek_iteration(int g) const {
    return materialize(*mod_, dims_, root_, alpha_, g, client_id_);
}

Fp FederatorKeys::beta(int g, Obj kind, int slot, int coord, int index) const {
    Derive dv{*mod_, root_, dims_.t};
    return dv.beta(g, kind, slot, coord, index);
}

KeyTrace FederatorKeys::leaf(int g, Obj kind, int slot, int coord, int index) const {
    return {Fp::zero(*mod_), beta(g, kind, slot, coord, index)};
}

ScalarTripleView<KeyTrace> FederatorKeys::scalar_trace(int g, int slot, int index) const {
    return {leaf(g, Obj::ScalarA, slot, 0, index), leaf(g, Obj::ScalarB, slot, 0, index),
            leaf(g, Obj::ScalarC, slot, 0, index)};
}

DotTripleView<KeyTrace> FederatorKeys::dot_trace(int g, int slot, int index) const {
    DotTripleView<KeyTrace> out;
    out.o.reserve(static_cast<std::size_t>(dims_.d));
    out.v.reserve(static_cast<std::size_t>(dims_.d));
    for (int c = 0; c < dims_.d; ++c) {
        out.o.push_back(leaf(g, Obj::DotO, slot, c, index));
        out.v.push_back(leaf(g, Obj::DotV, slot, c, index));
    }
    out.w = leaf(g, Obj::DotW, slot, 0, index);
    return out;
}

ScalarVecTripleView<KeyTrace> FederatorKeys::sv_trace(int g, int slot, int index) const {
    ScalarVecTripleView<KeyTrace> out;
    out.x = leaf(g, Obj::SvX, slot, 0, index);
    out.y.reserve(static_cast<std::size_t>(dims_.d));
    out.z.reserve(static_cast<std::size_t>(dims_.d));
    for (int c = 0; c < dims_.d; ++c) {
        out.y.push_back(leaf(g, Obj::SvY, slot, c, index));
        out.z.push_back(leaf(g, Obj::SvZ, slot, c, index));
    }
    return out;
}

Fp FederatorKeys::plaintext(int g, Obj kind, int slot, int coord) const {
    if (!with_digests_)
        throw FieldError("plaintext digests disabled in privacy-evaluation mode");
    Derive dv{*mod_, root_, dims_.t};
    switch (kind) {
    case Obj::RMask:
    case Obj::DotO:
    case Obj::DotV:
    case Obj::SvY:
        return dv.values(g, kind, slot, coord + 1).back();
    case Obj::Lambda:
        return dv.values(g, kind, 0, 1, /*nonzero=*/true)[0];
    case Obj::ScalarA:
    case Obj::ScalarB:
        return dv.values(g, kind, slot, 1)[0];
    case Obj::ScalarC:
        return dv.values(g, Obj::ScalarA, slot, 1)[0] * dv.values(g, Obj::ScalarB, slot, 1)[0];
    case Obj::SvX:
        return dv.values(g, kind, slot, 1)[0];
    case Obj::SvZ:
        return dv.values(g, Obj::SvX, slot, 1)[0] *
               dv.values(g, Obj::SvY, slot, coord + 1).back();
    case Obj::DotW: {
        std::vector<Fp> o = dv.values(g, Obj::DotO, slot, dims_.d);
        std::vector<Fp> v = dv.values(g, Obj::DotV, slot, dims_.d);
        Fp w = Fp::zero(*mod_);
        for (int c = 0; c < dims_.d; ++c) w += o[c] * v[c];
        return w;
    }
    }
    throw FieldError("unknown object kind");
}

TtpOutput Ttp::initialize(bool with_digests, std::shared_ptr<const Modulus> modulus_override) && {
    if (dims_.n < 1 || dims_.t < 0 || dims_.t >= dims_.n)
        throw FieldError("ttp: need n >= 1 and 0 <= t < n");
    if (dims_.iterations < 1) throw FieldError("ttp: need iterations >= 1");
    TtpOutput out;
    if (modulus_override) {
        out.modulus = std::move(modulus_override);
    } else {
        out.modulus = std::make_shared<const Modulus>(
            min_modulus(dims_.n, dims_.d, dims_.k, dims_.q, dims_.coeff_scale));
    }
    if (out.modulus->p() <= dims_.n) throw FieldError("not enough evaluation points");

    rng::Stream root = master_.fork({0x747470ULL}); // derivation root
    rng::Stream alpha_stream = root.fork({kAlpha});
    Fp alpha = sample_nonzero(*out.modulus, alpha_stream);

    out.bundles.reserve(static_cast<std::size_t>(dims_.n));
    for (int i = 0; i < dims_.n; ++i)
        out.bundles.emplace_back(out.modulus, dims_, root, alpha, i);
    out.keys = std::make_unique<FederatorKeys>(out.modulus, dims_, root, alpha, with_digests);
    return out;
}

AuditReport audit_iteration(const std::vector<IterationBundle>& bundles, const FederatorKeys& keys,
                            int g) {
    AuditReport rep;
    const ProtocolDims& dims = keys.dims();
    const Fp& alpha = keys.alpha();
    const int n = dims.n;
    const int t = dims.t;
    TripleBudget budget = triple_budget(n, dims.k, dims.d);

    if (static_cast<int>(bundles.size()) != n) {
        rep.violations.push_back("bundle count mismatch");
        return rep;
    }

    auto check_tag = [&](const TaggedShare& s, Obj kind, int slot, int coord, int index,
                         const char* what) {
        Fp beta = keys.beta(g, kind, slot, coord, index);
        if (s.tag != alpha * s.value + beta)
            rep.violations.push_back(std::string("tag mismatch: ") + what);
    };

    auto reconstruct_values = [&](const std::vector<Fp>& per_party) {
        std::vector<ValueShare> sh;
        for (int i = 0; i <= t; ++i)
            sh.push_back({static_cast<ShareIndex>(i + 1), per_party[static_cast<std::size_t>(i)]});
        return reconstruct(sh, t);
    };

    for (const IterationBundle& b : bundles) {
        if (static_cast<int>(b.dots.size()) != budget.dot ||
            static_cast<int>(b.scalars.size()) != budget.scalar ||
            static_cast<int>(b.scalar_vecs.size()) != budget.scalar_vec)
            rep.violations.push_back("pool size mismatch");
        if (static_cast<int>(b.r_shares.size()) != n)
            rep.violations.push_back("pad share rows mismatch");
    }
    if (!rep.violations.empty()) return rep;

    // Pads reconstruct to the owner's plain value; tags verify.
    for (int j = 0; j < n; ++j) {
        for (int c = 0; c < dims.d; ++c) {
            std::vector<Fp> per_party;
            for (const IterationBundle& b : bundles)
                per_party.push_back(
                    b.r_shares[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)].value);
            if (reconstruct_values(per_party) !=
                bundles[static_cast<std::size_t>(j)].r_own[static_cast<std::size_t>(c)])
                rep.violations.push_back("pad reconstruction mismatch");
        }
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < dims.d; ++c)
                check_tag(bundles[static_cast<std::size_t>(i)]
                              .r_shares[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)],
                          Obj::RMask, j, c, i, "pad share");
    }
    for (int i = 0; i < n; ++i)
        check_tag(bundles[static_cast<std::size_t>(i)].lambda_share, Obj::Lambda, 0, 0, i,
                  "lambda share");

    // Triple relations via reconstruction from the first t+1 bundles.
    for (int s = 0; s < budget.scalar; ++s) {
        std::vector<Fp> av, bv, cv;
        for (const IterationBundle& b : bundles) {
            const auto& tv = b.scalars.at(static_cast<std::size_t>(s));
            av.push_back(tv.a.value);
            bv.push_back(tv.b.value);
            cv.push_back(tv.c.value);
            int i = static_cast<int>(&b - bundles.data());
            check_tag(tv.a, Obj::ScalarA, s, 0, i, "triple a");
            check_tag(tv.b, Obj::ScalarB, s, 0, i, "triple b");
            check_tag(tv.c, Obj::ScalarC, s, 0, i, "triple c");
        }
        if (reconstruct_values(cv) != reconstruct_values(av) * reconstruct_values(bv))
            rep.violations.push_back("scalar triple relation violated");
    }
    for (int s = 0; s < budget.dot; ++s) {
        Fp w_rec = Fp::zero(keys.modulus());
        std::vector<Fp> wv;
        for (const IterationBundle& b : bundles) wv.push_back(b.dots.at(s).w.value);
        for (int c = 0; c < dims.d; ++c) {
            std::vector<Fp> ov, vv;
            for (const IterationBundle& b : bundles) {
                ov.push_back(b.dots.at(s).o[static_cast<std::size_t>(c)].value);
                vv.push_back(b.dots.at(s).v[static_cast<std::size_t>(c)].value);
            }
            w_rec += reconstruct_values(ov) * reconstruct_values(vv);
        }
        if (reconstruct_values(wv) != w_rec) rep.violations.push_back("dot triple relation violated");
    }
    for (int s = 0; s < budget.scalar_vec; ++s) {
        std::vector<Fp> xv;
        for (const IterationBundle& b : bundles) xv.push_back(b.scalar_vecs.at(s).x.value);
        Fp x = reconstruct_values(xv);
        for (int c = 0; c < dims.d; ++c) {
            std::vector<Fp> yv, zv;
            for (const IterationBundle& b : bundles) {
                yv.push_back(b.scalar_vecs.at(s).y[static_cast<std::size_t>(c)].value);
                zv.push_back(b.scalar_vecs.at(s).z[static_cast<std::size_t>(c)].value);
            }
            if (reconstruct_values(zv) != x * reconstruct_values(yv)) {
                rep.violations.push_back("scalar-vector triple relation violated");
                break;
            }
        }
    }
    return rep;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

struct ByteReader {
    const std::vector<std::uint8_t>& buf;
    std::size_t pos = 0;

    std::uint32_t u32() {
        if (pos + 4 > buf.size()) throw FieldError("truncated bundle");
        std::uint32_t v = (std::uint32_t(buf[pos]) << 24) | (std::uint32_t(buf[pos + 1]) << 16) |
                          (std::uint32_t(buf[pos + 2]) << 8) | std::uint32_t(buf[pos + 3]);
        pos += 4;
        return v;
    }

    Fp fp(const Modulus& m) {
        std::size_t w = m.byte_width();
        if (pos + w > buf.size()) throw FieldError("truncated bundle");
        Fp v = Fp::from_bytes(m, buf.data() + pos, w);
        pos += w;
        return v;
    }

    TaggedShare tagged(const Modulus& m) {
        Fp v = fp(m);
        Fp t = fp(m);
        return {v, t};
    }
};

void put_fp(std::vector<std::uint8_t>& out, const Fp& v) { v.append_bytes(out); }

void put_tagged(std::vector<std::uint8_t>& out, const TaggedShare& s) {
    put_fp(out, s.value);
    put_fp(out, s.tag);
}

} // namespace

std::vector<std::uint8_t> serialize_bundle(const IterationBundle& b, const Modulus& m) {
    (void)m; // residues carry their modulus; the reader needs it explicitly
    std::vector<std::uint8_t> out;
    put_u32(out, static_cast<std::uint32_t>(b.r_own.size()));
    for (const Fp& v : b.r_own) put_fp(out, v);
    put_u32(out, static_cast<std::uint32_t>(b.r_shares.size()));
    for (const auto& row : b.r_shares) {
        put_u32(out, static_cast<std::uint32_t>(row.size()));
        for (const TaggedShare& s : row) put_tagged(out, s);
    }
    put_tagged(out, b.lambda_share);

    put_u32(out, static_cast<std::uint32_t>(b.dots.size()));
    for (std::size_t s = 0; s < b.dots.size(); ++s) {
        const auto& tv = b.dots.at(s);
        put_u32(out, static_cast<std::uint32_t>(tv.o.size()));
        for (const TaggedShare& x : tv.o) put_tagged(out, x);
        for (const TaggedShare& x : tv.v) put_tagged(out, x);
        put_tagged(out, tv.w);
    }
    put_u32(out, static_cast<std::uint32_t>(b.scalars.size()));
    for (std::size_t s = 0; s < b.scalars.size(); ++s) {
        const auto& tv = b.scalars.at(s);
        put_tagged(out, tv.a);
        put_tagged(out, tv.b);
        put_tagged(out, tv.c);
    }
    put_u32(out, static_cast<std::uint32_t>(b.scalar_vecs.size()));
    for (std::size_t s = 0; s < b.scalar_vecs.size(); ++s) {
        const auto& tv = b.scalar_vecs.at(s);
        put_u32(out, static_cast<std::uint32_t>(tv.y.size()));
        put_tagged(out, tv.x);
        for (const TaggedShare& x : tv.y) put_tagged(out, x);
        for (const TaggedShare& x : tv.z) put_tagged(out, x);
    }
    return out;
}

IterationBundle deserialize_bundle(const std::vector<std::uint8_t>& bytes, const Modulus& m) {
    ByteReader r{bytes};
    IterationBundle b;
    std::uint32_t d = r.u32();
    for (std::uint32_t i = 0; i < d; ++i) b.r_own.push_back(r.fp(m));
    std::uint32_t rows = r.u32();
    b.r_shares.resize(rows);
    for (std::uint32_t j = 0; j < rows; ++j) {
        std::uint32_t len = r.u32();
        for (std::uint32_t c = 0; c < len; ++c) b.r_shares[j].push_back(r.tagged(m));
    }
    b.lambda_share = r.tagged(m);

    std::uint32_t ndots = r.u32();
    std::vector<DotTripleView<TaggedShare>> dots;
    for (std::uint32_t s = 0; s < ndots; ++s) {
        DotTripleView<TaggedShare> tv;
        std::uint32_t len = r.u32();
        for (std::uint32_t c = 0; c < len; ++c) tv.o.push_back(r.tagged(m));
        for (std::uint32_t c = 0; c < len; ++c) tv.v.push_back(r.tagged(m));
        tv.w = r.tagged(m);
        dots.push_back(std::move(tv));
    }
    b.dots = Pool<DotTripleView<TaggedShare>>(std::move(dots));

    std::uint32_t nscal = r.u32();
    std::vector<ScalarTripleView<TaggedShare>> scal;
    for (std::uint32_t s = 0; s < nscal; ++s) {
        ScalarTripleView<TaggedShare> tv;
        tv.a = r.tagged(m);
        tv.b = r.tagged(m);
        tv.c = r.tagged(m);
        scal.push_back(std::move(tv));
    }
    b.scalars = Pool<ScalarTripleView<TaggedShare>>(std::move(scal));

    std::uint32_t nsv = r.u32();
    std::vector<ScalarVecTripleView<TaggedShare>> svs;
    for (std::uint32_t s = 0; s < nsv; ++s) {
        ScalarVecTripleView<TaggedShare> tv;
        std::uint32_t len = r.u32();
        tv.x = r.tagged(m);
        for (std::uint32_t c = 0; c < len; ++c) tv.y.push_back(r.tagged(m));
        for (std::uint32_t c = 0; c < len; ++c) tv.z.push_back(r.tagged(m));
        svs.push_back(std::move(tv));
    }
    b.scalar_vecs = Pool<ScalarVecTripleView<TaggedShare>>(std::move(svs));
    return b;
}

} // namespace secagg
