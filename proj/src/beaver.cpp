#include "secagg/beaver.hpp"

namespace secagg {

TripleBudget triple_budget(int n, int k, int d) {
    if (n < 0 || k < 1) throw FieldError("triple_budget: need n >= 0, k >= 1");
    TripleBudget b;
    b.dot = n;
    b.scalar = (k - 1) * n + 1;
    b.scalar_vec = n + 1;
    b.dot_dim = d;
    return b;
}

namespace {

// Shares one secret among n parties and tags every share with a fresh beta.
struct SharedTagged {
    std::vector<TaggedShare> shares; // by party, 0-based
    std::vector<Fp> betas;           // by party, 0-based
};

SharedTagged share_and_tag(const Fp& secret, int n, int t, const Fp& alpha, rng::Stream& rs) {
    SharedTagged out;
    std::vector<ValueShare> vs = share(secret, n, t, rs);
    out.shares.reserve(static_cast<std::size_t>(n));
    out.betas.reserve(static_cast<std::size_t>(n));
    const Modulus& m = secret.modulus();
    for (const ValueShare& s : vs) {
        Fp beta = Fp::uniform(m, rs);
        out.shares.push_back(make_tagged(s.value, MacKey{alpha, beta}));
        out.betas.push_back(beta);
    }
    return out;
}

} // namespace

GeneratedScalarTriple gen_scalar_triple(const Modulus& m, int n, int t, const Fp& alpha,
                                        rng::Stream& rs) {
    GeneratedScalarTriple out;
    out.a = Fp::uniform(m, rs);
    out.b = Fp::uniform(m, rs);
    out.c = out.a * out.b;
    SharedTagged sa = share_and_tag(out.a, n, t, alpha, rs);
    SharedTagged sb = share_and_tag(out.b, n, t, alpha, rs);
    SharedTagged sc = share_and_tag(out.c, n, t, alpha, rs);
    out.parties.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        out.parties[i] = {sa.shares[i], sb.shares[i], sc.shares[i]};
    }
    out.beta_a = std::move(sa.betas);
    out.beta_b = std::move(sb.betas);
    out.beta_c = std::move(sc.betas);
    return out;
}

GeneratedDotTriple gen_dot_triple(const Modulus& m, int n, int t, int d, const Fp& alpha,
                                  rng::Stream& rs) {
    GeneratedDotTriple out;
    out.o.reserve(static_cast<std::size_t>(d));
    out.v.reserve(static_cast<std::size_t>(d));
    out.w = Fp::zero(m);
    for (int j = 0; j < d; ++j) {
        out.o.push_back(Fp::uniform(m, rs));
        out.v.push_back(Fp::uniform(m, rs));
        out.w += out.o.back() * out.v.back();
    }
    out.parties.resize(static_cast<std::size_t>(n));
    for (auto& p : out.parties) {
        p.o.reserve(static_cast<std::size_t>(d));
        p.v.reserve(static_cast<std::size_t>(d));
    }
    out.beta_o.resize(static_cast<std::size_t>(d));
    out.beta_v.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
        SharedTagged so = share_and_tag(out.o[j], n, t, alpha, rs);
        SharedTagged sv = share_and_tag(out.v[j], n, t, alpha, rs);
        for (int i = 0; i < n; ++i) {
            out.parties[i].o.push_back(so.shares[i]);
            out.parties[i].v.push_back(sv.shares[i]);
        }
        out.beta_o[j] = std::move(so.betas);
        out.beta_v[j] = std::move(sv.betas);
    }
    SharedTagged sw = share_and_tag(out.w, n, t, alpha, rs);
    for (int i = 0; i < n; ++i) out.parties[i].w = sw.shares[i];
    out.beta_w = std::move(sw.betas);
    return out;
}

GeneratedScalarVecTriple gen_scalar_vec_triple(const Modulus& m, int n, int t, int d,
                                               const Fp& alpha, rng::Stream& rs) {
    GeneratedScalarVecTriple out;
    out.x = Fp::uniform(m, rs);
    out.y.reserve(static_cast<std::size_t>(d));
    out.z.reserve(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
        out.y.push_back(Fp::uniform(m, rs));
        out.z.push_back(out.x * out.y.back());
    }
    out.parties.resize(static_cast<std::size_t>(n));
    SharedTagged sx = share_and_tag(out.x, n, t, alpha, rs);
    for (int i = 0; i < n; ++i) out.parties[i].x = sx.shares[i];
    out.beta_x = std::move(sx.betas);
    out.beta_y.resize(static_cast<std::size_t>(d));
    out.beta_z.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
        SharedTagged sy = share_and_tag(out.y[j], n, t, alpha, rs);
        SharedTagged sz = share_and_tag(out.z[j], n, t, alpha, rs);
        for (int i = 0; i < n; ++i) {
            out.parties[i].y.push_back(sy.shares[i]);
            out.parties[i].z.push_back(sz.shares[i]);
        }
        out.beta_y[j] = std::move(sy.betas);
        out.beta_z[j] = std::move(sz.betas);
    }
    return out;
}

} // namespace secagg
