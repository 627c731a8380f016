#include "secagg/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace secagg {

void AdversarySpec::validate(int n, int t) const {
    std::set<std::uint32_t> drops;
    for (const DropoutEvent& ev : dropouts) drops.insert(ev.client);
    const int e = static_cast<int>(byzantine.size());
    const int s = static_cast<int>(drops.size());
    if (e + t + s + 1 > n)
        throw std::invalid_argument("threat model violated: need n >= e+t+s+1, got n=" +
                                    std::to_string(n) + " e=" + std::to_string(e) + " t=" +
                                    std::to_string(t) + " s=" + std::to_string(s));
    for (std::uint32_t id : byzantine)
        if (id >= static_cast<std::uint32_t>(n)) throw std::invalid_argument("byzantine id out of range");
}

flsim::Dataset label_flip(const flsim::Dataset& d) {
    flsim::Dataset out = d;
    for (Eigen::Index i = 0; i < out.labels.size(); ++i)
        out.labels[i] = out.num_classes - 1 - out.labels[i];
    return out;
}

flsim::Dataset apply_trigger(const flsim::Dataset& d, int trigger_size, int target, bool relabel) {
    flsim::Dataset out = d;
    const int f = static_cast<int>(d.dim());
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(f))));
    const bool square = side * side == f;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        if (square) {
            for (int r = 0; r < trigger_size && r < side; ++r)
                for (int c = 0; c < trigger_size && c < side; ++c)
                    out.features(i, r * side + c) = 1.0;
        } else {
            for (int p = 0; p < trigger_size * trigger_size && p < f; ++p) out.features(i, p) = 1.0;
        }
        if (relabel) out.labels[i] = target;
    }
    return out;
}

double attack_success_rate(const flsim::Model& m, const flsim::Dataset& triggered_test, int target) {
    if (triggered_test.size() == 0) return 0.0;
    Eigen::VectorXi pred = flsim::predict(m, triggered_test.features);
    int hits = 0;
    for (Eigen::Index i = 0; i < pred.size(); ++i)
        if (pred[i] == target) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

RealVec directed_attack(const std::vector<RealVec>& honest_updates, const RealVec& u0,
                        const DiscriminatorPoly& h, const std::string& rule) {
    if (u0.norm() == 0.0) return -u0;
    RealVec u0n = u0 / u0.norm();
    RealVec mean = RealVec::Zero(u0.size());
    for (const RealVec& u : honest_updates)
        if (u.norm() > 0) mean += u / u.norm();
    if (mean.norm() == 0.0) mean = u0n;
    RealVec gbar = mean / mean.norm();

    // Candidate directions between the anti-honest direction and the root
    // direction; pick the mixture with the highest trust-weighted damage.
    double best_score = -1.0;
    RealVec best = -gbar;
    for (int step = 0; step <= 40; ++step) {
        const double c = static_cast<double>(step) / 40.0;
        RealVec cand = c * u0n - (1.0 - c) * gbar;
        const double nc = cand.norm();
        if (nc < 1e-12) continue;
        cand /= nc;
        const double cosine = cand.dot(u0n);
        double trust;
        if (rule == "relu") {
            trust = std::max(0.0, cosine);
        } else if (rule == "krum" || rule == "tmean") {
            // Distance-based rules ignore the root direction; favor staying
            // close to the honest cluster while pointing away from it.
            trust = std::exp(-4.0 * (cand - gbar).squaredNorm());
        } else {
            trust = eval_real(h, cosine);
        }
        if (trust <= 1e-3) continue;
        const double damage = trust * (-cand.dot(gbar));
        if (damage > best_score) {
            best_score = damage;
            best = cand;
        }
    }
    return best;
}

MessageTamper protocol_corruption(const std::string& mode, int step,
                                  std::shared_ptr<const Modulus> modulus, std::uint64_t seed) {
    return [mode, step, modulus, seed](Message& m) {
        if (phase_step(m.phase) != step) return;
        if (mode == "opening" &&
            !(m.phase == Phase::NormOpen || m.phase == Phase::MulOpen || m.phase == Phase::SvOpen ||
              m.phase == Phase::LambdaOpen))
            return;
        rng::Stream rs(rng::mix64(seed ^ (std::uint64_t(m.iteration) << 8) ^ m.sub));
        Fp delta = sample_nonzero(*modulus, rs);
        Fp guess = Fp::uniform(*modulus, rs);
        auto hit = [&](TaggedShare& s) {
            if (mode == "tag") {
                s.tag += delta;
            } else if (mode == "both") {
                s.value += delta;
                s.tag += guess; // passes only when guess = alpha * delta
            } else {
                s.value += delta;
            }
        };
        if (auto* p = std::get_if<PayloadNormOpen>(&m.payload)) {
            if (!p->items.empty() && !p->items[0].d.empty()) hit(p->items[0].d[0]);
        } else if (auto* p = std::get_if<PayloadNormShares>(&m.payload)) {
            if (!p->items.empty()) hit(p->items[0].share);
        } else if (auto* p = std::get_if<PayloadScalarOpen>(&m.payload)) {
            if (!p->items.empty()) hit(p->items[0].d);
        } else if (auto* p = std::get_if<PayloadSvOpen>(&m.payload)) {
            if (!p->items.empty()) hit(p->items[0].d);
        } else if (auto* p = std::get_if<PayloadLambdaOpen>(&m.payload)) {
            hit(p->s1_d);
        } else if (auto* p = std::get_if<PayloadAggShare>(&m.payload)) {
            hit(p->s1);
        }
    };
}

} // namespace secagg
