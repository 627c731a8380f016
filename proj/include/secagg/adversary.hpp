#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "secagg/discriminator.hpp"
#include "secagg/flsim/dataset.hpp"
#include "secagg/flsim/model.hpp"
#include "secagg/protocol.hpp"

namespace secagg {

struct AttackConfig {
    std::string kind = "none"; // none | label_flip | scaling | directed | protocol_corruption
    double scale_factor = 10.0;
    int trigger_size = 3;
    int target_class = 0;
    double poison_fraction = 0.5;        // share of a Byzantine client's samples that get the trigger
    std::string corruption_mode = "value"; // value | tag | both | opening
    int corruption_step = 3;               // protocol step whose message is tampered
    std::string directed_rule = "poly";    // poly | relu | krum | tmean
};

/// Byzantine/colluder/dropout roles for one experiment. Enforces
/// n >= e + t + s + 1 at load.
struct AdversarySpec {
    std::vector<std::uint32_t> byzantine;
    std::vector<std::uint32_t> colluders;
    std::vector<DropoutEvent> dropouts;
    AttackConfig attack;

    void validate(int n, int t) const;
};

/// l -> L-1-l on every label.
flsim::Dataset label_flip(const flsim::Dataset& d);

/// Stamps a trigger_size x trigger_size max-intensity patch into the corner
/// of each (row-major square image) sample; optionally relabels to target.
flsim::Dataset apply_trigger(const flsim::Dataset& d, int trigger_size, int target, bool relabel);

/// Fraction of triggered test samples classified as the target class.
double attack_success_rate(const flsim::Model& m, const flsim::Dataset& triggered_test, int target);

/// Grid search over mixtures of the anti-honest direction and the root
/// direction: the crafted unit update maximizes trust-weighted deviation
/// while keeping a workable trust score. Deterministic.
RealVec directed_attack(const std::vector<RealVec>& honest_updates, const RealVec& u0,
                        const DiscriminatorPoly& h, const std::string& rule = "poly");

/// Additive perturbation of the first matching share component in outgoing
/// messages of the given protocol step.
MessageTamper protocol_corruption(const std::string& mode, int step,
                                  std::shared_ptr<const Modulus> modulus, std::uint64_t seed);

} // namespace secagg
