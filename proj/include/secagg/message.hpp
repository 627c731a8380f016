#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "secagg/field.hpp"
#include "secagg/mac.hpp"

namespace secagg {

/// Party addressing: clients are 0..n-1.
constexpr std::uint16_t kFederator = 0xFFFE;

enum class Phase : std::uint8_t {
    GlobalModel = 0,
    FederatorUpdate,
    MaskedUpdate,
    MaskedEcho,
    NormOpen,
    NormOpened,
    NormShare,
    Exclusion,
    MulOpen,
    MulOpened,
    SvOpen,
    SvOpened,
    LambdaOpen,
    LambdaOpened,
    AggShare,
};

const char* phase_name(Phase p);

/// Protocol step (1-5) a phase belongs to; drives dropout suppression.
int phase_step(Phase p);

struct PayloadModel {
    std::vector<double> w;
};

struct PayloadFieldVec {
    std::vector<Fp> v;
};

struct PayloadMaskedEcho {
    std::vector<std::uint32_t> sharers;
    std::vector<std::vector<Fp>> masked; // by sharer order
};

struct PayloadNormOpen {
    struct Item {
        std::uint32_t target;
        std::vector<TaggedShare> d, e;
    };
    std::vector<Item> items;
};

struct PayloadNormOpened {
    struct Item {
        std::uint32_t target;
        std::vector<Fp> d, e;
    };
    std::vector<Item> items;
};

struct PayloadNormShares {
    struct Item {
        std::uint32_t target;
        TaggedShare share;
    };
    std::vector<Item> items;
};

struct PayloadExclusion {
    std::vector<std::uint32_t> excluded;
};

struct PayloadScalarOpen {
    struct Item {
        std::uint32_t target;
        TaggedShare d, e;
    };
    std::vector<Item> items;
};

struct PayloadScalarOpened {
    struct Item {
        std::uint32_t target;
        Fp d, e;
    };
    std::vector<Item> items;
};

struct PayloadSvOpen {
    struct Item {
        std::uint32_t target;
        TaggedShare d;
        std::vector<TaggedShare> e;
    };
    std::vector<Item> items;
};

struct PayloadSvOpened {
    struct Item {
        std::uint32_t target;
        Fp d;
        std::vector<Fp> e;
    };
    std::vector<Item> items;
};

struct PayloadLambdaOpen {
    TaggedShare s1_d, s1_e; // Sigma1 - a, lambda - b
    TaggedShare s2_d;       // lambda - x
    std::vector<TaggedShare> s2_e; // Sigma2 - y
};

struct PayloadLambdaOpened {
    Fp s1_d, s1_e, s2_d;
    std::vector<Fp> s2_e;
};

struct PayloadAggShare {
    TaggedShare s1;
    std::vector<TaggedShare> s2;
};

using Payload = std::variant<PayloadModel, PayloadFieldVec, PayloadMaskedEcho, PayloadNormOpen,
                             PayloadNormOpened, PayloadNormShares, PayloadExclusion,
                             PayloadScalarOpen, PayloadScalarOpened, PayloadSvOpen, PayloadSvOpened,
                             PayloadLambdaOpen, PayloadLambdaOpened, PayloadAggShare>;

struct Message {
    std::uint32_t iteration = 0;
    Phase phase = Phase::GlobalModel;
    std::uint8_t sub = 0; // multiplication sub-round
    std::uint16_t sender = 0;
    std::uint16_t receiver = 0;
    Payload payload;

    std::size_t byte_size(std::size_t field_width) const;
    void serialize(std::vector<std::uint8_t>& out, std::size_t field_width) const;
};

/// Every message of one iteration plus byte counters and verdicts; replaying
/// a round under the same seeds reproduces it bit-exactly.
struct RoundTranscript {
    std::uint32_t iteration = 0;
    std::vector<Message> messages; // populated only when message storage is on
    std::map<int, std::uint64_t> sent_bytes; // party -> bytes; -1 is the federator
    std::map<int, std::uint64_t> recv_bytes;
    std::vector<std::string> verdicts;
    std::vector<std::uint32_t> new_exclusions;
    bool aborted = false;
    std::string abort_reason;

    std::uint64_t client_bytes(int id) const;
    std::uint64_t federator_bytes() const;
};

void write_transcript(const RoundTranscript& t, std::size_t field_width,
                      const std::string& bin_path, const std::string& json_path);

/// Structural reader: record count and total payload bytes of a transcript
/// file (round-trip check for the binary format).
std::pair<std::size_t, std::uint64_t> scan_transcript(const std::string& bin_path);

} // namespace secagg
