#include "secagg/message.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace secagg {

const char* phase_name(Phase p) {
    switch (p) {
    case Phase::GlobalModel: return "global_model";
    case Phase::FederatorUpdate: return "federator_update";
    case Phase::MaskedUpdate: return "masked_update";
    case Phase::MaskedEcho: return "masked_echo";
    case Phase::NormOpen: return "norm_open";
    case Phase::NormOpened: return "norm_opened";
    case Phase::NormShare: return "norm_share";
    case Phase::Exclusion: return "exclusion";
    case Phase::MulOpen: return "mul_open";
    case Phase::MulOpened: return "mul_opened";
    case Phase::SvOpen: return "sv_open";
    case Phase::SvOpened: return "sv_opened";
    case Phase::LambdaOpen: return "lambda_open";
    case Phase::LambdaOpened: return "lambda_opened";
    case Phase::AggShare: return "agg_share";
    }
    return "?";
}

int phase_step(Phase p) {
    switch (p) {
    case Phase::GlobalModel:
    case Phase::FederatorUpdate: return 1;
    case Phase::MaskedUpdate:
    case Phase::MaskedEcho: return 2;
    case Phase::NormOpen:
    case Phase::NormOpened:
    case Phase::NormShare:
    case Phase::Exclusion: return 3;
    case Phase::MulOpen:
    case Phase::MulOpened:
    case Phase::SvOpen:
    case Phase::SvOpened:
    case Phase::LambdaOpen:
    case Phase::LambdaOpened: return 4;
    case Phase::AggShare: return 5;
    }
    return 0;
}

namespace {

constexpr std::size_t kHeaderBytes = 4 + 1 + 1 + 2 + 2 + 4; // iter, phase, sub, sender, receiver, len

struct Sizer {
    std::size_t w; // field element width

    std::size_t fp() const { return w; }
    std::size_t tagged() const { return 2 * w; }

    std::size_t operator()(const PayloadModel& p) const { return 4 + 8 * p.w.size(); }
    std::size_t operator()(const PayloadFieldVec& p) const { return 4 + w * p.v.size(); }
    std::size_t operator()(const PayloadMaskedEcho& p) const {
        std::size_t s = 4;
        for (const auto& v : p.masked) s += 4 + 4 + w * v.size();
        return s;
    }
    std::size_t operator()(const PayloadNormOpen& p) const {
        std::size_t s = 4;
        for (const auto& it : p.items) s += 4 + 4 + tagged() * (it.d.size() + it.e.size());
        return s;
    }
    std::size_t operator()(const PayloadNormOpened& p) const {
        std::size_t s = 4;
        for (const auto& it : p.items) s += 4 + 4 + fp() * (it.d.size() + it.e.size());
        return s;
    }
    std::size_t operator()(const PayloadNormShares& p) const {
        return 4 + p.items.size() * (4 + tagged());
    }
    std::size_t operator()(const PayloadExclusion& p) const { return 4 + 4 * p.excluded.size(); }
    std::size_t operator()(const PayloadScalarOpen& p) const {
        return 4 + p.items.size() * (4 + 2 * tagged());
    }
    std::size_t operator()(const PayloadScalarOpened& p) const {
        return 4 + p.items.size() * (4 + 2 * fp());
    }
    std::size_t operator()(const PayloadSvOpen& p) const {
        std::size_t s = 4;
        for (const auto& it : p.items) s += 4 + 4 + tagged() * (1 + it.e.size());
        return s;
    }
    std::size_t operator()(const PayloadSvOpened& p) const {
        std::size_t s = 4;
        for (const auto& it : p.items) s += 4 + 4 + fp() * (1 + it.e.size());
        return s;
    }
    std::size_t operator()(const PayloadLambdaOpen& p) const {
        return 4 + 3 * tagged() + tagged() * p.s2_e.size();
    }
    std::size_t operator()(const PayloadLambdaOpened& p) const {
        return 4 + 3 * fp() + fp() * p.s2_e.size();
    }
    std::size_t operator()(const PayloadAggShare& p) const {
        return tagged() + 4 + tagged() * p.s2.size();
    }
};

struct Writer {
    std::vector<std::uint8_t>& out;
    std::size_t w;

    void u32(std::uint32_t v) {
        out.push_back(static_cast<std::uint8_t>(v >> 24));
        out.push_back(static_cast<std::uint8_t>(v >> 16));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
        out.push_back(static_cast<std::uint8_t>(v));
    }
    void f64(double d) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(d);
        for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    void fp(const Fp& v) { v.append_bytes(out); }
    void tagged(const TaggedShare& s) {
        fp(s.value);
        fp(s.tag);
    }

    void operator()(const PayloadModel& p) {
        u32(static_cast<std::uint32_t>(p.w.size()));
        for (double d : p.w) f64(d);
    }
    void operator()(const PayloadFieldVec& p) {
        u32(static_cast<std::uint32_t>(p.v.size()));
        for (const Fp& v : p.v) fp(v);
    }
    void operator()(const PayloadMaskedEcho& p) {
        u32(static_cast<std::uint32_t>(p.sharers.size()));
        for (std::size_t i = 0; i < p.sharers.size(); ++i) {
            u32(p.sharers[i]);
            u32(static_cast<std::uint32_t>(p.masked[i].size()));
            for (const Fp& v : p.masked[i]) fp(v);
        }
    }
    void operator()(const PayloadNormOpen& p) {
        u32(static_cast<std::uint32_t>(p.items.size()));
        for (const auto& it : p.items) {
            u32(it.target);
            u32(static_cast<std::uint32_t>(it.d.size()));
            for (const auto& s : it.d) tagged(s);
            for (const auto& s : it.e) tagged(s);
        }
    }
    void operator()(const PayloadNormOpened& p) {
        u32(static_cast<std::uint32_t>(p.items.size()));
        for (const auto& it : p.items) {
            u32(it.target);
            u32(static_cast<std::uint32_t>(it.d.size()));
            for (const auto& v : it.d) fp(v);
            for (const auto& v : it.e) fp(v);
        }
    }
    void operator()(const PayloadNormShares& p) {
        u32(static_cast<std::uint32_t>(p.items.size()));
        for (const auto& it : p.items) {
            u32(it.target);
            tagged(it.share);
        }
    }
    void operator()(const PayloadExclusion& p) {
        u32(static_cast<std::uint32_t>(p.excluded.size()));
        for (std::uint32_t id : p.excluded) u32(id);
    }
    void operator()(const PayloadScalarOpen& p) {
        u32(static_cast<std::uint32_t>(p.items.size()));
        for (const auto& it : p.items) {
            u32(it.target);
            tagged(it.d);
            tagged(it.e);
        }
    }
    void operator()(const PayloadScalarOpened& p) {
        u32(static_cast<std::uint32_t>(p.items.size()));
        for (const auto& it : p.items) {
            u32(it.target);
            fp(it.d);
            fp(it.e);
        }
    }
    void operator()(const PayloadSvOpen& p) {
        u32(static_cast<std::uint32_t>(p.items.size()));
        for (const auto& it : p.items) {
            u32(it.target);
            u32(static_cast<std::uint32_t>(it.e.size()));
            tagged(it.d);
            for (const auto& s : it.e) tagged(s);
        }
    }
    void operator()(const PayloadSvOpened& p) {
        u32(static_cast<std::uint32_t>(p.items.size()));
        for (const auto& it : p.items) {
            u32(it.target);
            u32(static_cast<std::uint32_t>(it.e.size()));
            fp(it.d);
            for (const auto& v : it.e) fp(v);
        }
    }
    void operator()(const PayloadLambdaOpen& p) {
        u32(static_cast<std::uint32_t>(p.s2_e.size()));
        tagged(p.s1_d);
        tagged(p.s1_e);
        tagged(p.s2_d);
        for (const auto& s : p.s2_e) tagged(s);
    }
    void operator()(const PayloadLambdaOpened& p) {
        u32(static_cast<std::uint32_t>(p.s2_e.size()));
        fp(p.s1_d);
        fp(p.s1_e);
        fp(p.s2_d);
        for (const auto& v : p.s2_e) fp(v);
    }
    void operator()(const PayloadAggShare& p) {
        tagged(p.s1);
        u32(static_cast<std::uint32_t>(p.s2.size()));
        for (const auto& s : p.s2) tagged(s);
    }
};

} // namespace

std::size_t Message::byte_size(std::size_t field_width) const {
    return kHeaderBytes + std::visit(Sizer{field_width}, payload);
}

void Message::serialize(std::vector<std::uint8_t>& out, std::size_t field_width) const {
    Writer w{out, field_width};
    w.u32(iteration);
    out.push_back(static_cast<std::uint8_t>(phase));
    out.push_back(sub);
    out.push_back(static_cast<std::uint8_t>(sender >> 8));
    out.push_back(static_cast<std::uint8_t>(sender));
    out.push_back(static_cast<std::uint8_t>(receiver >> 8));
    out.push_back(static_cast<std::uint8_t>(receiver));
    std::size_t len_pos = out.size();
    w.u32(0);
    std::size_t body_start = out.size();
    std::visit(w, payload);
    std::uint32_t body = static_cast<std::uint32_t>(out.size() - body_start);
    out[len_pos] = static_cast<std::uint8_t>(body >> 24);
    out[len_pos + 1] = static_cast<std::uint8_t>(body >> 16);
    out[len_pos + 2] = static_cast<std::uint8_t>(body >> 8);
    out[len_pos + 3] = static_cast<std::uint8_t>(body);
}

std::uint64_t RoundTranscript::client_bytes(int id) const {
    std::uint64_t s = 0;
    if (auto it = sent_bytes.find(id); it != sent_bytes.end()) s += it->second;
    if (auto it = recv_bytes.find(id); it != recv_bytes.end()) s += it->second;
    return s;
}

std::uint64_t RoundTranscript::federator_bytes() const { return client_bytes(-1); }

void write_transcript(const RoundTranscript& t, std::size_t field_width,
                      const std::string& bin_path, const std::string& json_path) {
    std::ofstream bin(bin_path, std::ios::binary);
    if (!bin) throw std::runtime_error("cannot open " + bin_path);
    for (const Message& m : t.messages) {
        std::vector<std::uint8_t> rec;
        m.serialize(rec, field_width);
        std::uint32_t len = static_cast<std::uint32_t>(rec.size());
        std::uint8_t hdr[4] = {static_cast<std::uint8_t>(len >> 24), static_cast<std::uint8_t>(len >> 16),
                               static_cast<std::uint8_t>(len >> 8), static_cast<std::uint8_t>(len)};
        bin.write(reinterpret_cast<const char*>(hdr), 4);
        bin.write(reinterpret_cast<const char*>(rec.data()), static_cast<std::streamsize>(rec.size()));
    }

    nlohmann::json j;
    j["iteration"] = t.iteration;
    j["aborted"] = t.aborted;
    j["abort_reason"] = t.abort_reason;
    j["verdicts"] = t.verdicts;
    j["new_exclusions"] = t.new_exclusions;
    nlohmann::json sent, recv;
    for (const auto& [k, v] : t.sent_bytes) sent[std::to_string(k)] = v;
    for (const auto& [k, v] : t.recv_bytes) recv[std::to_string(k)] = v;
    j["sent_bytes"] = sent;
    j["recv_bytes"] = recv;
    std::ofstream js(json_path);
    if (!js) throw std::runtime_error("cannot open " + json_path);
    js << j.dump(2) << "\n";
}

std::pair<std::size_t, std::uint64_t> scan_transcript(const std::string& bin_path) {
    std::ifstream bin(bin_path, std::ios::binary);
    if (!bin) throw std::runtime_error("cannot open " + bin_path);
    std::size_t records = 0;
    std::uint64_t bytes = 0;
    while (true) {
        std::uint8_t hdr[4];
        bin.read(reinterpret_cast<char*>(hdr), 4);
        if (bin.gcount() == 0) break;
        if (bin.gcount() != 4) throw std::runtime_error("truncated transcript");
        std::uint32_t len = (std::uint32_t(hdr[0]) << 24) | (std::uint32_t(hdr[1]) << 16) |
                            (std::uint32_t(hdr[2]) << 8) | std::uint32_t(hdr[3]);
        bin.seekg(len, std::ios::cur);
        if (!bin) throw std::runtime_error("truncated transcript");
        ++records;
        bytes += len;
    }
    return {records, bytes};
}

} // namespace secagg
