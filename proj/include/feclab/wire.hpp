// wire.hpp -- packet structs and their big-endian serialization.
//
// Layouts (all integers big-endian):
//
//   source   [0x01][seq:4][len:2][payload:len]
//   repair   [0x02][repair_seq:4][window_start:4][window_end:4]
//            [coeff_seed:4][len:2][payload:len]
//   ack      [0x03][cum_flag:1][cumulative_seq:4][extra_count:2][extra:4]*
//   feedback [0x04][recv_rate:8, micro-bytes/s][loss_event_rate:8, 1e-9]
//            [rtt_echo:4, microseconds]
//   padding  [0x05][pad_seq:4][len:2][len zero bytes]
//
// `sent_at` on the packet structs is simulator metadata (packets move
// in-process as structs); it is not part of the wire image, which exists
// for trace files and byte-exact round-trip tests.  Feedback quantities
// are stored in their wire fixed-point form so round-trips are identity.

#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "feclab/errors.hpp"
#include "feclab/gf256.hpp"

namespace feclab {

constexpr std::uint8_t kWireSource = 0x01;
constexpr std::uint8_t kWireRepair = 0x02;
constexpr std::uint8_t kWireAck = 0x03;
constexpr std::uint8_t kWireFeedback = 0x04;
constexpr std::uint8_t kWirePadding = 0x05;

struct SourcePacket {
    std::uint32_t seq = 0;
    SymbolVector payload;
    double sent_at = 0.0;
};

struct RepairPacket {
    std::uint32_t repair_seq = 0;
    std::uint32_t window_start = 0;
    std::uint32_t window_end = 0;
    std::uint32_t coeff_seed = 0;
    SymbolVector payload;
    double sent_at = 0.0;
};

struct AckPacket {
    std::optional<std::uint32_t> cumulative_seq;  // all seqs <= this are in
    std::vector<std::uint32_t> extra_seqs;        // received above the gap, ascending
    double sent_at = 0.0;
};

struct FeedbackReport {
    std::uint64_t recv_rate_micro = 0;   // bytes/s scaled by 1e6
    std::uint64_t loss_rate_nano = 0;    // dimensionless, scaled by 1e9
    std::uint32_t rtt_echo_us = 0;       // sender timestamp echoed back, us
    double sent_at = 0.0;

    double recv_rate() const { return static_cast<double>(recv_rate_micro) * 1e-6; }
    double loss_event_rate() const { return static_cast<double>(loss_rate_nano) * 1e-9; }
    static std::uint64_t to_micro(double v) {
        return static_cast<std::uint64_t>(v * 1e6 + 0.5);
    }
    static std::uint64_t to_nano(double v) {
        return static_cast<std::uint64_t>(v * 1e9 + 0.5);
    }
};

struct PaddingPacket {
    std::uint32_t pad_seq = 0;
    std::uint16_t fill_bytes = 0;
    double sent_at = 0.0;
};

using AnyPacket =
    std::variant<SourcePacket, RepairPacket, AckPacket, FeedbackReport, PaddingPacket>;

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
    put_u32(out, static_cast<std::uint32_t>(v));
}

struct Cursor {
    const std::uint8_t* p;
    std::size_t left;

    std::uint8_t u8() {
        if (left < 1) throw WireError("wire: truncated frame");
        --left;
        return *p++;
    }
    std::uint16_t u16() {
        if (left < 2) throw WireError("wire: truncated frame");
        const std::uint16_t v = static_cast<std::uint16_t>((p[0] << 8) | p[1]);
        p += 2;
        left -= 2;
        return v;
    }
    std::uint32_t u32() {
        if (left < 4) throw WireError("wire: truncated frame");
        const std::uint32_t v = (static_cast<std::uint32_t>(p[0]) << 24) |
                                (static_cast<std::uint32_t>(p[1]) << 16) |
                                (static_cast<std::uint32_t>(p[2]) << 8) |
                                static_cast<std::uint32_t>(p[3]);
        p += 4;
        left -= 4;
        return v;
    }
    std::uint64_t u64() {
        const std::uint64_t hi = u32();
        return (hi << 32) | u32();
    }
    SymbolVector bytes(std::size_t n) {
        if (left < n) throw WireError("wire: truncated payload");
        SymbolVector v(p, p + n);
        p += n;
        left -= n;
        return v;
    }
};

}  // namespace detail

inline std::vector<std::uint8_t> encode(const SourcePacket& pkt) {
    if (pkt.payload.size() > 0xFFFF) throw WireError("wire: payload too large");
    std::vector<std::uint8_t> out;
    out.reserve(7 + pkt.payload.size());
    out.push_back(kWireSource);
    detail::put_u32(out, pkt.seq);
    detail::put_u16(out, static_cast<std::uint16_t>(pkt.payload.size()));
    out.insert(out.end(), pkt.payload.begin(), pkt.payload.end());
    return out;
}

inline std::vector<std::uint8_t> encode(const RepairPacket& pkt) {
    if (pkt.payload.size() > 0xFFFF) throw WireError("wire: payload too large");
    std::vector<std::uint8_t> out;
    out.reserve(19 + pkt.payload.size());
    out.push_back(kWireRepair);
    detail::put_u32(out, pkt.repair_seq);
    detail::put_u32(out, pkt.window_start);
    detail::put_u32(out, pkt.window_end);
    detail::put_u32(out, pkt.coeff_seed);
    detail::put_u16(out, static_cast<std::uint16_t>(pkt.payload.size()));
    out.insert(out.end(), pkt.payload.begin(), pkt.payload.end());
    return out;
}

inline std::vector<std::uint8_t> encode(const AckPacket& pkt) {
    if (pkt.extra_seqs.size() > 0xFFFF) throw WireError("wire: too many ack extras");
    std::vector<std::uint8_t> out;
    out.reserve(8 + 4 * pkt.extra_seqs.size());
    out.push_back(kWireAck);
    out.push_back(pkt.cumulative_seq ? 1 : 0);
    detail::put_u32(out, pkt.cumulative_seq.value_or(0));
    detail::put_u16(out, static_cast<std::uint16_t>(pkt.extra_seqs.size()));
    for (std::uint32_t s : pkt.extra_seqs) detail::put_u32(out, s);
    return out;
}

inline std::vector<std::uint8_t> encode(const FeedbackReport& pkt) {
    std::vector<std::uint8_t> out;
    out.reserve(21);
    out.push_back(kWireFeedback);
    detail::put_u64(out, pkt.recv_rate_micro);
    detail::put_u64(out, pkt.loss_rate_nano);
    detail::put_u32(out, pkt.rtt_echo_us);
    return out;
}

inline std::vector<std::uint8_t> encode(const PaddingPacket& pkt) {
    std::vector<std::uint8_t> out;
    out.reserve(7 + pkt.fill_bytes);
    out.push_back(kWirePadding);
    detail::put_u32(out, pkt.pad_seq);
    detail::put_u16(out, pkt.fill_bytes);
    out.insert(out.end(), pkt.fill_bytes, 0);
    return out;
}

inline std::vector<std::uint8_t> encode(const AnyPacket& pkt) {
    return std::visit([](const auto& p) { return encode(p); }, pkt);
}

inline AnyPacket decode(const std::vector<std::uint8_t>& bytes) {
    detail::Cursor c{bytes.data(), bytes.size()};
    const std::uint8_t type = c.u8();
    AnyPacket out;
    switch (type) {
        case kWireSource: {
            SourcePacket p;
            p.seq = c.u32();
            p.payload = c.bytes(c.u16());
            out = std::move(p);
            break;
        }
        case kWireRepair: {
            RepairPacket p;
            p.repair_seq = c.u32();
            p.window_start = c.u32();
            p.window_end = c.u32();
            p.coeff_seed = c.u32();
            p.payload = c.bytes(c.u16());
            out = std::move(p);
            break;
        }
        case kWireAck: {
            AckPacket p;
            const std::uint8_t flag = c.u8();
            const std::uint32_t cum = c.u32();
            if (flag > 1) throw WireError("wire: bad ack flag");
            if (flag) p.cumulative_seq = cum;
            const std::uint16_t n = c.u16();
            p.extra_seqs.reserve(n);
            for (std::uint16_t i = 0; i < n; ++i) p.extra_seqs.push_back(c.u32());
            out = std::move(p);
            break;
        }
        case kWireFeedback: {
            FeedbackReport p;
            p.recv_rate_micro = c.u64();
            p.loss_rate_nano = c.u64();
            p.rtt_echo_us = c.u32();
            out = p;
            break;
        }
        case kWirePadding: {
            PaddingPacket p;
            p.pad_seq = c.u32();
            p.fill_bytes = c.u16();
            c.bytes(p.fill_bytes);
            out = p;
            break;
        }
        default:
            throw WireError("wire: unknown packet type");
    }
    if (c.left != 0) throw WireError("wire: trailing bytes");
    return out;
}

}  // namespace feclab
