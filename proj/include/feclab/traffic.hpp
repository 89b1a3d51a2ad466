// traffic.hpp -- GoP-structured VBR and CBR source models.
//
// The VBR model is a video proxy: fixed frame rate, fixed GoP length, one
// large I frame opening each GoP and gop_size-1 equal P frames behind it.
// Byte conservation is exact per GoP: the I frame takes
// round(i_share * gop_bytes) and the P remainder is integer-divided with
// the leftover spread one byte at a time across the leading P frames, so
// every complete GoP sums to round(bitrate * gop / frame_rate / 8) bytes.
// Frames fragment into max_payload-sized packets (tail fragment smaller).

#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "feclab/errors.hpp"

namespace feclab {

struct FrameEvent {
    std::uint64_t index = 0;
    double due_at = 0.0;
    std::uint64_t bytes = 0;
    bool is_iframe = false;
    std::vector<std::uint32_t> fragments;  // payload sizes, sum == bytes
};

namespace detail {

inline std::vector<std::uint32_t> fragment_bytes(std::uint64_t bytes,
                                                 std::uint32_t max_payload) {
    if (max_payload == 0) throw ConfigError("traffic: max_payload must be positive");
    std::vector<std::uint32_t> out;
    while (bytes > max_payload) {
        out.push_back(max_payload);
        bytes -= max_payload;
    }
    if (bytes > 0 || out.empty()) out.push_back(static_cast<std::uint32_t>(bytes));
    return out;
}

}  // namespace detail

inline std::vector<FrameEvent> vbr_frames(double bitrate_bps, double frame_rate,
                                          std::uint32_t gop_size, double i_share,
                                          std::uint64_t duration_frames,
                                          std::uint32_t max_payload) {
    if (bitrate_bps <= 0.0 || frame_rate <= 0.0)
        throw ConfigError("traffic: bitrate and frame rate must be positive");
    if (gop_size == 0) throw ConfigError("traffic: gop_size must be positive");
    if (i_share <= 0.0 || i_share > 1.0)
        throw ConfigError("traffic: i_frame_byte_share must be in (0, 1]");
    if (gop_size == 1 && i_share != 1.0)
        throw ConfigError("traffic: gop_size 1 requires i_frame_byte_share = 1");

    const auto gop_bytes = static_cast<std::uint64_t>(
        std::llround(bitrate_bps * gop_size / frame_rate / 8.0));
    const auto i_bytes = gop_size == 1
                             ? gop_bytes
                             : static_cast<std::uint64_t>(std::llround(i_share * gop_bytes));
    if (i_bytes > gop_bytes)
        throw ConfigError("traffic: i frame exceeds GoP byte budget");

    std::vector<std::uint64_t> sizes(gop_size, 0);
    sizes[0] = i_bytes;
    if (gop_size > 1) {
        const std::uint64_t p_total = gop_bytes - i_bytes;
        const std::uint64_t base = p_total / (gop_size - 1);
        std::uint64_t leftover = p_total % (gop_size - 1);
        for (std::uint32_t i = 1; i < gop_size; ++i) {
            sizes[i] = base + (leftover > 0 ? 1 : 0);
            if (leftover > 0) --leftover;
        }
    }

    std::vector<FrameEvent> frames;
    frames.reserve(duration_frames);
    for (std::uint64_t i = 0; i < duration_frames; ++i) {
        FrameEvent f;
        f.index = i;
        f.due_at = static_cast<double>(i) / frame_rate;
        f.is_iframe = (i % gop_size) == 0;
        f.bytes = sizes[i % gop_size];
        f.fragments = detail::fragment_bytes(f.bytes, max_payload);
        frames.push_back(std::move(f));
    }
    return frames;
}

// Constant-bitrate stream: equal packets evenly spaced.
inline std::vector<FrameEvent> cbr_frames(double bitrate_bps, std::uint32_t packet_bytes,
                                          double duration_s) {
    if (bitrate_bps <= 0.0 || packet_bytes == 0)
        throw ConfigError("traffic: bitrate and packet size must be positive");
    const double interval = packet_bytes * 8.0 / bitrate_bps;
    std::vector<FrameEvent> frames;
    std::uint64_t i = 0;
    for (;; ++i) {
        const double at = static_cast<double>(i) * interval;
        if (at >= duration_s) break;
        FrameEvent f;
        f.index = i;
        f.due_at = at;
        f.bytes = packet_bytes;
        f.fragments = {packet_bytes};
        frames.push_back(std::move(f));
    }
    return frames;
}

// One integer (frame bytes) per line; '#' starts a comment; blank lines
// skipped.  Frame i is due at i / frame_rate.
inline std::vector<FrameEvent> load_frame_trace(std::istream& in, double frame_rate,
                                                std::uint32_t gop_size,
                                                std::uint32_t max_payload) {
    if (frame_rate <= 0.0) throw ConfigError("traffic: frame rate must be positive");
    std::vector<FrameEvent> frames;
    std::string line;
    std::uint64_t i = 0;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::uint64_t bytes = 0;
        if (!(ls >> bytes)) {
            std::string word;
            if (ls.clear(), ls >> word)
                throw ConfigError("traffic: bad frame trace line: " + line);
            continue;  // blank or comment-only
        }
        std::string rest;
        if (ls >> rest) throw ConfigError("traffic: bad frame trace line: " + line);
        FrameEvent f;
        f.index = i;
        f.due_at = static_cast<double>(i) / frame_rate;
        f.is_iframe = gop_size > 0 && (i % gop_size) == 0;
        f.bytes = bytes;
        f.fragments = detail::fragment_bytes(bytes, max_payload);
        frames.push_back(std::move(f));
        ++i;
    }
    if (frames.empty()) throw ConfigError("traffic: frame trace is empty");
    return frames;
}

// Fraction of the total rate spent on repair when a protected stream of
// rate `protected_bps` replaces an unprotected one of rate `source_bps`.
inline double redundancy_overhead(double protected_bps, double source_bps) {
    if (protected_bps <= 0.0 || source_bps <= 0.0 || protected_bps < source_bps)
        throw ConfigError("traffic: rates must be positive, protected >= source");
    return (protected_bps - source_bps) / protected_bps;
}

}  // namespace feclab
