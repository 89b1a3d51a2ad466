// sliding.hpp -- on-the-fly sliding-window erasure codec.
//
// The encoder keeps an elastic window of every source seq it has sent that
// the receiver has not yet acknowledged.  Each repair packet is a random
// linear combination over GF(2^8) of ALL seqs in the contiguous span
// [window_start, window_end] (the current min/max unacked), so a repair
// header stays O(1): the receiver re-expands the coefficients from
// coeff_seed (see coeff.hpp).  Acks prune the window, bounding both the
// combination cost and the decoder's linear system; a receiver that loses
// packets simply keeps collecting repairs until the system closes, which
// makes recovery delay a function of the repair cadence, not of the RTT.
//
// Variable-length payloads are handled by combining length-prefixed images
// of the payloads: image(s) = [len:2 BE][payload], zero-padded to the
// longest image in the window.  Recovered images reproduce the original
// payload bytes exactly, padding discarded.
//
// The decoder maintains an incremental reduced row echelon form over the
// currently-missing seqs: each buffered repair row is keyed by its pivot
// (lowest missing seq it references), later arrivals/decodes substitute
// through all rows, and any row reduced to a single unknown releases a
// decode, possibly cascading.  Equivalent to batch-solving the repair
// system after every packet, but incremental; the tests check the two
// against each other.

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "feclab/coeff.hpp"
#include "feclab/errors.hpp"
#include "feclab/gf256.hpp"
#include "feclab/linear_system.hpp"
#include "feclab/wire.hpp"

namespace feclab {

namespace detail {

// dst[i] ^= f * src[i], growing dst as needed (shorter = zero-padded).
inline void axpy_grow(FieldElement f, const SymbolVector& src, SymbolVector& dst) {
    if (f == 0) return;
    if (dst.size() < src.size()) dst.resize(src.size(), 0);
    if (f == 1) {
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] ^= src[i];
        return;
    }
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (src[i]) dst[i] ^= gf_mul(f, src[i]);
    }
}

inline SymbolVector length_prefixed(const SymbolVector& payload) {
    SymbolVector image;
    image.reserve(payload.size() + 2);
    image.push_back(static_cast<std::uint8_t>(payload.size() >> 8));
    image.push_back(static_cast<std::uint8_t>(payload.size()));
    image.insert(image.end(), payload.begin(), payload.end());
    return image;
}

inline SymbolVector strip_length_prefix(const SymbolVector& image) {
    if (image.size() < 2)
        throw IntegrityError("sliding: recovered image shorter than its length prefix");
    const std::size_t len = (static_cast<std::size_t>(image[0]) << 8) | image[1];
    if (len + 2 > image.size())
        throw IntegrityError("sliding: recovered image length prefix exceeds image");
    return SymbolVector(image.begin() + 2, image.begin() + 2 + static_cast<long>(len));
}

}  // namespace detail

struct SlidingEncoderConfig {
    double redundancy_ratio = 0.25;  // repair fraction rho; 0 disables repairs
    std::size_t max_window = 2048;   // hard bound on unacked seqs
};

class SlidingEncoder {
public:
    explicit SlidingEncoder(SlidingEncoderConfig config) : config_(config) {
        if (config.redundancy_ratio < 0.0 || config.redundancy_ratio >= 1.0)
            throw ConfigError("sliding: redundancy_ratio must be in [0, 1)");
        if (config.max_window == 0)
            throw ConfigError("sliding: max_window must be positive");
        if (config.redundancy_ratio > 0.0) {
            const long spacing = std::lround(1.0 / config.redundancy_ratio) - 1;
            sources_between_repairs_ = spacing < 1 ? 1 : static_cast<std::uint64_t>(spacing);
        }
    }

    // Admits one source payload into the stream and the window.
    SourcePacket push_source(SymbolVector payload, double now) {
        if (window_.size() >= config_.max_window)
            throw WindowOverflowError("sliding: unacked window exceeds max_window");
        const std::uint32_t seq = next_seq_++;
        retained_.emplace(seq, detail::length_prefixed(payload));
        window_.insert(seq);
        ++sources_since_repair_;
        return SourcePacket{seq, std::move(payload), now};
    }

    // True when the S^k R emission pattern calls for a repair next.
    bool next_is_repair() const {
        return sources_between_repairs_ > 0 &&
               sources_since_repair_ >= sources_between_repairs_;
    }

    // Emits a repair over the current window; empty window -> nullopt and
    // the caller skips the slot.
    std::optional<RepairPacket> emit_repair(double now) {
        if (window_.empty()) return std::nullopt;
        const std::uint32_t window_start = *window_.begin();
        const std::uint32_t window_end = *window_.rbegin();
        const std::uint32_t repair_seq = next_repair_seq_++;
        const auto coefficients =
            expand_coefficients(repair_seq, window_start, window_end);

        SymbolVector payload;
        for (std::uint32_t s = window_start;; ++s) {
            const auto it = retained_.find(s);
            if (it == retained_.end())
                throw IntegrityError("sliding: retained span lost a windowed seq");
            detail::axpy_grow(coefficients[s - window_start], it->second, payload);
            if (s == window_end) break;
        }
        sources_since_repair_ = 0;
        return RepairPacket{repair_seq, window_start, window_end,
                            repair_seq, std::move(payload), now};
    }

    // Prunes everything the ack covers.  Idempotent; stale acks are no-ops.
    void on_ack(const AckPacket& ack) {
        if (ack.cumulative_seq)
            window_.erase(window_.begin(), window_.upper_bound(*ack.cumulative_seq));
        for (std::uint32_t s : ack.extra_seqs) window_.erase(s);
        if (window_.empty()) {
            retained_.clear();
        } else {
            retained_.erase(retained_.begin(), retained_.lower_bound(*window_.begin()));
        }
    }

    std::size_t window_size() const { return window_.size(); }
    bool window_empty() const { return window_.empty(); }
    std::optional<std::pair<std::uint32_t, std::uint32_t>> window_span() const {
        if (window_.empty()) return std::nullopt;
        return std::make_pair(*window_.begin(), *window_.rbegin());
    }
    std::uint32_t next_seq() const { return next_seq_; }
    std::uint32_t repairs_emitted() const { return next_repair_seq_; }
    const SlidingEncoderConfig& config() const { return config_; }

private:
    SlidingEncoderConfig config_;
    std::uint64_t sources_between_repairs_ = 0;  // 0 = repairs disabled
    std::uint64_t sources_since_repair_ = 0;
    std::uint32_t next_seq_ = 0;
    std::uint32_t next_repair_seq_ = 0;
    std::set<std::uint32_t> window_;                     // unacked seqs
    std::map<std::uint32_t, SymbolVector> retained_;     // seq -> image, spans the window
};

// One recovered (or directly received) source.
struct DecodedSource {
    std::uint32_t seq = 0;
    SymbolVector payload;
    double decoded_at = 0.0;
    bool via_repair = false;  // false = direct arrival
};

class SlidingDecoder {
public:
    // Processes a source arrival.  Returns the packet itself (unless it is
    // a duplicate) plus everything its substitution unlocked.
    std::vector<DecodedSource> on_source(const SourcePacket& pkt, double now) {
        note_seen_up_to(pkt.seq);
        std::vector<DecodedSource> out;
        if (is_delivered(pkt.seq)) return out;  // duplicate, ignore
        deliver(pkt.seq, detail::length_prefixed(pkt.payload), now, false, out);
        return out;
    }

    // Processes a repair arrival.  Returns every source it unlocked.
    std::vector<DecodedSource> on_repair(const RepairPacket& pkt, double now) {
        if (pkt.window_end < pkt.window_start)
            throw WireError("sliding: repair window is inverted");
        note_seen_up_to(pkt.window_end);

        // Everything below window_start is acked at the encoder, hence
        // already delivered here; images below it can be dropped.
        if (pkt.window_start > retain_floor_) {
            retain_floor_ = pkt.window_start;
            delivered_images_.erase(delivered_images_.begin(),
                                    delivered_images_.lower_bound(retain_floor_));
        }

        const auto coefficients =
            expand_coefficients(pkt.coeff_seed, pkt.window_start, pkt.window_end);
        Row row;
        row.rhs = pkt.payload;
        for (std::uint32_t s = pkt.window_start;; ++s) {
            const FieldElement c = coefficients[s - pkt.window_start];
            if (is_delivered(s)) {
                const auto it = delivered_images_.find(s);
                if (it == delivered_images_.end())
                    throw IntegrityError("sliding: delivered image pruned while still referenced");
                detail::axpy_grow(c, it->second, row.rhs);  // XOR doubles as subtraction
            } else {
                row.coeffs.emplace(s, c);
            }
            if (s == pkt.window_end) break;
        }

        std::vector<DecodedSource> out;
        insert_row(std::move(row), now, out);
        return out;
    }

    // Cumulative-plus-extras receiver report for the encoder.
    AckPacket make_ack(double now) const {
        AckPacket ack;
        if (delivered_prefix_ >= 0)
            ack.cumulative_seq = static_cast<std::uint32_t>(delivered_prefix_);
        ack.extra_seqs.assign(delivered_above_.begin(), delivered_above_.end());
        ack.sent_at = now;
        return ack;
    }

    bool is_delivered(std::uint32_t seq) const {
        return static_cast<std::int64_t>(seq) <= delivered_prefix_ ||
               delivered_above_.count(seq) != 0;
    }

    const std::set<std::uint32_t>& missing() const { return missing_; }
    std::size_t buffered_rows() const { return rows_.size(); }
    std::int64_t highest_seen() const { return highest_seen_; }

private:
    struct Row {
        std::map<std::uint32_t, FieldElement> coeffs;  // missing seq -> coefficient
        SymbolVector rhs;
    };

    void note_seen_up_to(std::uint32_t seq) {
        for (std::int64_t s = highest_seen_ + 1; s <= static_cast<std::int64_t>(seq); ++s) {
            const auto u = static_cast<std::uint32_t>(s);
            if (!is_delivered(u)) missing_.insert(u);
        }
        if (static_cast<std::int64_t>(seq) > highest_seen_)
            highest_seen_ = static_cast<std::int64_t>(seq);
    }

    // Records a delivery, substitutes it through every buffered row, and
    // cascades any rows that collapse to a single unknown.
    void deliver(std::uint32_t seq, SymbolVector image, double now, bool via_repair,
                 std::vector<DecodedSource>& out) {
        out.push_back({seq, detail::strip_length_prefix(image), now, via_repair});
        missing_.erase(seq);
        if (static_cast<std::int64_t>(seq) == delivered_prefix_ + 1) {
            ++delivered_prefix_;
            auto it = delivered_above_.begin();
            while (it != delivered_above_.end() &&
                   static_cast<std::int64_t>(*it) == delivered_prefix_ + 1) {
                ++delivered_prefix_;
                it = delivered_above_.erase(it);
            }
        } else if (static_cast<std::int64_t>(seq) > delivered_prefix_) {
            delivered_above_.insert(seq);
        }

        // Substitute into rows.  In RREF only non-pivot references exist,
        // except when `seq` itself pivots a row; handle both.
        std::vector<Row> reinsert;
        std::vector<std::pair<std::uint32_t, SymbolVector>> solved;
        auto pivot_it = rows_.find(seq);
        if (pivot_it != rows_.end()) {
            Row r = std::move(pivot_it->second);
            rows_.erase(pivot_it);
            detail::axpy_grow(r.coeffs.at(seq), image, r.rhs);
            r.coeffs.erase(seq);
            reinsert.push_back(std::move(r));
        }
        for (auto it = rows_.begin(); it != rows_.end();) {
            auto& r = it->second;
            const auto c = r.coeffs.find(seq);
            if (c != r.coeffs.end()) {
                detail::axpy_grow(c->second, image, r.rhs);
                r.coeffs.erase(c);
                if (r.coeffs.size() == 1) {
                    solved.emplace_back(r.coeffs.begin()->first, std::move(r.rhs));
                    it = rows_.erase(it);
                    continue;
                }
                if (r.coeffs.empty())
                    throw IntegrityError("sliding: row lost its pivot during substitution");
            }
            ++it;
        }

        if (static_cast<std::int64_t>(seq) >= retain_floor_)
            delivered_images_.emplace(seq, std::move(image));

        for (auto& r : reinsert) insert_row(std::move(r), now, out);
        for (auto& [s, rhs] : solved) deliver(s, std::move(rhs), now, true, out);
    }

    // Reduces a fresh row against the buffered RREF and installs it (or
    // releases a decode, or discards it as redundant).
    void insert_row(Row row, double now, std::vector<DecodedSource>& out) {
        // Eliminate every existing pivot the row touches.  Subtracting a
        // pivot row only introduces seqs above the pivot, none of them
        // pivots themselves, so one ascending pass suffices.
        std::uint32_t cursor = 0;
        for (;;) {
            auto it = row.coeffs.lower_bound(cursor);
            if (it == row.coeffs.end()) break;
            const std::uint32_t s = it->first;
            const auto pivot_row = rows_.find(s);
            if (pivot_row == rows_.end()) {
                cursor = s + 1;
                continue;
            }
            const FieldElement f = it->second;
            for (const auto& [s2, c2] : pivot_row->second.coeffs) {
                auto [slot, fresh] = row.coeffs.emplace(s2, 0);
                slot->second ^= gf_mul(f, c2);
                if (slot->second == 0) row.coeffs.erase(slot);
                (void)fresh;
            }
            detail::axpy_grow(f, pivot_row->second.rhs, row.rhs);
            cursor = s;  // s was eliminated; anything new lies above it
        }

        if (row.coeffs.empty()) {
            for (std::uint8_t b : row.rhs)
                if (b != 0)
                    throw IntegrityError("sliding: redundant repair contradicts deliveries");
            return;  // linearly dependent, nothing new
        }

        const std::uint32_t pivot = row.coeffs.begin()->first;
        const FieldElement inv = gf_inv(row.coeffs.begin()->second);
        if (inv != 1) {
            for (auto& [s, c] : row.coeffs) c = gf_mul(c, inv);
            vec_scale_inplace(inv, row.rhs);
        }

        if (row.coeffs.size() == 1) {
            deliver(pivot, std::move(row.rhs), now, true, out);
            return;
        }

        // Back-substitute to keep full RREF: no other row may reference
        // the new pivot.
        std::vector<std::pair<std::uint32_t, SymbolVector>> solved;
        for (auto it = rows_.begin(); it != rows_.end();) {
            auto& r = it->second;
            const auto c = r.coeffs.find(pivot);
            if (c != r.coeffs.end()) {
                const FieldElement f = c->second;
                r.coeffs.erase(c);
                for (const auto& [s2, c2] : row.coeffs) {
                    if (s2 == pivot) continue;
                    auto [slot, fresh] = r.coeffs.emplace(s2, 0);
                    slot->second ^= gf_mul(f, c2);
                    if (slot->second == 0) r.coeffs.erase(slot);
                    (void)fresh;
                }
                detail::axpy_grow(f, row.rhs, r.rhs);
                if (r.coeffs.empty())
                    throw IntegrityError("sliding: back-substitution emptied a row");
                if (r.coeffs.size() == 1) {
                    solved.emplace_back(r.coeffs.begin()->first, std::move(r.rhs));
                    it = rows_.erase(it);
                    continue;
                }
            }
            ++it;
        }

        rows_.emplace(pivot, std::move(row));
        for (auto& [s, rhs] : solved) deliver(s, std::move(rhs), now, true, out);
    }

    std::int64_t delivered_prefix_ = -1;        // all seqs <= this delivered
    std::set<std::uint32_t> delivered_above_;   // delivered beyond the prefix
    std::set<std::uint32_t> missing_;           // known sent, not delivered
    std::map<std::uint32_t, SymbolVector> delivered_images_;  // >= retain_floor_
    std::map<std::uint32_t, Row> rows_;         // pivot seq -> buffered row
    std::int64_t highest_seen_ = -1;
    std::int64_t retain_floor_ = 0;
};

// Reorders decoder output into contiguous-seq releases (playout buffer).
class InOrderDelivery {
public:
    struct Release {
        std::uint32_t seq;
        SymbolVector payload;
        double released_at;
    };

    std::vector<Release> feed(std::uint32_t seq, SymbolVector payload, double at) {
        std::vector<Release> out;
        if (seq < next_) return out;  // late duplicate
        held_.emplace(seq, std::move(payload));
        auto it = held_.begin();
        while (it != held_.end() && it->first == next_) {
            out.push_back({it->first, std::move(it->second), at});
            it = held_.erase(it);
            ++next_;
        }
        return out;
    }

    std::uint32_t next_expected() const { return next_; }
    std::size_t held() const { return held_.size(); }

private:
    std::map<std::uint32_t, SymbolVector> held_;
    std::uint32_t next_ = 0;
};

}  // namespace feclab
