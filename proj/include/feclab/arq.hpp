// arq.hpp -- selective-repeat ARQ baseline.
//
// The receiver acks every arrival (cumulative seq + extras); the sender
// derives the nack set from the gaps, retransmits each nacked seq at most
// once per suppression interval (nominally one RTT), and keeps a per-seq
// timer so a lost tail -- which no later arrival will ever expose via a
// gap -- still gets retransmitted.  Every loss costs at least one extra
// RTT of recovery delay by construction: the gap must travel back to the
// sender and the retransmission must travel forward again.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "feclab/errors.hpp"
#include "feclab/gf256.hpp"
#include "feclab/wire.hpp"

namespace feclab {

struct ArqConfig {
    double suppression_interval = 0.1;   // min gap between retransmits of one seq
    double retransmit_timeout = 0.5;     // tail-loss timer
    std::size_t buffer_limit = 1 << 20;  // max retained unacked payloads
};

class ArqSender {
public:
    explicit ArqSender(ArqConfig config) : config_(config) {
        if (config.suppression_interval <= 0.0 || config.retransmit_timeout <= 0.0)
            throw ConfigError("arq: intervals must be positive");
    }

    SourcePacket register_send(SymbolVector payload, double now) {
        const std::uint32_t seq = next_seq_++;
        if (buffer_.size() >= config_.buffer_limit) {
            // Oldest entry falls off; a later nack for it is unrecoverable.
            buffer_.erase(buffer_.begin());
        }
        buffer_.emplace(seq, Entry{payload, now});
        return SourcePacket{seq, std::move(payload), now};
    }

    // Ack prunes the buffer; gaps below the highest acked seq become nacks.
    // Returns the retransmissions due now (suppression-filtered).
    std::vector<SourcePacket> on_ack(const AckPacket& ack, double now) {
        if (ack.cumulative_seq) {
            buffer_.erase(buffer_.begin(), buffer_.upper_bound(*ack.cumulative_seq));
        }
        for (std::uint32_t s : ack.extra_seqs) buffer_.erase(s);

        // Nacks: unacked seqs below the highest seq this ack vouches for.
        std::uint32_t horizon = 0;
        bool have_horizon = false;
        if (ack.cumulative_seq) {
            horizon = *ack.cumulative_seq;
            have_horizon = true;
        }
        if (!ack.extra_seqs.empty()) {
            horizon = have_horizon ? std::max(horizon, ack.extra_seqs.back())
                                   : ack.extra_seqs.back();
            have_horizon = true;
        }
        std::vector<SourcePacket> out;
        if (!have_horizon) return out;
        for (auto& [seq, entry] : buffer_) {
            if (seq >= horizon) break;
            if (now - entry.last_tx >= config_.suppression_interval) {
                entry.last_tx = now;
                ++retransmissions_;
                out.push_back(SourcePacket{seq, entry.payload, now});
            }
        }
        return out;
    }

    // Tail-loss path: everything unacked and quiet past the timeout.
    std::vector<SourcePacket> due_retransmits(double now) {
        std::vector<SourcePacket> out;
        for (auto& [seq, entry] : buffer_) {
            if (now - entry.last_tx >= config_.retransmit_timeout) {
                entry.last_tx = now;
                ++retransmissions_;
                out.push_back(SourcePacket{seq, entry.payload, now});
            }
        }
        return out;
    }

    bool idle() const { return buffer_.empty(); }
    std::size_t buffered() const { return buffer_.size(); }
    std::uint64_t retransmissions() const { return retransmissions_; }

private:
    struct Entry {
        SymbolVector payload;
        double last_tx;
    };

    ArqConfig config_;
    std::uint32_t next_seq_ = 0;
    std::uint64_t retransmissions_ = 0;
    std::map<std::uint32_t, Entry> buffer_;
};

class ArqReceiver {
public:
    // Returns true when the seq is new (first delivery).
    bool on_source(const SourcePacket& pkt) {
        if (is_delivered(pkt.seq)) return false;
        if (static_cast<std::int64_t>(pkt.seq) == prefix_ + 1) {
            ++prefix_;
            auto it = above_.begin();
            while (it != above_.end() && static_cast<std::int64_t>(*it) == prefix_ + 1) {
                ++prefix_;
                it = above_.erase(it);
            }
        } else {
            above_.insert(pkt.seq);
        }
        return true;
    }

    bool is_delivered(std::uint32_t seq) const {
        return static_cast<std::int64_t>(seq) <= prefix_ || above_.count(seq) != 0;
    }

    AckPacket make_ack(double now) const {
        AckPacket ack;
        if (prefix_ >= 0) ack.cumulative_seq = static_cast<std::uint32_t>(prefix_);
        ack.extra_seqs.assign(above_.begin(), above_.end());
        ack.sent_at = now;
        return ack;
    }

private:
    std::int64_t prefix_ = -1;
    std::set<std::uint32_t> above_;
};

}  // namespace feclab
