// rate_control.hpp -- equation-based (TFRC-style) rate control.
//
// Receiver side: LossEventMonitor turns seq gaps into loss events (losses
// within one RTT of an event's first loss belong to that event), keeps the
// last 8 closed inter-event intervals measured in packets, and computes
// the loss event rate p = 1 / I_mean with the standard weighted average
// over the history, where I_mean takes the larger of the average with and
// without the open (still-growing) interval so p decays once losses stop.
//
// Sender side: RateState holds the smoothed RTT and turns each feedback
// report (recv_rate, p, rtt sample) into an allowed rate
//
//     X = s / ( R*sqrt(2bp/3) + t_RTO * (3*sqrt(3bp/8)) * p * (1+32p^2) )
//
// with b = 1 and t_RTO = 4R, capped at twice the reported receive rate
// (skipped when the report says nothing arrived, so an idle spell cannot
// wedge the rate at zero); p = 0 yields the doubling regime (the cap
// alone).  A floor of one packet per 64 s keeps the sender able to probe
// after an outage.  The first loss event seeds its preceding interval
// with the clean run observed since stream start.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <vector>

#include "feclab/errors.hpp"

namespace feclab {

// Weighted average of the most recent intervals (newest first), using the
// standard 8-deep weight taper 1,1,1,1,0.8,0.6,0.4,0.2.  Returns the loss
// event rate 1/I_mean; no intervals -> 0.
inline double loss_event_rate(const std::vector<double>& intervals_newest_first) {
    static constexpr double kWeights[8] = {1.0, 1.0, 1.0, 1.0, 0.8, 0.6, 0.4, 0.2};
    if (intervals_newest_first.empty()) return 0.0;
    const std::size_t n = std::min<std::size_t>(intervals_newest_first.size(), 8);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += kWeights[i] * intervals_newest_first[i];
        den += kWeights[i];
    }
    const double mean = num / den;
    return mean > 0.0 ? 1.0 / mean : 0.0;
}

// The throughput equation itself, bytes per second.  p <= 0 -> +infinity
// (callers apply the receive-rate cap).
inline double tfrc_equation(double p, double srtt, double segment_bytes, double rto) {
    if (p <= 0.0) return std::numeric_limits<double>::infinity();
    constexpr double b = 1.0;
    const double root_term = srtt * std::sqrt(2.0 * b * p / 3.0);
    const double rto_term =
        rto * (3.0 * std::sqrt(3.0 * b * p / 8.0)) * p * (1.0 + 32.0 * p * p);
    return segment_bytes / (root_term + rto_term);
}

class LossEventMonitor {
public:
    // `rtt_hint` seeds the loss-event grouping window until set_rtt is fed
    // real samples.
    explicit LossEventMonitor(double rtt_hint = 0.1) : rtt_(rtt_hint) {}

    void set_rtt(double rtt) {
        if (rtt > 0.0) rtt_ = rtt;
    }

    // Source-seq arrival; gaps below `seq` are losses detected now.
    void on_arrival(std::uint32_t seq, double now) {
        ++packets_seen_;
        if (static_cast<std::int64_t>(seq) <= highest_) return;  // reordered/dup: no gap
        const std::int64_t gap_from = highest_ + 1;
        for (std::int64_t lost = gap_from; lost < static_cast<std::int64_t>(seq); ++lost)
            on_loss(static_cast<std::uint32_t>(lost), now);
        highest_ = static_cast<std::int64_t>(seq);
    }

    // Loss event rate over the closed intervals plus the open one, using
    // whichever average is larger (so the rate decays during clean runs).
    double current_loss_event_rate() const {
        if (!have_event_) return 0.0;
        std::vector<double> with_open;
        with_open.reserve(closed_.size() + 1);
        with_open.push_back(open_interval());
        for (double v : closed_) with_open.push_back(v);
        const double incl = loss_event_rate(with_open);  // note: rate = 1/mean
        const double excl =
            loss_event_rate(std::vector<double>(closed_.begin(), closed_.end()));
        // Larger mean interval = smaller rate; take the smaller rate.
        if (excl == 0.0) return incl;
        return std::min(incl, excl);
    }

    std::vector<double> intervals_newest_first() const {
        return {closed_.begin(), closed_.end()};
    }
    std::uint64_t packets_seen() const { return packets_seen_; }
    std::int64_t highest_seq() const { return highest_; }

private:
    void on_loss(std::uint32_t seq, double now) {
        if (have_event_ && now - event_start_time_ < rtt_) return;  // same event
        if (have_event_) {
            // Close the previous interval: packet distance between the
            // first losses of consecutive events.
            closed_.push_front(static_cast<double>(seq - event_start_seq_));
        } else {
            // First event ever: the clean run from stream start stands in
            // as the preceding interval, so the first p estimate reflects
            // the observed loss spacing instead of a one-packet interval.
            closed_.push_front(std::max(1.0, static_cast<double>(seq)));
        }
        if (closed_.size() > 8) closed_.pop_back();
        have_event_ = true;
        event_start_seq_ = seq;
        event_start_time_ = now;
    }

    double open_interval() const {
        // Packets since the current event began, highest received included.
        const double open =
            static_cast<double>(highest_ - static_cast<std::int64_t>(event_start_seq_)) + 1.0;
        return std::max(open, 1.0);
    }

    double rtt_;
    std::int64_t highest_ = -1;
    std::uint64_t packets_seen_ = 0;
    bool have_event_ = false;
    std::uint32_t event_start_seq_ = 0;
    double event_start_time_ = 0.0;
    std::deque<double> closed_;  // newest first, at most 8
};

struct RateState {
    double segment_bytes = 1500.0;
    double initial_rate = 1000.0;  // bytes/s before any feedback
    double srtt = 0.0;
    double rto = 0.0;
    double allowed_rate = 1000.0;  // bytes/s, the controlling output X
    double recv_rate = 0.0;        // last reported receive rate, bytes/s
    double loss_rate = 0.0;        // last reported p
    bool have_feedback = false;
};

inline void rate_init(RateState& state, double segment_bytes, double initial_rate) {
    state = RateState{};
    state.segment_bytes = segment_bytes;
    state.initial_rate = initial_rate;
    state.allowed_rate = initial_rate;
}

// Folds one feedback report into the sender state.  srtt is an EWMA with
// gain 0.1 (first sample initializes), t_RTO = 4*srtt.
inline void rate_on_feedback(RateState& state, double recv_rate, double p,
                             double rtt_sample) {
    if (rtt_sample <= 0.0)
        throw ConfigError("rate_control: rtt sample must be positive");
    state.srtt = state.have_feedback ? 0.9 * state.srtt + 0.1 * rtt_sample : rtt_sample;
    state.rto = 4.0 * state.srtt;
    state.have_feedback = true;
    state.recv_rate = recv_rate;
    state.loss_rate = p;

    // The receive-rate cap only makes sense when data actually arrived in
    // the reporting interval; a zero report means the sender was idle or
    // everything was lost, and capping to zero would wedge the rate at the
    // floor with no way back up.
    double x = tfrc_equation(p, state.srtt, state.segment_bytes, state.rto);
    if (recv_rate > 0.0) x = std::min(x, 2.0 * recv_rate);
    // Floor: one segment per 64 seconds, and never below a trickle start.
    x = std::max(x, state.segment_bytes / 64.0);
    state.allowed_rate = x;
}

// Variable-payload sizing: spend rate changes on packet size at a fixed
// packet rate r.  Returns the payload size and whether the rate has
// starved below the minimum payload (the caller may then thin packets).
struct VpSizing {
    double payload_bytes = 0.0;
    bool starved = false;
};

inline VpSizing vp_packet_size(double allowed_rate, double packet_rate,
                               double header_overhead, double min_payload,
                               double max_payload) {
    if (packet_rate <= 0.0)
        throw ConfigError("rate_control: vp packet rate must be positive");
    const double raw = allowed_rate / packet_rate - header_overhead;
    VpSizing out;
    out.starved = raw < min_payload;
    out.payload_bytes = std::clamp(raw, min_payload, max_payload);
    return out;
}

}  // namespace feclab
