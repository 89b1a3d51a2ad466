// trace.hpp -- per-packet event log produced by a simulation run.
//
// Trace CSV format (v1), one row per event:
//
//   event_time_s,direction,kind,seq,size_bytes,queue_delay_s,decoded_delay_s,mode
//
//   direction       fwd | rev
//   kind            send_source | send_repair | send_padding | send_ack |
//                   send_feedback | arrive_* | drop_* | decode_source
//   seq             source seq / repair seq / padding seq; empty for
//                   acks and feedback
//   size_bytes      accounted transport size (payload + configured
//                   header overhead) for data; wire size for control
//   queue_delay_s   sender queueing (send_source/send_padding rows only)
//   decoded_delay_s recovery delay (decode_source rows only)
//   mode            repair coupling mode of the run (same every row)
//
// drop_* rows are logged at send time (the channel decides fate at
// transmit); a dropped packet has both a send_* and a drop_* row.

#pragma once

#include <cstdint>
#include <cstdio>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "feclab/scenario.hpp"

namespace feclab {

enum class TraceKind : std::uint8_t {
    SendSource, SendRepair, SendPadding, SendAck, SendFeedback,
    ArriveSource, ArriveRepair, ArrivePadding, ArriveAck, ArriveFeedback,
    DropSource, DropRepair, DropPadding, DropAck, DropFeedback,
    DecodeSource,
};

inline const char* to_string(TraceKind k) {
    switch (k) {
        case TraceKind::SendSource: return "send_source";
        case TraceKind::SendRepair: return "send_repair";
        case TraceKind::SendPadding: return "send_padding";
        case TraceKind::SendAck: return "send_ack";
        case TraceKind::SendFeedback: return "send_feedback";
        case TraceKind::ArriveSource: return "arrive_source";
        case TraceKind::ArriveRepair: return "arrive_repair";
        case TraceKind::ArrivePadding: return "arrive_padding";
        case TraceKind::ArriveAck: return "arrive_ack";
        case TraceKind::ArriveFeedback: return "arrive_feedback";
        case TraceKind::DropSource: return "drop_source";
        case TraceKind::DropRepair: return "drop_repair";
        case TraceKind::DropPadding: return "drop_padding";
        case TraceKind::DropAck: return "drop_ack";
        case TraceKind::DropFeedback: return "drop_feedback";
        case TraceKind::DecodeSource: return "decode_source";
    }
    return "?";
}

struct TraceEvent {
    double at = 0.0;
    bool forward = true;  // fwd = sender->receiver data path
    TraceKind kind = TraceKind::SendSource;
    std::optional<std::uint32_t> seq;
    double size_bytes = 0.0;
    std::optional<double> queue_delay;
    std::optional<double> decoded_delay;
};

struct SimulationTrace {
    ScenarioConfig scenario;
    std::vector<TraceEvent> events;

    struct Failure {
        double at = 0.0;
        std::string reason;
    };
    std::optional<Failure> failure;  // run truncated here if set

    // Extras not in the CSV: allowed-rate trajectory and vp starvation.
    std::vector<std::pair<double, double>> rate_samples;  // (t, X bytes/s)
    std::uint64_t starved_slots = 0;
};

namespace detail {

inline std::string format_csv_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace detail

inline void write_trace_csv(const SimulationTrace& trace, std::ostream& out) {
    out << "event_time_s,direction,kind,seq,size_bytes,queue_delay_s,"
           "decoded_delay_s,mode\n";
    const char* mode = to_string(trace.scenario.coupling);
    for (const auto& e : trace.events) {
        out << detail::format_csv_double(e.at) << ',' << (e.forward ? "fwd" : "rev")
            << ',' << to_string(e.kind) << ',';
        if (e.seq) out << *e.seq;
        out << ',' << detail::format_csv_double(e.size_bytes) << ',';
        if (e.queue_delay) out << detail::format_csv_double(*e.queue_delay);
        out << ',';
        if (e.decoded_delay) out << detail::format_csv_double(*e.decoded_delay);
        out << ',' << mode << '\n';
    }
    if (trace.failure) {
        out << "# truncated at " << detail::format_csv_double(trace.failure->at)
            << ": " << trace.failure->reason << '\n';
    }
}

}  // namespace feclab
