// metrics.hpp -- run summary computed from a simulation trace.
//
// Definitions (documented here and in the README, frozen by tests):
//
//   availability     a source seq is available at the earlier of its first
//                    arrival and its decode
//   latency          available_at - first_send_at.  Send-anchored: sender
//                    queueing is reported separately (queue_delay), so the
//                    deadline measures the network path plus recovery.
//   eventual_ratio   available seqs / distinct seqs sent
//   deadline_ratio   seqs available within deadline_s / distinct seqs sent
//   recovery delay   latency - one_way_delay, for seqs not available on
//                    first flight (lost-then-recovered by repair, decode,
//                    or retransmission); quantiles are nearest-rank
//   goodput_bps      8 * payload bytes of available seqs / duration_s
//                    (drain-phase recoveries count; the clock does not
//                    stretch)
//   overhead         non-goodput data transmissions (repairs + padding +
//                    retransmissions) / all data transmissions
//
// A trace with a failure record is truncated; metrics refuse it unless
// allow_partial is set (the CLI maps that refusal to exit code 3).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "feclab/errors.hpp"
#include "feclab/trace.hpp"

namespace feclab {

struct RunMetrics {
    std::uint64_t sources_sent = 0;          // distinct seqs
    std::uint64_t source_transmissions = 0;  // including retransmissions
    std::uint64_t repairs_sent = 0;
    std::uint64_t padding_sent = 0;
    std::uint64_t delivered = 0;
    std::uint64_t recovered = 0;  // delivered but not on first flight
    double eventual_ratio = 0.0;
    double deadline_ratio = 0.0;
    double rec_p50_s = 0.0;
    double rec_p95_s = 0.0;
    double rec_p99_s = 0.0;
    double rec_max_s = 0.0;
    double goodput_bps = 0.0;
    double max_queue_delay_s = 0.0;
    double overhead = 0.0;
};

namespace detail {

// Nearest-rank quantile on a sorted sample: smallest value whose rank
// covers fraction q.
inline double nearest_rank(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const auto n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(q * n));
    if (rank == 0) rank = 1;
    if (rank > sorted.size()) rank = sorted.size();
    return sorted[rank - 1];
}

}  // namespace detail

inline RunMetrics compute_metrics(const SimulationTrace& trace,
                                  bool allow_partial = false) {
    if (trace.events.empty()) throw MetricsError("metrics: empty trace");
    if (trace.failure && !allow_partial)
        throw MetricsError("metrics: trace truncated at " +
                           std::to_string(trace.failure->at) + " (" +
                           trace.failure->reason + "); pass allow_partial to override");

    struct PerSeq {
        double first_send = -1.0;
        double available = -1.0;
        double payload_bytes = 0.0;
        bool via_first_flight = false;
    };
    std::map<std::uint32_t, PerSeq> seqs;

    RunMetrics m;
    const double overhead_bytes = trace.scenario.rate.header_overhead_bytes;
    const double owd = trace.scenario.channel_forward.one_way_delay;

    for (const auto& e : trace.events) {
        switch (e.kind) {
            case TraceKind::SendSource: {
                ++m.source_transmissions;
                auto& s = seqs[*e.seq];
                if (s.first_send < 0.0) {
                    s.first_send = e.at;
                    s.payload_bytes = e.size_bytes - overhead_bytes;
                    ++m.sources_sent;
                }
                if (e.queue_delay)
                    m.max_queue_delay_s = std::max(m.max_queue_delay_s, *e.queue_delay);
                break;
            }
            case TraceKind::SendRepair:
                ++m.repairs_sent;
                break;
            case TraceKind::SendPadding:
                ++m.padding_sent;
                if (e.queue_delay)
                    m.max_queue_delay_s = std::max(m.max_queue_delay_s, *e.queue_delay);
                break;
            case TraceKind::ArriveSource: {
                auto& s = seqs[*e.seq];
                if (s.available < 0.0) {
                    s.available = e.at;
                    // On-time iff this is the first transmission's flight.
                    s.via_first_flight =
                        s.first_send >= 0.0 && e.at - s.first_send <= owd + 1e-9;
                }
                break;
            }
            case TraceKind::DecodeSource: {
                auto& s = seqs[*e.seq];
                if (s.available < 0.0) s.available = e.at;
                break;
            }
            default:
                break;
        }
    }

    std::vector<double> recovery;
    double delivered_payload_bytes = 0.0;
    std::uint64_t within_deadline = 0;
    for (const auto& [seq, s] : seqs) {
        if (s.first_send < 0.0) continue;  // decode without send: impossible, skip
        if (s.available < 0.0) continue;
        ++m.delivered;
        delivered_payload_bytes += s.payload_bytes;
        const double latency = s.available - s.first_send;
        if (latency <= trace.scenario.deadline_s + 1e-9) ++within_deadline;
        if (!s.via_first_flight) {
            ++m.recovered;
            recovery.push_back(std::max(0.0, latency - owd));
        }
    }

    if (m.sources_sent == 0) throw MetricsError("metrics: no source packets in trace");
    m.eventual_ratio = static_cast<double>(m.delivered) / m.sources_sent;
    m.deadline_ratio = static_cast<double>(within_deadline) / m.sources_sent;
    std::sort(recovery.begin(), recovery.end());
    m.rec_p50_s = detail::nearest_rank(recovery, 0.50);
    m.rec_p95_s = detail::nearest_rank(recovery, 0.95);
    m.rec_p99_s = detail::nearest_rank(recovery, 0.99);
    m.rec_max_s = recovery.empty() ? 0.0 : recovery.back();
    m.goodput_bps = delivered_payload_bytes * 8.0 / trace.scenario.duration_s;
    const std::uint64_t retransmissions = m.source_transmissions - m.sources_sent;
    const std::uint64_t all_data = m.source_transmissions + m.repairs_sent + m.padding_sent;
    m.overhead =
        all_data == 0
            ? 0.0
            : static_cast<double>(m.repairs_sent + m.padding_sent + retransmissions) /
                  static_cast<double>(all_data);
    return m;
}

inline const char* metrics_csv_header() {
    return "eventual_ratio,deadline_ratio,rec_p50_s,rec_p95_s,rec_p99_s,rec_max_s,"
           "goodput_bps,max_queue_delay_s,overhead";
}

inline std::string metrics_csv_row(const RunMetrics& m) {
    using detail::format_csv_double;
    std::string row;
    row += format_csv_double(m.eventual_ratio);
    row += ',';
    row += format_csv_double(m.deadline_ratio);
    row += ',';
    row += format_csv_double(m.rec_p50_s);
    row += ',';
    row += format_csv_double(m.rec_p95_s);
    row += ',';
    row += format_csv_double(m.rec_p99_s);
    row += ',';
    row += format_csv_double(m.rec_max_s);
    row += ',';
    row += format_csv_double(m.goodput_bps);
    row += ',';
    row += format_csv_double(m.max_queue_delay_s);
    row += ',';
    row += format_csv_double(m.overhead);
    return row;
}

inline void write_metrics_csv(const RunMetrics& m, std::ostream& out) {
    out << metrics_csv_header() << '\n' << metrics_csv_row(m) << '\n';
}

}  // namespace feclab
