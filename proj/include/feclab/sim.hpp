// sim.hpp -- deterministic discrete-event network simulator.
//
// One sender, one receiver, a lossy fixed-delay channel each way.  The
// sender runs the traffic model through a TFRC-style rate controller and
// one of the reliability schemes; the receiver decodes, acks, and reports
// feedback.  Everything is event-driven off a (time, ordinal) queue and
// all randomness comes from the two seeded channel RNGs, so a run is a
// pure function of its ScenarioConfig: byte-identical traces on repeat.
//
// Repair coupling modes:
//   inline   repairs debit the same token bucket as sources
//   outside  repairs bypass the bucket (ride outside the controlled rate)
//   vp       fixed packet rate; the controlled rate sets the payload size
//            (min/max-clamped); repairs take over packet slots
//
// Pacing: token bucket capped at one segment, refilled at the allowed
// rate; packets depit their accounted size (a full segment when
// count_small_as_full, else payload + header overhead).  The emission
// pattern for the sliding codec inserts one repair after every
// round(1/rho)-1 source departures.
//
// End of run: after the traffic model finishes and the send queue
// flushes, reliability state drains -- the sliding window keeps receiving
// repairs at the run's mean repair cadence, ARQ keeps its timeout loop --
// until clean or until drain_max_s expires.  The drain phase is not
// rate-limited (the controlled epoch is [0, duration_s]).
//
// Source payload bytes are a fixed function of (seq, position) so tests
// can regenerate any payload without carrying it around.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "feclab/arq.hpp"
#include "feclab/block_code.hpp"
#include "feclab/channel.hpp"
#include "feclab/errors.hpp"
#include "feclab/event_queue.hpp"
#include "feclab/rate_control.hpp"
#include "feclab/scenario.hpp"
#include "feclab/sliding.hpp"
#include "feclab/trace.hpp"
#include "feclab/traffic.hpp"
#include "feclab/wire.hpp"

namespace feclab {

inline std::uint8_t source_payload_byte(std::uint32_t seq, std::size_t i) {
    return static_cast<std::uint8_t>(seq * 131u + static_cast<std::uint32_t>(i) * 31u + 7u);
}

inline SymbolVector make_source_payload(std::uint32_t seq, std::size_t size) {
    SymbolVector payload(size);
    for (std::size_t i = 0; i < size; ++i) payload[i] = source_payload_byte(seq, i);
    return payload;
}

class Simulation {
public:
    explicit Simulation(ScenarioConfig config)
        : config_(std::move(config)),
          forward_(config_.channel_forward),
          reverse_(config_.channel_reverse) {
        ValidationReport report = validate(config_);
        if (!report.ok()) throw ConfigError("scenario invalid: " + report.errors.front());
        trace_.scenario = config_;
        hard_stop_ = config_.duration_s + config_.drain_max_s + config_.rtt() + 1.0;

        rate_init(rate_, config_.rate.segment_bytes, config_.rate.initial_rate_Bps);
        trace_.rate_samples.emplace_back(0.0, rate_.allowed_rate);
        monitor_.set_rtt(config_.rtt());

        switch (config_.reliability.kind) {
            case ReliabilityKind::Sliding:
                encoder_.emplace(SlidingEncoderConfig{config_.reliability.redundancy_ratio,
                                                      config_.reliability.max_window});
                decoder_.emplace();
                break;
            case ReliabilityKind::Block:
                block_.emplace(BlockCodeConfig{config_.reliability.block_k,
                                               config_.reliability.block_n});
                break;
            case ReliabilityKind::Arq:
                arq_.emplace(ArqConfig{config_.arq_suppression(), config_.arq_timeout(),
                                       std::size_t{1} << 20});
                break;
            case ReliabilityKind::None:
                break;
        }
    }

    SimulationTrace run() {
        build_frames();
        for (const auto& f : frames_)
            queue_.push(f.due_at, EventKind::FrameDue, FrameDuePayload{f.index});
        if (config_.coupling == CouplingMode::Vp)
            queue_.push(0.0, EventKind::SendSlot, SendSlotPayload{});
        queue_.push(config_.feedback_interval(), EventKind::FeedbackTimer,
                    FeedbackTimerPayload{});

        while (!queue_.empty() && !stopped_) {
            Event e = queue_.pop();
            if (e.at > hard_stop_) break;
            now_ = e.at;
            dispatch(e);
        }
        return std::move(trace_);
    }

private:
    /* ------------------------------------------------------------------ */
    /* sender: queueing and pacing                                        */
    /* ------------------------------------------------------------------ */

    struct QueueItem {
        std::uint64_t remaining = 0;   // payload bytes left in this item
        double enqueued_at = 0.0;
        bool retransmission = false;
        std::uint32_t retx_seq = 0;
        SymbolVector retx_payload;
    };

    void build_frames() {
        const auto& t = config_.traffic;
        switch (t.model) {
            case TrafficModel::Vbr: {
                const auto n = static_cast<std::uint64_t>(
                    std::llround(t.frame_rate * config_.duration_s));
                frames_ = vbr_frames(t.bitrate_bps, t.frame_rate, t.gop_size,
                                     t.i_frame_byte_share, n, t.max_payload);
                break;
            }
            case TrafficModel::Cbr:
                frames_ = cbr_frames(t.bitrate_bps, t.packet_bytes, config_.duration_s);
                break;
            case TrafficModel::Trace: {
                std::ifstream in(t.trace_file);
                if (!in) throw ConfigError("traffic: cannot open trace file " + t.trace_file);
                frames_ = load_frame_trace(in, t.frame_rate, t.gop_size, t.max_payload);
                // A long trace still ends at duration_s.
                while (!frames_.empty() && frames_.back().due_at >= config_.duration_s)
                    frames_.pop_back();
                if (frames_.empty()) throw ConfigError("traffic: trace empty within duration");
                break;
            }
        }
        frames_remaining_ = frames_.size();
    }

    double accounted(double payload_bytes) const {
        return config_.rate.count_small_as_full
                   ? config_.rate.segment_bytes
                   : payload_bytes + config_.rate.header_overhead_bytes;
    }

    double transport_size(double payload_bytes) const {
        return payload_bytes + config_.rate.header_overhead_bytes;
    }

    void accrue_tokens() {
        tokens_ = std::min(config_.rate.segment_bytes,
                           tokens_ + rate_.allowed_rate * (now_ - last_accrual_));
        last_accrual_ = now_;
    }

    void schedule_send_slot(double at) {
        at = std::max(at, now_);
        if (at > hard_stop_) return;
        if (pending_slot_ && *pending_slot_ <= at + 1e-12) return;
        pending_slot_ = at;
        queue_.push(at, EventKind::SendSlot, SendSlotPayload{});
    }

    bool in_drain() const { return now_ >= config_.duration_s; }

    bool reliability_pending() const {
        if (encoder_ && !encoder_->window_empty()) return true;
        if (arq_ && !arq_->idle()) return true;
        return !repair_backlog_.empty() || !sendq_.empty();
    }

    // Token-paced sender (inline/outside coupling).
    void try_send() {
        accrue_tokens();
        for (;;) {
            if (stopped_) return;
            // 1. block-code repairs waiting behind their block
            if (!repair_backlog_.empty()) {
                RepairPacket& pkt = repair_backlog_.front();
                const double cost = config_.coupling == CouplingMode::Inline
                                        ? accounted(static_cast<double>(pkt.payload.size()))
                                        : 0.0;
                if (!spend(cost)) return;
                RepairPacket out = std::move(pkt);
                repair_backlog_.pop_front();
                out.sent_at = now_;
                send_repair(out);
                continue;
            }
            // 2. sliding repairs on the S^k R pattern
            if (encoder_ && encoder_->next_is_repair() && !encoder_->window_empty()) {
                const double cost =
                    config_.coupling == CouplingMode::Inline && !in_drain()
                        ? accounted(repair_payload_estimate())
                        : 0.0;
                if (!spend(cost)) return;
                if (auto pkt = encoder_->emit_repair(now_)) send_repair(*pkt);
                continue;
            }
            // 3. queued source data (retransmissions ride the queue front)
            if (!sendq_.empty()) {
                QueueItem& item = sendq_.front();
                const double payload_bytes = static_cast<double>(item.remaining);
                const double cost = in_drain() ? 0.0 : accounted(payload_bytes);
                if (!spend(cost)) return;
                QueueItem out = std::move(item);
                sendq_.pop_front();
                queued_payload_bytes_ -= out.remaining;
                emit_source_item(out, out.remaining);
                continue;
            }
            // 4. padding holds the rate when the queue is idle
            if (config_.rate.padding && config_.coupling != CouplingMode::Vp &&
                now_ < config_.duration_s) {
                const double fill =
                    std::max(1.0, config_.rate.segment_bytes - config_.rate.header_overhead_bytes);
                if (!spend(accounted(fill))) return;
                send_padding(static_cast<std::uint16_t>(fill));
                continue;
            }
            break;
        }
        maybe_start_drain();
    }

    // Debits `cost` tokens if available; otherwise schedules a wakeup for
    // when they will be and reports false.
    bool spend(double cost) {
        if (cost <= 0.0) return true;
        if (tokens_ >= cost - 1e-6) {
            // Sub-microbyte debt is accrual round-off, not a real deficit;
            // forgiving it here keeps the deficit/rate wakeup below from
            // degenerating to an interval under one ulp of now_ (which
            // would re-fire at the same timestamp forever).
            tokens_ = std::max(0.0, tokens_ - cost);
            return true;
        }
        const double interval =
            std::max((cost - tokens_) / rate_.allowed_rate, 1e-9);
        schedule_send_slot(now_ + interval);
        return false;
    }

    double repair_payload_estimate() const {
        // Combination length = longest image in the window (+2 len prefix).
        return static_cast<double>(config_.traffic.max_payload + 2);
    }

    /* ------------------------------------------------------------------ */
    /* sender: packet emission                                            */
    /* ------------------------------------------------------------------ */

    void emit_source_item(const QueueItem& item, std::uint64_t fragment_bytes) {
        if (item.retransmission) {
            SourcePacket pkt{item.retx_seq, item.retx_payload, now_};
            send_source(pkt, /*first_tx=*/false, now_ - item.enqueued_at);
            return;
        }
        const std::uint32_t seq = assign_seq();
        SymbolVector payload =
            make_source_payload(seq, static_cast<std::size_t>(fragment_bytes));
        SourcePacket pkt{seq, std::move(payload), now_};
        register_with_reliability(pkt);
        if (stopped_) return;
        send_source(pkt, /*first_tx=*/true, now_ - item.enqueued_at);
    }

    std::uint32_t assign_seq() {
        return next_source_seq_++;
    }

    void register_with_reliability(const SourcePacket& pkt) {
        try {
            if (encoder_) {
                const SourcePacket mirror = encoder_->push_source(pkt.payload, now_);
                if (mirror.seq != pkt.seq)
                    throw IntegrityError("sim: encoder seq diverged from sender seq");
            } else if (arq_) {
                const SourcePacket mirror = arq_->register_send(pkt.payload, now_);
                if (mirror.seq != pkt.seq)
                    throw IntegrityError("sim: arq seq diverged from sender seq");
                arm_arq_wakeup();
            } else if (block_) {
                block_images_.push_back(detail::length_prefixed(pkt.payload));
                if (block_images_.size() == config_.reliability.block_k)
                    flush_block();
            }
        } catch (const WindowOverflowError& e) {
            fail(e.what());
        } catch (const IntegrityError& e) {
            fail(e.what());
        }
    }

    void flush_block() {
        const std::uint32_t k = config_.reliability.block_k;
        if (block_id_ > 0xFFFF) {
            fail("block id exceeded 16-bit coeff_seed field");
            return;
        }
        std::size_t max_len = 0;
        for (const auto& img : block_images_) max_len = std::max(max_len, img.size());
        for (auto& img : block_images_) img.resize(max_len, 0);
        auto repairs = block_->encode(block_images_);
        const std::uint32_t base_seq = static_cast<std::uint32_t>(block_id_) * k;
        for (std::size_t j = 0; j < repairs.size(); ++j) {
            RepairPacket pkt;
            pkt.repair_seq = next_repair_seq_++;
            pkt.window_start = base_seq;
            pkt.window_end = base_seq + k - 1;
            pkt.coeff_seed = (static_cast<std::uint32_t>(block_id_) << 16) |
                             static_cast<std::uint32_t>(k + j);
            pkt.payload = std::move(repairs[j]);
            repair_backlog_.push_back(std::move(pkt));
        }
        ++block_id_;
        block_images_.clear();
    }

    void send_source(const SourcePacket& pkt, bool first_tx, double queue_delay) {
        if (first_tx) first_send_.emplace(pkt.seq, now_);
        TraceEvent row;
        row.at = now_;
        row.forward = true;
        row.kind = TraceKind::SendSource;
        row.seq = pkt.seq;
        row.size_bytes = transport_size(static_cast<double>(pkt.payload.size()));
        row.queue_delay = queue_delay;
        trace_.events.push_back(row);
        transmit_forward(AnyPacket{pkt}, TraceKind::DropSource, row.seq, row.size_bytes);
    }

    void send_repair(const RepairPacket& pkt) {
        TraceEvent row;
        row.at = now_;
        row.forward = true;
        row.kind = TraceKind::SendRepair;
        row.seq = pkt.repair_seq;
        row.size_bytes = transport_size(static_cast<double>(pkt.payload.size()));
        trace_.events.push_back(row);
        transmit_forward(AnyPacket{pkt}, TraceKind::DropRepair, row.seq, row.size_bytes);
    }

    void send_padding(std::uint16_t fill) {
        PaddingPacket pkt{pad_seq_++, fill, now_};
        TraceEvent row;
        row.at = now_;
        row.forward = true;
        row.kind = TraceKind::SendPadding;
        row.seq = pkt.pad_seq;
        row.size_bytes = transport_size(static_cast<double>(fill));
        row.queue_delay = 0.0;
        trace_.events.push_back(row);
        transmit_forward(AnyPacket{pkt}, TraceKind::DropPadding, row.seq, row.size_bytes);
    }

    void transmit_forward(AnyPacket pkt, TraceKind drop_kind,
                          std::optional<std::uint32_t> seq, double size) {
        const Channel::Outcome outcome = forward_.transmit(now_);
        if (outcome.delivered) {
            queue_.push(outcome.arrive_at, EventKind::PacketArrival,
                        PacketArrivalPayload{std::move(pkt)});
        } else {
            TraceEvent row;
            row.at = now_;
            row.forward = true;
            row.kind = drop_kind;
            row.seq = seq;
            row.size_bytes = size;
            trace_.events.push_back(row);
        }
    }

    void transmit_reverse(AnyPacket pkt, TraceKind send_kind, TraceKind drop_kind,
                          double wire_size) {
        TraceEvent row;
        row.at = now_;
        row.forward = false;
        row.kind = send_kind;
        row.size_bytes = wire_size;
        trace_.events.push_back(row);
        const Channel::Outcome outcome = reverse_.transmit(now_);
        if (outcome.delivered) {
            queue_.push(outcome.arrive_at, EventKind::AckArrival,
                        AckArrivalPayload{std::move(pkt)});
        } else {
            row.kind = drop_kind;
            trace_.events.push_back(row);
        }
    }

    /* ------------------------------------------------------------------ */
    /* drain: flush reliability state after the traffic ends              */
    /* ------------------------------------------------------------------ */

    void maybe_start_drain() {
        if (drain_started_ || frames_remaining_ > 0 || !sendq_.empty()) return;
        if (!encoder_ || encoder_->window_empty()) return;
        drain_started_ = true;
        drain_interval_ = encoder_->repairs_emitted() > 0
                              ? config_.duration_s / encoder_->repairs_emitted()
                              : 0.05;
        drain_interval_ = std::clamp(drain_interval_, 1e-4, 0.25);
        if (config_.coupling != CouplingMode::Vp)
            schedule_send_slot(now_ + drain_interval_);
    }

    // Called from SendSlot during the drain phase (token modes).
    void drain_tick() {
        if (!encoder_ || encoder_->window_empty()) return;
        if (now_ > config_.duration_s + config_.drain_max_s) return;
        if (auto pkt = encoder_->emit_repair(now_)) send_repair(*pkt);
        if (!encoder_->window_empty())
            schedule_send_slot(now_ + drain_interval_);
    }

    /* ------------------------------------------------------------------ */
    /* ARQ timers                                                         */
    /* ------------------------------------------------------------------ */

    void arm_arq_wakeup() {
        if (!arq_ || arq_wakeup_pending_) return;
        const double at = now_ + config_.arq_timeout();
        if (at > hard_stop_ || now_ > config_.duration_s + config_.drain_max_s) return;
        arq_wakeup_pending_ = true;
        queue_.push(at, EventKind::SendSlot, SendSlotPayload{});
    }

    void arq_wakeup_tick() {
        if (!arq_) return;
        arq_wakeup_pending_ = false;
        for (auto& pkt : arq_->due_retransmits(now_)) enqueue_retransmission(pkt);
        if (!arq_->idle()) {
            const double at = now_ + config_.arq_suppression();
            if (at <= hard_stop_ && now_ <= config_.duration_s + config_.drain_max_s) {
                arq_wakeup_pending_ = true;
                queue_.push(at, EventKind::SendSlot, SendSlotPayload{});
            }
        }
    }

    void enqueue_retransmission(const SourcePacket& pkt) {
        QueueItem item;
        item.remaining = pkt.payload.size();
        item.enqueued_at = now_;
        item.retransmission = true;
        item.retx_seq = pkt.seq;
        item.retx_payload = pkt.payload;
        queued_payload_bytes_ += item.remaining;
        sendq_.push_front(std::move(item));
    }

    /* ------------------------------------------------------------------ */
    /* vp mode: fixed packet grid                                         */
    /* ------------------------------------------------------------------ */

    void vp_slot() {
        const double slot_interval = 1.0 / config_.rate.vp_packet_rate;
        const bool in_traffic = now_ < config_.duration_s;
        if (in_traffic || reliability_pending()) {
            const VpSizing sizing = vp_packet_size(
                rate_.allowed_rate, config_.rate.vp_packet_rate,
                config_.rate.header_overhead_bytes, config_.rate.min_payload_bytes,
                static_cast<double>(config_.traffic.max_payload));
            if (sizing.starved) ++trace_.starved_slots;
            const auto size = static_cast<std::uint64_t>(sizing.payload_bytes);

            if (!repair_backlog_.empty()) {
                RepairPacket pkt = std::move(repair_backlog_.front());
                repair_backlog_.pop_front();
                pkt.sent_at = now_;
                send_repair(pkt);
            } else if (encoder_ && !encoder_->window_empty() &&
                       (encoder_->next_is_repair() || (!in_traffic && sendq_.empty()))) {
                if (auto pkt = encoder_->emit_repair(now_)) send_repair(*pkt);
            } else if (!sendq_.empty()) {
                QueueItem& head = sendq_.front();
                const std::uint64_t take =
                    head.retransmission ? head.remaining : std::min(size, head.remaining);
                QueueItem slice = head;
                head.remaining -= take;
                queued_payload_bytes_ -= take;
                const bool exhausted = head.remaining == 0;
                if (exhausted) sendq_.pop_front();
                emit_source_item(slice, take);
            } else if (config_.rate.padding && in_traffic) {
                send_padding(static_cast<std::uint16_t>(size));
            }
        }
        // Strict grid: slot k is at k/packet_rate exactly.
        ++vp_slot_index_;
        const double next = static_cast<double>(vp_slot_index_) * slot_interval;
        const bool keep_going =
            next < config_.duration_s ||
            (reliability_pending() && next <= config_.duration_s + config_.drain_max_s);
        if (keep_going && next <= hard_stop_)
            queue_.push(next, EventKind::SendSlot, SendSlotPayload{});
        else
            vp_chain_stopped_ = true;
    }

    /* ------------------------------------------------------------------ */
    /* receiver                                                           */
    /* ------------------------------------------------------------------ */

    void on_packet_arrival(const AnyPacket& any) {
        if (const auto* src = std::get_if<SourcePacket>(&any)) {
            receive_source(*src);
        } else if (const auto* rep = std::get_if<RepairPacket>(&any)) {
            receive_repair(*rep);
        } else if (const auto* pad = std::get_if<PaddingPacket>(&any)) {
            note_data(transport_size(pad->fill_bytes), pad->sent_at);
            TraceEvent row;
            row.at = now_;
            row.forward = true;
            row.kind = TraceKind::ArrivePadding;
            row.seq = pad->pad_seq;
            row.size_bytes = transport_size(pad->fill_bytes);
            trace_.events.push_back(row);
        }
    }

    void note_data(double accounted_bytes, double pkt_sent_at) {
        got_data_ = true;
        bytes_since_feedback_ += accounted_bytes;
        last_pkt_sent_at_ = pkt_sent_at;
        last_pkt_arrive_at_ = now_;
    }

    void receive_source(const SourcePacket& pkt) {
        monitor_.on_arrival(pkt.seq, now_);
        note_data(transport_size(static_cast<double>(pkt.payload.size())), pkt.sent_at);
        TraceEvent row;
        row.at = now_;
        row.forward = true;
        row.kind = TraceKind::ArriveSource;
        row.seq = pkt.seq;
        row.size_bytes = transport_size(static_cast<double>(pkt.payload.size()));
        trace_.events.push_back(row);

        switch (config_.reliability.kind) {
            case ReliabilityKind::Sliding: {
                try {
                    auto decoded = decoder_->on_source(pkt, now_);
                    record_decodes(decoded);
                } catch (const IntegrityError& e) {
                    fail(e.what());
                    return;
                }
                send_ack(decoder_->make_ack(now_));
                break;
            }
            case ReliabilityKind::Arq: {
                arq_rx_.on_source(pkt);
                send_ack(arq_rx_.make_ack(now_));
                break;
            }
            case ReliabilityKind::Block: {
                block_rx_source(pkt);
                break;
            }
            case ReliabilityKind::None:
                break;
        }
    }

    void receive_repair(const RepairPacket& pkt) {
        note_data(transport_size(static_cast<double>(pkt.payload.size())), pkt.sent_at);
        TraceEvent row;
        row.at = now_;
        row.forward = true;
        row.kind = TraceKind::ArriveRepair;
        row.seq = pkt.repair_seq;
        row.size_bytes = transport_size(static_cast<double>(pkt.payload.size()));
        trace_.events.push_back(row);

        if (config_.reliability.kind == ReliabilityKind::Sliding) {
            try {
                auto decoded = decoder_->on_repair(pkt, now_);
                record_decodes(decoded);
            } catch (const IntegrityError& e) {
                fail(e.what());
                return;
            }
            send_ack(decoder_->make_ack(now_));
        } else if (config_.reliability.kind == ReliabilityKind::Block) {
            block_rx_repair(pkt);
        }
    }

    void record_decodes(const std::vector<DecodedSource>& decoded) {
        for (const auto& d : decoded) {
            if (!d.via_repair) continue;  // the triggering arrival itself
            TraceEvent row;
            row.at = now_;
            row.forward = true;
            row.kind = TraceKind::DecodeSource;
            row.seq = d.seq;
            row.size_bytes = transport_size(static_cast<double>(d.payload.size()));
            const auto it = first_send_.find(d.seq);
            if (it != first_send_.end())
                row.decoded_delay = now_ - it->second - forward_.one_way_delay();
            trace_.events.push_back(row);
        }
    }

    void send_ack(const AckPacket& ack) {
        const double wire = static_cast<double>(encode(ack).size());
        transmit_reverse(AnyPacket{ack}, TraceKind::SendAck, TraceKind::DropAck, wire);
    }

    /* block receiver: group by block, decode once k packets are in */

    struct BlockAssembly {
        std::map<std::uint32_t, SymbolVector> images;  // in-block index -> image
        std::set<std::uint32_t> source_indices_arrived;
    };

    void block_rx_source(const SourcePacket& pkt) {
        const std::uint32_t k = config_.reliability.block_k;
        const std::uint64_t bid = pkt.seq / k;
        if (blocks_done_.count(bid)) return;
        auto& assembly = blocks_[bid];
        const std::uint32_t idx = pkt.seq % k;
        assembly.source_indices_arrived.insert(idx);
        assembly.images.emplace(idx, detail::length_prefixed(pkt.payload));
        block_try_decode(bid);
    }

    void block_rx_repair(const RepairPacket& pkt) {
        const std::uint64_t bid = pkt.coeff_seed >> 16;
        const std::uint32_t idx = pkt.coeff_seed & 0xFFFFu;
        if (blocks_done_.count(bid)) return;
        auto& assembly = blocks_[bid];
        assembly.images.emplace(idx, pkt.payload);
        block_try_decode(bid);
    }

    void block_try_decode(std::uint64_t bid) {
        const std::uint32_t k = config_.reliability.block_k;
        auto& assembly = blocks_[bid];
        if (assembly.images.size() < k) return;

        // All sources present: nothing to recover.
        if (assembly.source_indices_arrived.size() == k) {
            blocks_done_.insert(bid);
            blocks_.erase(bid);
            return;
        }
        std::size_t max_len = 0;
        for (const auto& [idx, img] : assembly.images) max_len = std::max(max_len, img.size());
        std::vector<std::pair<std::size_t, SymbolVector>> received;
        received.reserve(assembly.images.size());
        for (const auto& [idx, img] : assembly.images) {
            SymbolVector padded = img;
            padded.resize(max_len, 0);
            received.emplace_back(idx, std::move(padded));
        }
        auto sources = block_->decode(received);
        if (!sources) return;  // cannot happen with k packets of an MDS code
        for (std::uint32_t j = 0; j < k; ++j) {
            if (assembly.source_indices_arrived.count(j)) continue;
            const std::uint32_t seq = static_cast<std::uint32_t>(bid) * k + j;
            SymbolVector payload = detail::strip_length_prefix((*sources)[j]);
            TraceEvent row;
            row.at = now_;
            row.forward = true;
            row.kind = TraceKind::DecodeSource;
            row.seq = seq;
            row.size_bytes = transport_size(static_cast<double>(payload.size()));
            const auto it = first_send_.find(seq);
            if (it != first_send_.end())
                row.decoded_delay = now_ - it->second - forward_.one_way_delay();
            trace_.events.push_back(row);
        }
        blocks_done_.insert(bid);
        blocks_.erase(bid);
    }

    /* feedback */

    void on_feedback_timer() {
        const double interval = config_.feedback_interval();
        // Report only intervals in which data arrived: an all-idle interval
        // would report a zero receive rate, which carries no information
        // the sender can act on (the rate cap skips zero anyway) and does
        // not happen in feedback-per-received-burst receivers.
        if (got_data_ && bytes_since_feedback_ > 0.0) {
            FeedbackReport report;
            report.recv_rate_micro =
                FeedbackReport::to_micro(bytes_since_feedback_ / interval);
            report.loss_rate_nano =
                FeedbackReport::to_nano(monitor_.current_loss_event_rate());
            const double echo = last_pkt_sent_at_ + (now_ - last_pkt_arrive_at_);
            report.rtt_echo_us = static_cast<std::uint32_t>(std::llround(echo * 1e6));
            report.sent_at = now_;
            bytes_since_feedback_ = 0.0;
            transmit_reverse(AnyPacket{report}, TraceKind::SendFeedback,
                             TraceKind::DropFeedback,
                             static_cast<double>(encode(report).size()));
        }
        const double next = now_ + interval;
        if (next <= hard_stop_)
            queue_.push(next, EventKind::FeedbackTimer, FeedbackTimerPayload{});
    }

    /* ------------------------------------------------------------------ */
    /* sender: control arrivals                                           */
    /* ------------------------------------------------------------------ */

    void on_ack_arrival(const AnyPacket& any) {
        if (const auto* ack = std::get_if<AckPacket>(&any)) {
            TraceEvent row;
            row.at = now_;
            row.forward = false;
            row.kind = TraceKind::ArriveAck;
            row.size_bytes = static_cast<double>(encode(*ack).size());
            trace_.events.push_back(row);
            if (encoder_) encoder_->on_ack(*ack);
            if (arq_) {
                for (auto& pkt : arq_->on_ack(*ack, now_)) enqueue_retransmission(pkt);
            }
            touch_sender();
        } else if (const auto* report = std::get_if<FeedbackReport>(&any)) {
            TraceEvent row;
            row.at = now_;
            row.forward = false;
            row.kind = TraceKind::ArriveFeedback;
            row.size_bytes = static_cast<double>(encode(*report).size());
            trace_.events.push_back(row);
            const double rtt_sample = now_ - static_cast<double>(report->rtt_echo_us) * 1e-6;
            accrue_tokens();  // settle the bucket at the old rate first
            rate_on_feedback(rate_, report->recv_rate(), report->loss_event_rate(),
                             std::max(rtt_sample, 1e-6));
            trace_.rate_samples.emplace_back(now_, rate_.allowed_rate);
            touch_sender();
        }
    }

    void touch_sender() {
        if (config_.coupling == CouplingMode::Vp) {
            // Restart the grid if the drain chain stopped and work appeared.
            if (vp_chain_stopped_ && reliability_pending() &&
                now_ <= config_.duration_s + config_.drain_max_s) {
                vp_chain_stopped_ = false;
                const double slot_interval = 1.0 / config_.rate.vp_packet_rate;
                while (static_cast<double>(vp_slot_index_) * slot_interval < now_)
                    ++vp_slot_index_;
                queue_.push(static_cast<double>(vp_slot_index_) * slot_interval,
                            EventKind::SendSlot, SendSlotPayload{});
            }
            return;
        }
        try_send();
    }

    /* ------------------------------------------------------------------ */
    /* event dispatch                                                     */
    /* ------------------------------------------------------------------ */

    void on_frame_due(std::uint64_t index) {
        const FrameEvent& frame = frames_.at(index);
        --frames_remaining_;
        if (config_.coupling == CouplingMode::Vp) {
            QueueItem item;
            item.remaining = frame.bytes;
            item.enqueued_at = now_;
            queued_payload_bytes_ += item.remaining;
            sendq_.push_back(std::move(item));
        } else {
            for (std::uint32_t frag : frame.fragments) {
                QueueItem item;
                item.remaining = frag;
                item.enqueued_at = now_;
                queued_payload_bytes_ += item.remaining;
                sendq_.push_back(std::move(item));
            }
        }
        if (queued_payload_bytes_ > config_.max_queue_bytes) {
            fail("sender queue exceeded max_queue_bytes");
            return;
        }
        if (config_.coupling != CouplingMode::Vp) try_send();
    }

    void dispatch(const Event& e) {
        switch (e.kind) {
            case EventKind::FrameDue:
                on_frame_due(std::get<FrameDuePayload>(e.payload).frame_index);
                break;
            case EventKind::PacketArrival:
                on_packet_arrival(std::get<PacketArrivalPayload>(e.payload).packet);
                break;
            case EventKind::AckArrival:
                on_ack_arrival(std::get<AckArrivalPayload>(e.payload).packet);
                break;
            case EventKind::FeedbackTimer:
                on_feedback_timer();
                break;
            case EventKind::SendSlot:
                if (config_.coupling == CouplingMode::Vp) {
                    vp_slot();
                } else {
                    pending_slot_.reset();
                    if (arq_) arq_wakeup_tick();
                    if (drain_started_ && in_drain() && sendq_.empty()) drain_tick();
                    try_send();
                }
                break;
        }
    }

    void fail(const std::string& reason) {
        if (!trace_.failure) trace_.failure = SimulationTrace::Failure{now_, reason};
        stopped_ = true;
    }

    /* ------------------------------------------------------------------ */

    ScenarioConfig config_;
    Channel forward_, reverse_;
    EventQueue queue_;
    SimulationTrace trace_;
    double now_ = 0.0;
    double hard_stop_ = 0.0;
    bool stopped_ = false;

    // traffic
    std::vector<FrameEvent> frames_;
    std::size_t frames_remaining_ = 0;

    // sender
    std::deque<QueueItem> sendq_;
    std::deque<RepairPacket> repair_backlog_;
    std::uint64_t queued_payload_bytes_ = 0;
    double tokens_ = 0.0;
    double last_accrual_ = 0.0;
    std::optional<double> pending_slot_;
    RateState rate_;
    std::uint32_t next_source_seq_ = 0;
    std::uint32_t next_repair_seq_ = 0;
    std::uint32_t pad_seq_ = 0;
    std::map<std::uint32_t, double> first_send_;

    std::optional<SlidingEncoder> encoder_;
    std::optional<BlockCode> block_;
    std::vector<SymbolVector> block_images_;
    std::uint64_t block_id_ = 0;
    std::optional<ArqSender> arq_;
    bool arq_wakeup_pending_ = false;

    bool drain_started_ = false;
    double drain_interval_ = 0.05;

    // vp grid
    std::uint64_t vp_slot_index_ = 0;
    bool vp_chain_stopped_ = false;

    // receiver
    std::optional<SlidingDecoder> decoder_;
    ArqReceiver arq_rx_;
    LossEventMonitor monitor_;
    std::map<std::uint64_t, BlockAssembly> blocks_;
    std::set<std::uint64_t> blocks_done_;
    double bytes_since_feedback_ = 0.0;
    double last_pkt_sent_at_ = 0.0;
    double last_pkt_arrive_at_ = 0.0;
    bool got_data_ = false;
};

inline SimulationTrace run_simulation(const ScenarioConfig& config) {
    return Simulation(config).run();
}

}  // namespace feclab
