// Selective-repeat retransmission: gap-driven nacks with per-seq
// suppression, timeout sweeps for tail loss, and receiver ack assembly.

#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "feclab/arq.hpp"

using namespace feclab;

namespace {

SymbolVector payload(std::uint32_t seq) {
    return SymbolVector{static_cast<std::uint8_t>(seq), 0x42};
}

std::set<std::uint32_t> seqs_of(const std::vector<SourcePacket>& pkts) {
    std::set<std::uint32_t> out;
    for (const auto& p : pkts) out.insert(p.seq);
    return out;
}

}  // namespace

TEST_CASE("gaps below the ack horizon trigger retransmissions", "[arq]") {
    ArqSender tx(ArqConfig{0.1, 0.5, 1 << 20});
    for (std::uint32_t s = 0; s < 6; ++s) tx.register_send(payload(s), 0.0);

    AckPacket ack;
    ack.cumulative_seq = 1;  // 0,1 in
    ack.extra_seqs = {4, 5};
    const auto retx = tx.on_ack(ack, 1.0);
    CHECK(seqs_of(retx) == std::set<std::uint32_t>{2, 3});
    for (const auto& p : retx) CHECK(p.payload == payload(p.seq));
}

TEST_CASE("suppression blocks an immediate duplicate nack", "[arq]") {
    ArqSender tx(ArqConfig{0.1, 0.5, 1 << 20});
    for (std::uint32_t s = 0; s < 4; ++s) tx.register_send(payload(s), 0.0);

    AckPacket ack;
    ack.cumulative_seq = 0;
    ack.extra_seqs = {3};
    CHECK(seqs_of(tx.on_ack(ack, 1.0)) == std::set<std::uint32_t>{1, 2});
    // Same ack 50 ms later: inside the suppression interval, nothing.
    CHECK(tx.on_ack(ack, 1.05).empty());
    // 110 ms later: eligible again.
    CHECK(seqs_of(tx.on_ack(ack, 1.11)) == std::set<std::uint32_t>{1, 2});
}

TEST_CASE("acked seqs leave the buffer and are never retransmitted", "[arq]") {
    ArqSender tx(ArqConfig{0.1, 0.5, 1 << 20});
    for (std::uint32_t s = 0; s < 3; ++s) tx.register_send(payload(s), 0.0);
    AckPacket all;
    all.cumulative_seq = 2;
    CHECK(tx.on_ack(all, 0.2).empty());
    CHECK(tx.idle());
    CHECK(tx.due_retransmits(10.0).empty());
}

TEST_CASE("timeout sweep catches tail loss without later acks", "[arq]") {
    ArqSender tx(ArqConfig{0.1, 0.5, 1 << 20});
    tx.register_send(payload(0), 0.0);
    tx.register_send(payload(1), 0.0);
    CHECK(tx.due_retransmits(0.4).empty());           // before timeout
    const auto due = tx.due_retransmits(0.6);          // after 0.5 s
    CHECK(seqs_of(due) == std::set<std::uint32_t>{0, 1});
    // The sweep rearms last_tx: an immediate second sweep is empty.
    CHECK(tx.due_retransmits(0.7).empty());
    CHECK(seqs_of(tx.due_retransmits(1.2)) == std::set<std::uint32_t>{0, 1});
}

TEST_CASE("buffer eviction drops the oldest entry", "[arq]") {
    ArqConfig cfg;
    cfg.buffer_limit = 3;
    ArqSender tx(cfg);
    for (std::uint32_t s = 0; s < 4; ++s) tx.register_send(payload(s), 0.0);
    CHECK(tx.buffered() == 3);
    AckPacket ack;
    ack.extra_seqs = {3};
    // Seq 0 was evicted; only 1 and 2 can come back.
    CHECK(seqs_of(tx.on_ack(ack, 1.0)) == std::set<std::uint32_t>{1, 2});
}

TEST_CASE("receiver acks carry prefix plus scattered extras", "[arq]") {
    ArqReceiver rx;
    CHECK(rx.on_source(SourcePacket{0, payload(0), 0.0}));
    CHECK(rx.on_source(SourcePacket{1, payload(1), 0.0}));
    CHECK(rx.on_source(SourcePacket{4, payload(4), 0.0}));
    CHECK_FALSE(rx.on_source(SourcePacket{1, payload(1), 0.1}));  // duplicate

    const AckPacket ack = rx.make_ack(1.0);
    REQUIRE(ack.cumulative_seq.has_value());
    CHECK(*ack.cumulative_seq == 1);
    CHECK(ack.extra_seqs == std::vector<std::uint32_t>{4});
    CHECK(rx.is_delivered(4));
    CHECK_FALSE(rx.is_delivered(2));

    // Before anything arrives there is no cumulative ack.
    ArqReceiver empty;
    const AckPacket none = empty.make_ack(0.0);
    CHECK_FALSE(none.cumulative_seq.has_value());
    CHECK(none.extra_seqs.empty());
}
