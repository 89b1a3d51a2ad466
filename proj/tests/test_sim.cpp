// End-to-end simulator behavior: determinism, recovery paths for each
// reliability scheme, vp-mode grid timing, queue overflow, drop logging.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "feclab/errors.hpp"
#include "feclab/metrics.hpp"
#include "feclab/sim.hpp"

using namespace feclab;

namespace {

std::size_t count_kind(const SimulationTrace& t, TraceKind k) {
    std::size_t n = 0;
    for (const auto& e : t.events)
        if (e.kind == k) ++n;
    return n;
}

std::vector<TraceEvent> rows_for_seq(const SimulationTrace& t, TraceKind k,
                                     std::uint32_t seq) {
    std::vector<TraceEvent> out;
    for (const auto& e : t.events)
        if (e.kind == k && e.seq && *e.seq == seq) out.push_back(e);
    return out;
}

// Small CBR scenario over a scripted-loss forward channel.
ScenarioConfig scripted_cbr(std::set<std::uint64_t> drops, double duration,
                            double bitrate, std::uint32_t packet_bytes) {
    ScenarioConfig c;
    c.traffic.model = TrafficModel::Cbr;
    c.traffic.bitrate_bps = bitrate;
    c.traffic.packet_bytes = packet_bytes;
    c.traffic.max_payload = packet_bytes;
    c.channel_forward.model = ScriptedLoss{std::move(drops)};
    c.channel_forward.one_way_delay = 0.05;
    c.channel_reverse.model = BernoulliLoss{0.0};
    c.channel_reverse.one_way_delay = 0.05;
    c.rate.segment_bytes = 1500.0;
    c.rate.count_small_as_full = false;
    c.rate.initial_rate_Bps = 1e6;
    c.duration_s = duration;
    c.deadline_s = 0.15;
    c.plr = 0.0;
    return c;
}

}  // namespace

TEST_CASE("identical configs produce byte-identical traces", "[sim]") {
    ScenarioConfig c = scenario_video_proxy();
    c.duration_s = 2.0;
    const SimulationTrace a = run_simulation(c);
    const SimulationTrace b = run_simulation(c);
    std::ostringstream sa, sb;
    write_trace_csv(a, sa);
    write_trace_csv(b, sb);
    REQUIRE(sa.str() == sb.str());
    CHECK(metrics_csv_row(compute_metrics(a)) == metrics_csv_row(compute_metrics(b)));
}

TEST_CASE("video proxy run: full delivery, overhead tracks the ratio", "[sim]") {
    const SimulationTrace t = run_simulation(scenario_video_proxy());
    REQUIRE(!t.failure);
    const RunMetrics m = compute_metrics(t);
    CHECK(m.eventual_ratio == 1.0);
    CHECK(m.deadline_ratio >= 0.99);
    // 10 s of 441370 b/s delivered in full.
    CHECK(m.goodput_bps == Catch::Approx(441370.0).epsilon(0.01));
    // Repair share of data transmissions ~ redundancy_ratio.
    CHECK(m.overhead == Catch::Approx(0.125).margin(0.01));
    CHECK(m.padding_sent == 0);
    CHECK(m.source_transmissions == m.sources_sent);  // no retransmissions
    // Send rows match arrive + drop rows packet for packet.
    CHECK(count_kind(t, TraceKind::SendSource) ==
          count_kind(t, TraceKind::ArriveSource) + count_kind(t, TraceKind::DropSource));
    CHECK(count_kind(t, TraceKind::SendRepair) ==
          count_kind(t, TraceKind::ArriveRepair) + count_kind(t, TraceKind::DropRepair));
    // Rate controller produced a trajectory.
    REQUIRE(t.rate_samples.size() >= 2);
    CHECK(t.rate_samples.front().first == 0.0);
    for (std::size_t i = 1; i < t.rate_samples.size(); ++i)
        CHECK(t.rate_samples[i - 1].first <= t.rate_samples[i].first);
}

TEST_CASE("lossless sliding run never recovers because nothing is lost", "[sim]") {
    ScenarioConfig c = scenario_video_proxy();
    c.duration_s = 3.0;
    c.plr = 0.0;
    c.channel_forward.model = BernoulliLoss{0.0};
    const SimulationTrace t = run_simulation(c);
    const RunMetrics m = compute_metrics(t);
    CHECK(m.eventual_ratio == 1.0);
    CHECK(m.deadline_ratio == 1.0);
    CHECK(m.recovered == 0);
    CHECK(count_kind(t, TraceKind::DecodeSource) == 0);
    CHECK(count_kind(t, TraceKind::DropSource) == 0);
}

TEST_CASE("sliding codec repairs a scripted single loss", "[sim]") {
    // rho = 0.5 alternates source, repair; forward transmission 0 is the
    // first source, transmission 1 the repair that rebuilds it.
    ScenarioConfig c = scripted_cbr({0}, 0.35, 40960.0, 512);
    c.reliability.kind = ReliabilityKind::Sliding;
    c.reliability.redundancy_ratio = 0.5;
    const SimulationTrace t = run_simulation(c);
    REQUIRE(!t.failure);

    const auto drops = rows_for_seq(t, TraceKind::DropSource, 0);
    REQUIRE(drops.size() == 1);
    const auto sends = rows_for_seq(t, TraceKind::SendSource, 0);
    REQUIRE(sends.size() == 1);
    CHECK(drops[0].at == sends[0].at);  // drops are logged at send time

    const auto decodes = rows_for_seq(t, TraceKind::DecodeSource, 0);
    REQUIRE(decodes.size() == 1);
    REQUIRE(decodes[0].decoded_delay.has_value());

    // Recovery delay equals repair send - source send (delays cancel).
    double first_repair_send = -1.0;
    for (const auto& e : t.events)
        if (e.kind == TraceKind::SendRepair) {
            first_repair_send = e.at;
            break;
        }
    REQUIRE(first_repair_send >= 0.0);
    CHECK(*decodes[0].decoded_delay ==
          Catch::Approx(first_repair_send - sends[0].at).margin(1e-9));
    CHECK(decodes[0].at == Catch::Approx(first_repair_send + 0.05).margin(1e-9));

    const RunMetrics m = compute_metrics(t);
    CHECK(m.eventual_ratio == 1.0);
    CHECK(m.recovered == 1);
    CHECK(m.rec_max_s == Catch::Approx(*decodes[0].decoded_delay).margin(1e-9));
    CHECK(m.rec_p50_s == Catch::Approx(*decodes[0].decoded_delay).margin(1e-9));
}

TEST_CASE("arq retransmits on a gap nack", "[sim]") {
    // 5 sources, no repairs: forward transmission k is source seq k.
    ScenarioConfig c = scripted_cbr({1}, 0.5, 80000.0, 1000);
    c.reliability.kind = ReliabilityKind::Arq;
    const SimulationTrace t = run_simulation(c);
    REQUIRE(!t.failure);

    const auto sends = rows_for_seq(t, TraceKind::SendSource, 1);
    REQUIRE(sends.size() == 2);  // original + one retransmission
    CHECK(sends[1].at > sends[0].at);

    const RunMetrics m = compute_metrics(t);
    CHECK(m.sources_sent == 5);
    CHECK(m.source_transmissions == 6);
    CHECK(m.eventual_ratio == 1.0);
    CHECK(m.recovered == 1);
    CHECK(m.overhead == Catch::Approx(1.0 / 6.0));
    // Lost-then-retransmitted delivery costs at least one extra RTT-ish trip.
    CHECK(m.rec_max_s > 0.05);
}

TEST_CASE("arq timeout covers a tail loss no ack can report", "[sim]") {
    ScenarioConfig c = scripted_cbr({4}, 0.5, 80000.0, 1000);
    c.reliability.kind = ReliabilityKind::Arq;
    const SimulationTrace t = run_simulation(c);
    REQUIRE(!t.failure);
    const auto sends = rows_for_seq(t, TraceKind::SendSource, 4);
    REQUIRE(sends.size() == 2);
    // Second transmission waits out the retransmit timeout (auto = 4 x RTT).
    CHECK(sends[1].at - sends[0].at >= 0.4 - 1e-9);
    CHECK(compute_metrics(t).eventual_ratio == 1.0);
}

TEST_CASE("block code recovers within-budget losses and fails beyond", "[sim]") {
    // (4, 6) code, 8 sources in 2 blocks.  Forward transmission order:
    // s0 s1 s2 s3 r r s4 s5 s6 s7 r r  (repairs flush behind each block).
    auto base = [](std::set<std::uint64_t> drops) {
        ScenarioConfig c = scripted_cbr(std::move(drops), 0.64, 100000.0, 1000);
        c.reliability.kind = ReliabilityKind::Block;
        c.reliability.block_k = 4;
        c.reliability.block_n = 6;
        return c;
    };

    SECTION("one source loss per block budget decodes") {
        const SimulationTrace t = run_simulation(base({1}));
        REQUIRE(!t.failure);
        CHECK(count_kind(t, TraceKind::SendRepair) == 4);
        const auto decodes = rows_for_seq(t, TraceKind::DecodeSource, 1);
        REQUIRE(decodes.size() == 1);
        const RunMetrics m = compute_metrics(t);
        CHECK(m.sources_sent == 8);
        CHECK(m.eventual_ratio == 1.0);
        CHECK(m.recovered == 1);
    }

    SECTION("three losses in one block exceed n - k = 2") {
        const SimulationTrace t = run_simulation(base({6, 7, 10}));
        REQUIRE(!t.failure);
        const RunMetrics m = compute_metrics(t, true);
        CHECK(m.sources_sent == 8);
        CHECK(m.delivered == 6);  // seqs 4 and 5 are gone for good
        CHECK(m.eventual_ratio == Catch::Approx(0.75));
        CHECK(rows_for_seq(t, TraceKind::DecodeSource, 4).empty());
        CHECK(rows_for_seq(t, TraceKind::DecodeSource, 5).empty());
    }
}

TEST_CASE("unprotected stream just loses packets", "[sim]") {
    ScenarioConfig c = scripted_cbr({2}, 0.5, 80000.0, 1000);
    c.reliability.kind = ReliabilityKind::None;
    const SimulationTrace t = run_simulation(c);
    const RunMetrics m = compute_metrics(t);
    CHECK(m.sources_sent == 5);
    CHECK(m.eventual_ratio == Catch::Approx(0.8));
    CHECK(m.overhead == 0.0);
    CHECK(count_kind(t, TraceKind::DecodeSource) == 0);
    CHECK(count_kind(t, TraceKind::SendAck) == 0);  // nothing to ack
    CHECK(count_kind(t, TraceKind::SendRepair) == 0);
}

TEST_CASE("vp mode sends on the fixed packet grid", "[sim]") {
    ScenarioConfig c;
    c.traffic.model = TrafficModel::Cbr;
    c.traffic.bitrate_bps = 40000.0;  // 5 kB/s into a ~14 kB/s grid
    c.traffic.packet_bytes = 400;
    c.traffic.max_payload = 512;
    c.channel_forward.model = BernoulliLoss{0.0};
    c.channel_reverse.model = BernoulliLoss{0.0};
    c.coupling = CouplingMode::Vp;
    c.rate.vp_packet_rate = 50.0;
    c.rate.padding = true;
    c.rate.initial_rate_Bps = 16000.0;
    c.rate.count_small_as_full = false;
    c.duration_s = 1.0;
    c.plr = 0.0;
    const SimulationTrace t = run_simulation(c);
    REQUIRE(!t.failure);

    std::size_t sends_in_window = 0;
    for (const auto& e : t.events) {
        const bool data_send = e.kind == TraceKind::SendSource ||
                               e.kind == TraceKind::SendPadding ||
                               e.kind == TraceKind::SendRepair;
        if (!data_send || e.at >= 1.0) continue;
        ++sends_in_window;
        const double k = e.at * 50.0;
        CHECK(std::abs(k - std::round(k)) < 1e-9);  // exactly on a slot
    }
    CHECK(sends_in_window == 50);  // every slot filled: source or padding
    CHECK(count_kind(t, TraceKind::SendPadding) > 0);
    CHECK(compute_metrics(t).eventual_ratio == 1.0);
}

TEST_CASE("vp mode flags starved slots instead of stalling", "[sim]") {
    ScenarioConfig c;
    c.traffic.model = TrafficModel::Cbr;
    c.traffic.bitrate_bps = 80000.0;
    c.traffic.packet_bytes = 400;
    c.traffic.max_payload = 512;
    c.channel_forward.model = BernoulliLoss{0.0};
    c.channel_reverse.model = BernoulliLoss{0.0};
    c.coupling = CouplingMode::Vp;
    c.rate.vp_packet_rate = 50.0;
    c.rate.initial_rate_Bps = 1000.0;  // 20 B/slot < header alone
    c.rate.count_small_as_full = false;
    c.duration_s = 0.3;
    c.plr = 0.0;
    const SimulationTrace t = run_simulation(c);
    CHECK(t.starved_slots > 0);
    // Slots still send at the clamp floor.
    CHECK(count_kind(t, TraceKind::SendSource) > 0);
}

TEST_CASE("sender queue overflow truncates the run", "[sim]") {
    ScenarioConfig c = scripted_cbr({}, 2.0, 1e6, 1000);
    c.channel_forward.model = BernoulliLoss{0.0};
    c.rate.initial_rate_Bps = 50000.0;
    c.max_queue_bytes = 10000;
    const SimulationTrace t = run_simulation(c);
    REQUIRE(t.failure.has_value());
    CHECK(t.failure->reason.find("queue") != std::string::npos);
    CHECK(t.failure->at < 2.0);
    CHECK_THROWS_AS(compute_metrics(t), MetricsError);
    const RunMetrics m = compute_metrics(t, true);
    CHECK(m.sources_sent >= 1);

    std::ostringstream csv;
    write_trace_csv(t, csv);
    CHECK(csv.str().find("# truncated at") != std::string::npos);
}

TEST_CASE("overloaded sliding window either overflows or loses", "[sim]") {
    // 50% loss against 12.5% redundancy cannot converge.
    ScenarioConfig c;
    c.traffic.model = TrafficModel::Cbr;
    c.traffic.bitrate_bps = 200000.0;
    c.traffic.packet_bytes = 500;
    c.traffic.max_payload = 500;
    c.channel_forward.model = BernoulliLoss{0.5};
    c.channel_forward.seed = 5;
    c.channel_reverse.model = BernoulliLoss{0.0};
    c.reliability.kind = ReliabilityKind::Sliding;
    c.reliability.redundancy_ratio = 0.125;
    c.reliability.max_window = 64;
    c.rate.initial_rate_Bps = 50000.0;
    c.rate.count_small_as_full = false;
    c.duration_s = 5.0;
    c.plr = 0.5;
    const SimulationTrace t = run_simulation(c);
    const RunMetrics m = compute_metrics(t, true);
    const bool overflowed =
        t.failure && t.failure->reason.find("window") != std::string::npos;
    CHECK((overflowed || m.eventual_ratio < 1.0));
}
