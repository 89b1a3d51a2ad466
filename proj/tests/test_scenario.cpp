// Scenario config: strict key=value parsing, serialize/parse round trip,
// bundled presets vs the shipped config files, validation, derived timers.

#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <string>

#include "feclab/errors.hpp"
#include "feclab/scenario.hpp"

using namespace feclab;

#ifndef FECLAB_SOURCE_DIR
#error "FECLAB_SOURCE_DIR must point at the repository root"
#endif

TEST_CASE("shipped video_proxy.cfg equals the bundled preset", "[scenario]") {
    std::ifstream in(std::string(FECLAB_SOURCE_DIR) + "/configs/video_proxy.cfg");
    REQUIRE(in.good());
    const auto parsed = parse_scenario(in);
    CHECK(serialize_scenario(parsed) == serialize_scenario(scenario_video_proxy()));
    CHECK(parsed.channel_forward.seed == 101);  // channel RNG follows seeds block
    CHECK(parsed.channel_reverse.seed == 202);
}

TEST_CASE("unprotected preset differs only in rate and protection", "[scenario]") {
    const auto base = scenario_video_proxy();
    const auto unprot = scenario_video_proxy_unprotected();
    CHECK(unprot.reliability.kind == ReliabilityKind::None);
    CHECK(unprot.traffic.bitrate_bps == Catch::Approx(531130.0));
    ScenarioConfig patched = base;
    patched.traffic.bitrate_bps = unprot.traffic.bitrate_bps;
    patched.reliability.kind = ReliabilityKind::None;
    CHECK(serialize_scenario(patched) == serialize_scenario(unprot));
}

TEST_CASE("serialize -> parse -> serialize is a fixpoint", "[scenario]") {
    ScenarioConfig c;
    c.traffic.model = TrafficModel::Cbr;
    c.traffic.bitrate_bps = 123456.789;
    c.channel_forward.model = GilbertElliottLoss{0.013, 0.41, 0.001, 0.93};
    c.channel_forward.one_way_delay = 0.0125;
    c.reliability.kind = ReliabilityKind::Arq;
    c.reliability.arq_timeout_s = 0.31;
    c.coupling = CouplingMode::Vp;
    c.rate.vp_packet_rate = 48.5;
    c.rate.padding = true;
    c.seeds = {11, 22, 33};
    c.max_queue_bytes = 1234567;
    const std::string once = serialize_scenario(c);
    const std::string twice = serialize_scenario(parse_scenario_text(once));
    CHECK(once == twice);
}

TEST_CASE("unknown keys and malformed lines are hard errors", "[scenario]") {
    std::ifstream bad(std::string(FECLAB_SOURCE_DIR) + "/tests/data/bad.cfg");
    REQUIRE(bad.good());
    CHECK_THROWS_AS(parse_scenario(bad), ConfigError);

    CHECK_THROWS_AS(parse_scenario_text("hello world\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario_text("plr =\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario_text("= 0.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario_text("plr = 0.01x\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario_text("nonsense.key = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario_text("traffic.model = h264\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario_text("reliability.kind = hope\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario_text("coupling.mode = sideways\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario_text("rate.padding = maybe\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario_text("channel_forward.model = awgn\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario_text("seeds.forward = -3\n"), ConfigError);
    CHECK_NOTHROW(parse_scenario_text("# only a comment\n\n"));
}

TEST_CASE("comments and whitespace are tolerated", "[scenario]") {
    const auto c = parse_scenario_text(
        "  plr = 0.02   # trailing comment\n"
        "\n"
        "duration_s=3.5\n"
        "seeds.forward = 77\n");
    CHECK(c.plr == Catch::Approx(0.02));
    CHECK(c.duration_s == Catch::Approx(3.5));
    CHECK(c.seeds[0] == 77);
    CHECK(c.channel_forward.seed == 77);  // synced after parse
}

TEST_CASE("channel model keys switch the variant", "[scenario]") {
    ScenarioConfig c;
    apply_override(c, "channel_forward.model", "gilbert_elliott");
    apply_override(c, "channel_forward.p_good_to_bad", "0.02");
    apply_override(c, "channel_forward.p_bad_to_good", "0.4");
    apply_override(c, "channel_forward.loss_bad", "0.95");
    const auto* g = std::get_if<GilbertElliottLoss>(&c.channel_forward.model);
    REQUIRE(g != nullptr);
    CHECK(g->p_good_to_bad == Catch::Approx(0.02));
    CHECK(g->p_bad_to_good == Catch::Approx(0.4));
    CHECK(g->loss_bad == Catch::Approx(0.95));
    // Setting a bernoulli field replaces the model again.
    apply_override(c, "channel_forward.loss_rate", "0.07");
    const auto* b = std::get_if<BernoulliLoss>(&c.channel_forward.model);
    REQUIRE(b != nullptr);
    CHECK(b->loss_rate == Catch::Approx(0.07));
}

TEST_CASE("derived timers: rtt, feedback interval, arq auto-tuning", "[scenario]") {
    ScenarioConfig c;
    c.channel_forward.one_way_delay = 0.05;
    c.channel_reverse.one_way_delay = 0.03;
    CHECK(c.rtt() == Catch::Approx(0.08));
    CHECK(c.feedback_interval() == Catch::Approx(0.08));  // auto = one RTT
    c.rate.feedback_interval_s = 0.25;
    CHECK(c.feedback_interval() == Catch::Approx(0.25));

    CHECK(c.arq_suppression() == Catch::Approx(0.08));          // auto = RTT
    CHECK(c.arq_timeout() == Catch::Approx(0.08 + 3 * 0.08));   // auto
    c.reliability.arq_suppression_s = 0.1;
    c.reliability.arq_timeout_s = 0.5;
    CHECK(c.arq_suppression() == Catch::Approx(0.1));
    CHECK(c.arq_timeout() == Catch::Approx(0.5));
}

TEST_CASE("validation flags broken scenarios", "[scenario]") {
    CHECK(validate(scenario_video_proxy()).ok());
    CHECK(validate(scenario_video_proxy_unprotected()).ok());

    ScenarioConfig c = scenario_video_proxy();
    c.duration_s = 0.0;
    c.reliability.block_k = 9;
    c.reliability.block_n = 4;  // ignored: kind is sliding
    auto rep = validate(c);
    CHECK_FALSE(rep.ok());
    CHECK(rep.errors.size() == 1);

    c = scenario_video_proxy();
    c.reliability.kind = ReliabilityKind::Block;
    c.reliability.block_k = 9;
    c.reliability.block_n = 4;
    CHECK_FALSE(validate(c).ok());

    c = scenario_video_proxy();
    c.traffic.max_payload = 1461;  // 1461 + 40 header > 1500 segment
    CHECK_FALSE(validate(c).ok());

    c = scenario_video_proxy();
    c.coupling = CouplingMode::Vp;
    c.rate.min_payload_bytes = 1024;  // > max_payload 512
    CHECK_FALSE(validate(c).ok());

    c = scenario_video_proxy();
    c.channel_forward.one_way_delay = 0.0;
    c.channel_reverse.one_way_delay = 0.0;
    CHECK_FALSE(validate(c).ok());  // zero RTT, no explicit feedback interval
    c.rate.feedback_interval_s = 0.05;
    CHECK(validate(c).ok());
}

TEST_CASE("validation warns on under-provisioned redundancy", "[scenario]") {
    ScenarioConfig c = scenario_video_proxy();
    c.plr = 0.2;
    c.channel_forward.model = BernoulliLoss{0.2};
    const auto rep = validate(c);
    CHECK(rep.ok());
    REQUIRE(!rep.warnings.empty());
    bool found = false;
    for (const auto& w : rep.warnings)
        if (w.find("outrun") != std::string::npos) found = true;
    CHECK(found);

    c = scenario_video_proxy();
    c.channel_forward.model = BernoulliLoss{0.05};  // differs from plr 0.01
    const auto rep2 = validate(c);
    CHECK(rep2.ok());
    CHECK(!rep2.warnings.empty());
}
