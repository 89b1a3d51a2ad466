// scenario.hpp -- experiment configuration: types, file format, presets.
//
// A scenario file is flat `key = value` text, one scenario per file,
// '#' to end of line is comment.  Keys are dotted per section (e.g.
// `reliability.redundancy_ratio = 0.125`); the exact same keys work as
// CLI overrides, so every default is overridable from either place.
// Unknown keys and malformed values are hard errors -- a typo'd
// experiment must not run with defaults silently.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "feclab/channel.hpp"
#include "feclab/errors.hpp"

namespace feclab {

enum class CouplingMode : std::uint8_t {
    Inline,   // repairs share the TFRC-controlled budget with sources
    Outside,  // repairs ride outside the controlled rate
    Vp,       // fixed packet rate, rate changes move the payload size
};

enum class ReliabilityKind : std::uint8_t { None, Sliding, Block, Arq };

enum class TrafficModel : std::uint8_t { Vbr, Cbr, Trace };

struct TrafficConfig {
    TrafficModel model = TrafficModel::Vbr;
    double bitrate_bps = 1e6;
    double frame_rate = 30.0;
    std::uint32_t gop_size = 30;
    double i_frame_byte_share = 0.25;
    std::uint32_t max_payload = 1460;   // fragment payload bound, bytes
    std::uint32_t packet_bytes = 1460;  // cbr packet payload
    std::string trace_file;             // trace model input
};

struct ReliabilityConfig {
    ReliabilityKind kind = ReliabilityKind::None;
    double redundancy_ratio = 0.25;   // sliding
    std::uint32_t max_window = 2048;  // sliding
    std::uint32_t block_k = 4;        // block
    std::uint32_t block_n = 6;        // block
    double arq_suppression_s = 0.0;   // 0 = auto (one RTT)
    double arq_timeout_s = 0.0;       // 0 = auto (RTT + 3 * suppression)
};

struct RateConfig {
    double segment_bytes = 1500.0;
    bool count_small_as_full = true;     // debit a full segment per packet
    double header_overhead_bytes = 40.0; // modeled UDP/IP framing
    double initial_rate_Bps = 1000.0;
    double min_payload_bytes = 32.0;     // vp lower clamp
    double vp_packet_rate = 100.0;       // packets/s in vp mode
    bool padding = false;                // emit dummies when idle
    double feedback_interval_s = 0.0;    // 0 = auto (one RTT)
};

struct ScenarioConfig {
    TrafficConfig traffic;
    ChannelConfig channel_forward{BernoulliLoss{0.01}, 0.05, 1};
    ChannelConfig channel_reverse{BernoulliLoss{0.0}, 0.05, 2};
    ReliabilityConfig reliability;
    CouplingMode coupling = CouplingMode::Inline;
    RateConfig rate;
    double duration_s = 10.0;
    double deadline_s = 0.15;
    double plr = 0.01;  // provisioning reference loss rate
    std::array<std::uint64_t, 3> seeds{1, 2, 3};  // fwd, rev, reserved
    double drain_max_s = 10.0;
    std::uint64_t max_queue_bytes = 8u << 20;

    double rtt() const {
        return channel_forward.one_way_delay + channel_reverse.one_way_delay;
    }
    double feedback_interval() const {
        return rate.feedback_interval_s > 0.0 ? rate.feedback_interval_s : rtt();
    }
    double arq_suppression() const {
        return reliability.arq_suppression_s > 0.0 ? reliability.arq_suppression_s : rtt();
    }
    double arq_timeout() const {
        return reliability.arq_timeout_s > 0.0 ? reliability.arq_timeout_s
                                               : rtt() + 3.0 * arq_suppression();
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for " + key + ": '" + value + "'");
    }
    if (used != value.size())
        throw ConfigError("config: trailing junk in value for " + key + ": '" + value + "'");
    return v;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    if (!value.empty() && value[0] == '-')  // stoull would silently wrap
        throw ConfigError("config: bad integer value for " + key + ": '" + value + "'");
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
        v = std::stoull(value, &used);
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer value for " + key + ": '" + value + "'");
    }
    if (used != value.size())
        throw ConfigError("config: trailing junk in value for " + key + ": '" + value + "'");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config: bad boolean value for " + key + ": '" + value + "'");
}

inline void apply_channel_key(ChannelConfig& ch, const std::string& full_key,
                              const std::string& field, const std::string& value) {
    auto ensure_bernoulli = [&]() -> BernoulliLoss& {
        if (!std::holds_alternative<BernoulliLoss>(ch.model)) ch.model = BernoulliLoss{};
        return std::get<BernoulliLoss>(ch.model);
    };
    auto ensure_ge = [&]() -> GilbertElliottLoss& {
        if (!std::holds_alternative<GilbertElliottLoss>(ch.model))
            ch.model = GilbertElliottLoss{};
        return std::get<GilbertElliottLoss>(ch.model);
    };
    if (field == "model") {
        if (value == "bernoulli")
            ensure_bernoulli();
        else if (value == "gilbert_elliott")
            ensure_ge();
        else
            throw ConfigError("config: unknown channel model '" + value + "'");
    } else if (field == "loss_rate") {
        ensure_bernoulli().loss_rate = parse_double(full_key, value);
    } else if (field == "p_good_to_bad") {
        ensure_ge().p_good_to_bad = parse_double(full_key, value);
    } else if (field == "p_bad_to_good") {
        ensure_ge().p_bad_to_good = parse_double(full_key, value);
    } else if (field == "loss_good") {
        ensure_ge().loss_good = parse_double(full_key, value);
    } else if (field == "loss_bad") {
        ensure_ge().loss_bad = parse_double(full_key, value);
    } else if (field == "one_way_delay_s") {
        ch.one_way_delay = parse_double(full_key, value);
    } else {
        throw ConfigError("config: unknown key '" + full_key + "'");
    }
}

}  // namespace detail

inline const char* to_string(CouplingMode m) {
    switch (m) {
        case CouplingMode::Inline: return "inline";
        case CouplingMode::Outside: return "outside";
        case CouplingMode::Vp: return "vp";
    }
    return "?";
}

inline const char* to_string(ReliabilityKind k) {
    switch (k) {
        case ReliabilityKind::None: return "none";
        case ReliabilityKind::Sliding: return "sliding";
        case ReliabilityKind::Block: return "block";
        case ReliabilityKind::Arq: return "arq";
    }
    return "?";
}

inline const char* to_string(TrafficModel m) {
    switch (m) {
        case TrafficModel::Vbr: return "vbr";
        case TrafficModel::Cbr: return "cbr";
        case TrafficModel::Trace: return "trace";
    }
    return "?";
}

// Applies one `key = value` assignment.  Shared by the file parser and
// the CLI override path so the two can never drift.
inline void apply_override(ScenarioConfig& config, const std::string& key,
                           const std::string& value) {
    using detail::parse_bool;
    using detail::parse_double;
    using detail::parse_u64;

    const auto dot = key.find('.');
    const std::string section = dot == std::string::npos ? key : key.substr(0, dot);
    const std::string field = dot == std::string::npos ? "" : key.substr(dot + 1);

    if (section == "traffic") {
        auto& t = config.traffic;
        if (field == "model") {
            if (value == "vbr") t.model = TrafficModel::Vbr;
            else if (value == "cbr") t.model = TrafficModel::Cbr;
            else if (value == "trace") t.model = TrafficModel::Trace;
            else throw ConfigError("config: unknown traffic model '" + value + "'");
        } else if (field == "bitrate_bps") t.bitrate_bps = parse_double(key, value);
        else if (field == "frame_rate") t.frame_rate = parse_double(key, value);
        else if (field == "gop_size") t.gop_size = static_cast<std::uint32_t>(parse_u64(key, value));
        else if (field == "i_frame_byte_share") t.i_frame_byte_share = parse_double(key, value);
        else if (field == "max_payload") t.max_payload = static_cast<std::uint32_t>(parse_u64(key, value));
        else if (field == "packet_bytes") t.packet_bytes = static_cast<std::uint32_t>(parse_u64(key, value));
        else if (field == "trace_file") t.trace_file = value;
        else throw ConfigError("config: unknown key '" + key + "'");
    } else if (section == "channel_forward") {
        detail::apply_channel_key(config.channel_forward, key, field, value);
    } else if (section == "channel_reverse") {
        detail::apply_channel_key(config.channel_reverse, key, field, value);
    } else if (section == "reliability") {
        auto& r = config.reliability;
        if (field == "kind") {
            if (value == "none") r.kind = ReliabilityKind::None;
            else if (value == "sliding") r.kind = ReliabilityKind::Sliding;
            else if (value == "block") r.kind = ReliabilityKind::Block;
            else if (value == "arq") r.kind = ReliabilityKind::Arq;
            else throw ConfigError("config: unknown reliability kind '" + value + "'");
        } else if (field == "redundancy_ratio") r.redundancy_ratio = parse_double(key, value);
        else if (field == "max_window") r.max_window = static_cast<std::uint32_t>(parse_u64(key, value));
        else if (field == "block_k") r.block_k = static_cast<std::uint32_t>(parse_u64(key, value));
        else if (field == "block_n") r.block_n = static_cast<std::uint32_t>(parse_u64(key, value));
        else if (field == "arq_suppression_s") r.arq_suppression_s = parse_double(key, value);
        else if (field == "arq_timeout_s") r.arq_timeout_s = parse_double(key, value);
        else throw ConfigError("config: unknown key '" + key + "'");
    } else if (section == "coupling") {
        if (field == "mode") {
            if (value == "inline") config.coupling = CouplingMode::Inline;
            else if (value == "outside") config.coupling = CouplingMode::Outside;
            else if (value == "vp") config.coupling = CouplingMode::Vp;
            else throw ConfigError("config: unknown coupling mode '" + value + "'");
        } else {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    } else if (section == "rate") {
        auto& r = config.rate;
        if (field == "segment_bytes") r.segment_bytes = parse_double(key, value);
        else if (field == "count_small_as_full") r.count_small_as_full = parse_bool(key, value);
        else if (field == "header_overhead_bytes") r.header_overhead_bytes = parse_double(key, value);
        else if (field == "initial_rate_Bps") r.initial_rate_Bps = parse_double(key, value);
        else if (field == "min_payload_bytes") r.min_payload_bytes = parse_double(key, value);
        else if (field == "vp_packet_rate") r.vp_packet_rate = parse_double(key, value);
        else if (field == "padding") r.padding = parse_bool(key, value);
        else if (field == "feedback_interval_s") r.feedback_interval_s = parse_double(key, value);
        else throw ConfigError("config: unknown key '" + key + "'");
    } else if (section == "seeds") {
        if (field == "forward") config.seeds[0] = parse_u64(key, value);
        else if (field == "reverse") config.seeds[1] = parse_u64(key, value);
        else if (field == "reserved") config.seeds[2] = parse_u64(key, value);
        else throw ConfigError("config: unknown key '" + key + "'");
    } else if (key == "duration_s") {
        config.duration_s = parse_double(key, value);
    } else if (key == "deadline_s") {
        config.deadline_s = parse_double(key, value);
    } else if (key == "plr") {
        config.plr = parse_double(key, value);
    } else if (key == "drain_max_s") {
        config.drain_max_s = parse_double(key, value);
    } else if (key == "max_queue_bytes") {
        config.max_queue_bytes = parse_u64(key, value);
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

inline ScenarioConfig parse_scenario(std::istream& in) {
    ScenarioConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = detail::trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(line_no) +
                              " is not 'key = value'");
        const std::string key = detail::trim(stripped.substr(0, eq));
        const std::string value = detail::trim(stripped.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config: line " + std::to_string(line_no) +
                              " has empty key or value");
        apply_override(config, key, value);
    }
    // Channel RNGs follow the seeds block.
    config.channel_forward.seed = config.seeds[0];
    config.channel_reverse.seed = config.seeds[1];
    return config;
}

inline ScenarioConfig parse_scenario_text(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in);
}

struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

inline ValidationReport validate(const ScenarioConfig& c) {
    ValidationReport report;
    auto err = [&](const std::string& m) { report.errors.push_back(m); };
    auto warn = [&](const std::string& m) { report.warnings.push_back(m); };

    if (c.duration_s <= 0.0) err("duration_s must be positive");
    if (c.deadline_s <= 0.0) err("deadline_s must be positive");
    if (c.plr < 0.0 || c.plr >= 1.0) err("plr must be in [0, 1)");
    if (c.drain_max_s < 0.0) err("drain_max_s must be >= 0");

    if (c.traffic.bitrate_bps <= 0.0) err("traffic.bitrate_bps must be positive");
    if (c.traffic.frame_rate <= 0.0) err("traffic.frame_rate must be positive");
    if (c.traffic.max_payload == 0) err("traffic.max_payload must be positive");
    if (c.traffic.model == TrafficModel::Vbr) {
        if (c.traffic.gop_size == 0) err("traffic.gop_size must be positive");
        if (c.traffic.i_frame_byte_share <= 0.0 || c.traffic.i_frame_byte_share > 1.0)
            err("traffic.i_frame_byte_share must be in (0, 1]");
        if (c.traffic.gop_size == 1 && c.traffic.i_frame_byte_share != 1.0)
            err("traffic.gop_size 1 requires i_frame_byte_share = 1");
    }
    if (c.traffic.model == TrafficModel::Cbr && c.traffic.packet_bytes == 0)
        err("traffic.packet_bytes must be positive");
    if (c.traffic.model == TrafficModel::Trace && c.traffic.trace_file.empty())
        err("traffic.trace_file required for trace traffic");

    if (c.rate.segment_bytes <= 0.0) err("rate.segment_bytes must be positive");
    if (c.rate.header_overhead_bytes < 0.0) err("rate.header_overhead_bytes must be >= 0");
    if (c.rate.initial_rate_Bps <= 0.0) err("rate.initial_rate_Bps must be positive");
    if (c.traffic.max_payload + c.rate.header_overhead_bytes > c.rate.segment_bytes)
        err("traffic.max_payload + rate.header_overhead_bytes must fit in rate.segment_bytes");
    if (c.coupling == CouplingMode::Vp) {
        if (c.rate.vp_packet_rate <= 0.0) err("rate.vp_packet_rate must be positive");
        if (c.rate.min_payload_bytes <= 0.0) err("rate.min_payload_bytes must be positive");
        if (c.rate.min_payload_bytes > c.traffic.max_payload)
            err("rate.min_payload_bytes must be <= traffic.max_payload");
    }

    const auto& r = c.reliability;
    if (r.kind == ReliabilityKind::Sliding) {
        if (r.redundancy_ratio < 0.0 || r.redundancy_ratio >= 1.0)
            err("reliability.redundancy_ratio must be in [0, 1)");
        if (r.redundancy_ratio > 0.5)
            warn("reliability.redundancy_ratio above 0.5 emits repairs back-to-back");
        if (r.max_window == 0) err("reliability.max_window must be positive");
        if (r.redundancy_ratio <= c.plr)
            warn("redundancy_ratio <= plr: losses will outrun repairs");
    }
    if (r.kind == ReliabilityKind::Block) {
        if (r.block_k == 0 || r.block_k >= r.block_n || r.block_n > 255)
            err("reliability block code needs 0 < block_k < block_n <= 255");
    }
    if (r.kind == ReliabilityKind::Arq) {
        if (r.arq_suppression_s < 0.0) err("reliability.arq_suppression_s must be >= 0");
        if (r.arq_timeout_s < 0.0) err("reliability.arq_timeout_s must be >= 0");
    }

    for (const auto* ch : {&c.channel_forward, &c.channel_reverse}) {
        if (ch->one_way_delay < 0.0) err("channel one_way_delay_s must be >= 0");
        if (const auto* b = std::get_if<BernoulliLoss>(&ch->model)) {
            if (b->loss_rate < 0.0 || b->loss_rate > 1.0)
                err("channel loss_rate must be in [0, 1]");
        } else if (const auto* g = std::get_if<GilbertElliottLoss>(&ch->model)) {
            for (double v : {g->p_good_to_bad, g->p_bad_to_good, g->loss_good, g->loss_bad})
                if (v < 0.0 || v > 1.0) err("gilbert-elliott probabilities must be in [0, 1]");
        }
    }
    if (const auto* b = std::get_if<BernoulliLoss>(&c.channel_forward.model)) {
        if (std::abs(b->loss_rate - c.plr) > 1e-9)
            warn("plr differs from channel_forward.loss_rate; plr is only the provisioning reference");
    }
    if (c.rtt() <= 0.0 && c.rate.feedback_interval_s <= 0.0)
        err("zero RTT needs an explicit rate.feedback_interval_s");
    return report;
}

// Canonical text form; parse(serialize(c)) == c for exposed settings.
inline std::string serialize_scenario(const ScenarioConfig& c) {
    std::ostringstream out;
    out.precision(17);
    auto channel = [&](const char* name, const ChannelConfig& ch) {
        if (const auto* b = std::get_if<BernoulliLoss>(&ch.model)) {
            out << name << ".model = bernoulli\n";
            out << name << ".loss_rate = " << b->loss_rate << "\n";
        } else if (const auto* g = std::get_if<GilbertElliottLoss>(&ch.model)) {
            out << name << ".model = gilbert_elliott\n";
            out << name << ".p_good_to_bad = " << g->p_good_to_bad << "\n";
            out << name << ".p_bad_to_good = " << g->p_bad_to_good << "\n";
            out << name << ".loss_good = " << g->loss_good << "\n";
            out << name << ".loss_bad = " << g->loss_bad << "\n";
        }
        out << name << ".one_way_delay_s = " << ch.one_way_delay << "\n";
    };

    out << "traffic.model = " << to_string(c.traffic.model) << "\n";
    out << "traffic.bitrate_bps = " << c.traffic.bitrate_bps << "\n";
    out << "traffic.frame_rate = " << c.traffic.frame_rate << "\n";
    out << "traffic.gop_size = " << c.traffic.gop_size << "\n";
    out << "traffic.i_frame_byte_share = " << c.traffic.i_frame_byte_share << "\n";
    out << "traffic.max_payload = " << c.traffic.max_payload << "\n";
    out << "traffic.packet_bytes = " << c.traffic.packet_bytes << "\n";
    if (!c.traffic.trace_file.empty())
        out << "traffic.trace_file = " << c.traffic.trace_file << "\n";
    channel("channel_forward", c.channel_forward);
    channel("channel_reverse", c.channel_reverse);
    out << "reliability.kind = " << to_string(c.reliability.kind) << "\n";
    out << "reliability.redundancy_ratio = " << c.reliability.redundancy_ratio << "\n";
    out << "reliability.max_window = " << c.reliability.max_window << "\n";
    out << "reliability.block_k = " << c.reliability.block_k << "\n";
    out << "reliability.block_n = " << c.reliability.block_n << "\n";
    out << "reliability.arq_suppression_s = " << c.reliability.arq_suppression_s << "\n";
    out << "reliability.arq_timeout_s = " << c.reliability.arq_timeout_s << "\n";
    out << "coupling.mode = " << to_string(c.coupling) << "\n";
    out << "rate.segment_bytes = " << c.rate.segment_bytes << "\n";
    out << "rate.count_small_as_full = " << (c.rate.count_small_as_full ? "true" : "false") << "\n";
    out << "rate.header_overhead_bytes = " << c.rate.header_overhead_bytes << "\n";
    out << "rate.initial_rate_Bps = " << c.rate.initial_rate_Bps << "\n";
    out << "rate.min_payload_bytes = " << c.rate.min_payload_bytes << "\n";
    out << "rate.vp_packet_rate = " << c.rate.vp_packet_rate << "\n";
    out << "rate.padding = " << (c.rate.padding ? "true" : "false") << "\n";
    out << "rate.feedback_interval_s = " << c.rate.feedback_interval_s << "\n";
    out << "duration_s = " << c.duration_s << "\n";
    out << "deadline_s = " << c.deadline_s << "\n";
    out << "plr = " << c.plr << "\n";
    out << "seeds.forward = " << c.seeds[0] << "\n";
    out << "seeds.reverse = " << c.seeds[1] << "\n";
    out << "seeds.reserved = " << c.seeds[2] << "\n";
    out << "drain_max_s = " << c.drain_max_s << "\n";
    out << "max_queue_bytes = " << c.max_queue_bytes << "\n";
    return out.str();
}

// Bundled video-over-UDP proxy scenario: a 441.37 kb/s GoP-structured
// stream protected by the sliding codec at 1/8 redundancy over a 1% loss
// link, 50 ms each way, 150 ms delivery deadline.
inline ScenarioConfig scenario_video_proxy() {
    ScenarioConfig c;
    c.traffic.model = TrafficModel::Vbr;
    c.traffic.bitrate_bps = 441370.0;
    c.traffic.frame_rate = 30.0;
    c.traffic.gop_size = 30;
    c.traffic.i_frame_byte_share = 0.25;
    c.traffic.max_payload = 512;
    c.channel_forward = ChannelConfig{BernoulliLoss{0.01}, 0.05, 101};
    c.channel_reverse = ChannelConfig{BernoulliLoss{0.0}, 0.05, 202};
    c.reliability.kind = ReliabilityKind::Sliding;
    c.reliability.redundancy_ratio = 0.125;
    c.reliability.max_window = 2048;
    c.coupling = CouplingMode::Inline;
    c.rate.segment_bytes = 1500.0;
    c.rate.count_small_as_full = false;  // byte-accurate accounting for small packets
    c.rate.header_overhead_bytes = 40.0;
    c.rate.initial_rate_Bps = 16000.0;
    c.duration_s = 10.0;
    c.deadline_s = 0.15;
    c.plr = 0.01;
    c.seeds = {101, 202, 303};
    return c;
}

// Same network and deadline, no protection, source rate raised to match
// the protected stream's total rate (equal network load).
inline ScenarioConfig scenario_video_proxy_unprotected() {
    ScenarioConfig c = scenario_video_proxy();
    c.traffic.bitrate_bps = 531130.0;
    c.reliability.kind = ReliabilityKind::None;
    return c;
}

}  // namespace feclab
