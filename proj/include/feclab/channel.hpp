// channel.hpp -- lossy fixed-delay channels for the simulator.
//
// A channel decides per transmission whether the packet survives and when
// it arrives (now + one_way_delay; delivery is FIFO, no reordering).  Loss
// models: independent (bernoulli), two-state bursty (gilbert_elliott:
// state transition first, then drop with the state's loss probability),
// and a scripted drop list by transmission index for deterministic tests.
// Uniform draws come from a dedicated mt19937_64 so the forward and
// reverse channels consume independent, reproducible streams; every
// decision consumes a fixed number of draws (bernoulli 1, GE 2) so loss
// patterns stay aligned across configurations that share a seed.

#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <variant>

#include "feclab/errors.hpp"

namespace feclab {

struct BernoulliLoss {
    double loss_rate = 0.0;
};

struct GilbertElliottLoss {
    double p_good_to_bad = 0.01;
    double p_bad_to_good = 0.5;
    double loss_good = 0.0;
    double loss_bad = 1.0;
};

// Testing aid: drop exactly the listed transmission indices (0-based).
struct ScriptedLoss {
    std::set<std::uint64_t> drop_indices;
};

using LossModel = std::variant<BernoulliLoss, GilbertElliottLoss, ScriptedLoss>;

struct ChannelConfig {
    LossModel model = BernoulliLoss{};
    double one_way_delay = 0.05;
    std::uint64_t seed = 1;
};

class Channel {
public:
    struct Outcome {
        bool delivered = false;
        double arrive_at = 0.0;
    };

    explicit Channel(const ChannelConfig& config) : config_(config), rng_(config.seed) {
        if (config.one_way_delay < 0.0)
            throw ConfigError("channel: one_way_delay must be >= 0");
        if (const auto* b = std::get_if<BernoulliLoss>(&config.model)) {
            if (b->loss_rate < 0.0 || b->loss_rate > 1.0)
                throw ConfigError("channel: loss_rate must be in [0, 1]");
        } else if (const auto* g = std::get_if<GilbertElliottLoss>(&config.model)) {
            for (double v : {g->p_good_to_bad, g->p_bad_to_good, g->loss_good, g->loss_bad})
                if (v < 0.0 || v > 1.0)
                    throw ConfigError("channel: gilbert-elliott probabilities must be in [0, 1]");
        }
    }

    Outcome transmit(double now) {
        const std::uint64_t index = transmissions_++;
        bool dropped = false;
        if (const auto* b = std::get_if<BernoulliLoss>(&config_.model)) {
            dropped = draw() < b->loss_rate;
        } else if (const auto* g = std::get_if<GilbertElliottLoss>(&config_.model)) {
            const double u_state = draw();
            if (bad_state_ ? (u_state < g->p_bad_to_good) : (u_state < g->p_good_to_bad))
                bad_state_ = !bad_state_;
            dropped = draw() < (bad_state_ ? g->loss_bad : g->loss_good);
        } else {
            const auto& s = std::get<ScriptedLoss>(config_.model);
            dropped = s.drop_indices.count(index) != 0;
        }
        if (dropped) ++drops_;
        return Outcome{!dropped, now + config_.one_way_delay};
    }

    double one_way_delay() const { return config_.one_way_delay; }
    std::uint64_t transmissions() const { return transmissions_; }
    std::uint64_t drops() const { return drops_; }
    bool in_bad_state() const { return bad_state_; }

private:
    // Uniform [0,1) from the top 53 bits; identical across platforms,
    // unlike std::uniform_real_distribution.
    double draw() {
        return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    }

    ChannelConfig config_;
    std::mt19937_64 rng_;
    bool bad_state_ = false;
    std::uint64_t transmissions_ = 0;
    std::uint64_t drops_ = 0;
};

// Stationary loss probability of the two-state model (good-state losses
// included), useful for provisioning checks.
inline double gilbert_elliott_stationary_loss(const GilbertElliottLoss& g) {
    const double denom = g.p_good_to_bad + g.p_bad_to_good;
    if (denom <= 0.0) throw ConfigError("channel: degenerate gilbert-elliott chain");
    const double pi_bad = g.p_good_to_bad / denom;
    return pi_bad * g.loss_bad + (1.0 - pi_bad) * g.loss_good;
}

}  // namespace feclab
