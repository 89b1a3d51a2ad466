// sweep.hpp -- parameter sweeps over a base scenario.
//
// A sweep takes one axis (plr, one_way_delay, rho, coupling, reliability,
// i_frame_byte_share), a list of values, and a repetition count.  Each
// (value, rep) point runs an independent simulation: the axis value is
// applied to a copy of the base scenario and every seed is offset by the
// rep index.  Points run concurrently up to a jobs bound; the summary CSV
// is assembled in (value, rep) order regardless of completion order.
//
// Truncated runs still produce a summary row (metrics computed with
// allow_partial), so a sweep across a failure boundary shows the partial
// numbers instead of aborting the whole sweep.

#pragma once

#include <cstdint>
#include <future>
#include <ostream>
#include <string>
#include <vector>

#include "feclab/errors.hpp"
#include "feclab/metrics.hpp"
#include "feclab/scenario.hpp"
#include "feclab/sim.hpp"
#include "feclab/trace.hpp"

namespace feclab {

struct SweepSpec {
    std::string axis;
    std::vector<std::string> values;  // raw tokens; parsed per-axis
    unsigned reps = 1;
    unsigned jobs = 1;
};

// Applies one axis value to a scenario copy.  Numeric axes parse the token
// as a double; categorical axes accept the same spellings as the config
// file.  Returns the canonical token echoed into the axis_value column.
inline std::string apply_axis(ScenarioConfig& config, const std::string& axis,
                              const std::string& token) {
    if (axis == "plr") {
        const double v = detail::parse_double("sweep axis plr", token);
        if (!std::holds_alternative<BernoulliLoss>(config.channel_forward.model))
            throw ConfigError("sweep axis plr requires a bernoulli forward channel");
        config.plr = v;
        std::get<BernoulliLoss>(config.channel_forward.model).loss_rate = v;
        return detail::format_csv_double(v);
    }
    if (axis == "one_way_delay") {
        const double v = detail::parse_double("sweep axis one_way_delay", token);
        config.channel_forward.one_way_delay = v;
        config.channel_reverse.one_way_delay = v;
        return detail::format_csv_double(v);
    }
    if (axis == "rho") {
        const double v = detail::parse_double("sweep axis rho", token);
        if (config.reliability.kind != ReliabilityKind::Sliding)
            throw ConfigError("sweep axis rho requires reliability.kind = sliding");
        config.reliability.redundancy_ratio = v;
        return detail::format_csv_double(v);
    }
    if (axis == "coupling") {
        apply_override(config, "coupling.mode", token);
        return to_string(config.coupling);
    }
    if (axis == "reliability") {
        apply_override(config, "reliability.kind", token);
        return to_string(config.reliability.kind);
    }
    if (axis == "i_frame_byte_share") {
        const double v = detail::parse_double("sweep axis i_frame_byte_share", token);
        if (config.traffic.model != TrafficModel::Vbr)
            throw ConfigError("sweep axis i_frame_byte_share requires traffic.model = vbr");
        config.traffic.i_frame_byte_share = v;
        return detail::format_csv_double(v);
    }
    throw ConfigError("unknown sweep axis: " + axis +
                      " (expected plr, one_way_delay, rho, coupling, reliability,"
                      " or i_frame_byte_share)");
}

inline ScenarioConfig scenario_for_point(const ScenarioConfig& base,
                                         const std::string& axis,
                                         const std::string& token, unsigned rep,
                                         std::string* canonical = nullptr) {
    ScenarioConfig config = base;
    std::string canon = apply_axis(config, axis, token);
    config.seeds[0] = base.seeds[0] + rep;
    config.seeds[1] = base.seeds[1] + rep;
    config.seeds[2] = base.seeds[2] + rep;
    config.channel_forward.seed = config.seeds[0];
    config.channel_reverse.seed = config.seeds[1];
    if (canonical) *canonical = std::move(canon);
    return config;
}

struct SweepRow {
    std::string axis_value;
    unsigned rep = 0;
    RunMetrics metrics;
    bool truncated = false;
};

inline std::vector<SweepRow> run_sweep(const ScenarioConfig& base,
                                       const SweepSpec& spec) {
    if (spec.reps == 0) throw ConfigError("sweep: reps must be >= 1");
    const unsigned jobs = spec.jobs == 0 ? 1 : spec.jobs;

    struct Point {
        ScenarioConfig config;
        std::string axis_value;
        unsigned rep;
    };
    std::vector<Point> points;
    points.reserve(spec.values.size() * spec.reps);
    for (const auto& token : spec.values) {
        for (unsigned rep = 0; rep < spec.reps; ++rep) {
            std::string canon;
            ScenarioConfig config =
                scenario_for_point(base, spec.axis, token, rep, &canon);
            points.push_back(Point{std::move(config), std::move(canon), rep});
        }
    }

    std::vector<SweepRow> rows(points.size());
    // Wave-parallel: launch up to `jobs` simulations, collect them in index
    // order, repeat.  Collection order fixes row order irrespective of
    // which simulation finishes first.
    for (std::size_t base_idx = 0; base_idx < points.size(); base_idx += jobs) {
        const std::size_t end = std::min(points.size(),
                                         base_idx + static_cast<std::size_t>(jobs));
        std::vector<std::future<SweepRow>> wave;
        wave.reserve(end - base_idx);
        for (std::size_t i = base_idx; i < end; ++i) {
            wave.push_back(std::async(std::launch::async, [&points, i]() {
                const Point& pt = points[i];
                SimulationTrace trace = run_simulation(pt.config);
                SweepRow row;
                row.axis_value = pt.axis_value;
                row.rep = pt.rep;
                row.truncated = trace.failure.has_value();
                row.metrics = compute_metrics(trace, /*allow_partial=*/true);
                return row;
            }));
        }
        for (std::size_t i = base_idx; i < end; ++i)
            rows[i] = wave[i - base_idx].get();
    }
    return rows;
}

inline const char* sweep_csv_header() {
    return "axis_value,rep,eventual_ratio,deadline_ratio,rec_p50_s,rec_p95_s,"
           "rec_p99_s,rec_max_s,goodput_bps,max_queue_delay_s,overhead";
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
    out << sweep_csv_header() << '\n';
    for (const auto& row : rows) {
        out << row.axis_value << ',' << row.rep << ',' << metrics_csv_row(row.metrics)
            << '\n';
    }
}

}  // namespace feclab
