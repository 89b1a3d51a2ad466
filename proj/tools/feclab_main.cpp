// feclab -- command-line front end.
//
//   feclab run <config> [--out trace.csv] [--metrics metrics.csv]
//                       [--seed N] [--allow-partial] [key=value ...]
//   feclab sweep <config> --axis <name> --values a,b,c
//                         [--reps R] [--jobs J] [--out summary.csv]
//   feclab validate <config>
//
// Exit codes: 0 success, 2 configuration/usage error, 3 truncated run.

#include <CLI11.hpp>

#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "feclab/feclab.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitTruncated = 3;

feclab::ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw feclab::ConfigError("cannot open config file: " + path);
    return feclab::parse_scenario(in);
}

void apply_overrides(feclab::ScenarioConfig& config,
                     const std::vector<std::string>& overrides) {
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw feclab::ConfigError("override must look like key=value: '" + kv + "'");
        std::string key = kv.substr(0, eq);
        std::string value = kv.substr(eq + 1);
        // Allow spaces around '=' when the shell passed them through.
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        while (!value.empty() && (value.front() == ' ' || value.front() == '\t'))
            value.erase(value.begin());
        feclab::apply_override(config, key, value);
    }
    config.channel_forward.seed = config.seeds[0];
    config.channel_reverse.seed = config.seeds[1];
}

// Report validation results; returns false when the scenario is unusable.
bool check_scenario(const feclab::ScenarioConfig& config) {
    const auto report = feclab::validate(config);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& e : report.errors) std::cerr << "error: " << e << '\n';
    return report.ok();
}

void write_file_or_die(const std::string& path, const std::string& what,
                       const std::function<void(std::ostream&)>& writer) {
    std::ofstream out(path);
    if (!out) throw feclab::ConfigError("cannot open " + what + " output file: " + path);
    writer(out);
    if (!out) throw feclab::ConfigError("failed writing " + what + " to: " + path);
}

int cmd_run(const std::string& config_path, const std::string& out_path,
            const std::string& metrics_path, long long seed_offset,
            bool allow_partial, const std::vector<std::string>& overrides) {
    feclab::ScenarioConfig config = load_config(config_path);
    apply_overrides(config, overrides);
    if (seed_offset != 0) {
        config.seeds[0] += static_cast<std::uint64_t>(seed_offset);
        config.seeds[1] += static_cast<std::uint64_t>(seed_offset);
        config.seeds[2] += static_cast<std::uint64_t>(seed_offset);
        config.channel_forward.seed = config.seeds[0];
        config.channel_reverse.seed = config.seeds[1];
    }
    if (!check_scenario(config)) return kExitConfig;

    feclab::SimulationTrace trace = feclab::run_simulation(config);

    if (!out_path.empty())
        write_file_or_die(out_path, "trace",
                          [&](std::ostream& o) { feclab::write_trace_csv(trace, o); });

    if (trace.failure && !allow_partial) {
        std::cerr << "run truncated at " << trace.failure->at << " s: "
                  << trace.failure->reason << " (pass --allow-partial for partial metrics)"
                  << '\n';
        return kExitTruncated;
    }

    const feclab::RunMetrics m = feclab::compute_metrics(trace, allow_partial);
    if (!metrics_path.empty())
        write_file_or_die(metrics_path, "metrics",
                          [&](std::ostream& o) { feclab::write_metrics_csv(m, o); });

    if (trace.failure)
        std::cout << "# truncated at " << trace.failure->at << " s: "
                  << trace.failure->reason << '\n';
    std::cout << "sources_sent         = " << m.sources_sent << '\n'
              << "source_transmissions = " << m.source_transmissions << '\n'
              << "repairs_sent         = " << m.repairs_sent << '\n'
              << "padding_sent         = " << m.padding_sent << '\n'
              << "delivered            = " << m.delivered << '\n'
              << "recovered            = " << m.recovered << '\n'
              << "eventual_ratio       = " << m.eventual_ratio << '\n'
              << "deadline_ratio       = " << m.deadline_ratio << '\n'
              << "rec_p50_s            = " << m.rec_p50_s << '\n'
              << "rec_p95_s            = " << m.rec_p95_s << '\n'
              << "rec_p99_s            = " << m.rec_p99_s << '\n'
              << "rec_max_s            = " << m.rec_max_s << '\n'
              << "goodput_bps          = " << m.goodput_bps << '\n'
              << "max_queue_delay_s    = " << m.max_queue_delay_s << '\n'
              << "overhead             = " << m.overhead << '\n';
    return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::string& values_csv, unsigned reps, unsigned jobs,
              const std::string& out_path,
              const std::vector<std::string>& overrides) {
    feclab::ScenarioConfig config = load_config(config_path);
    apply_overrides(config, overrides);
    if (!check_scenario(config)) return kExitConfig;

    feclab::SweepSpec spec;
    spec.axis = axis;
    spec.reps = reps;
    spec.jobs = jobs;
    std::stringstream ss(values_csv);
    std::string token;
    while (std::getline(ss, token, ',')) {
        token = feclab::detail::trim(token);
        if (!token.empty()) spec.values.push_back(token);
    }

    // Surface per-point config problems (unknown axis, wrong channel model,
    // malformed value) before any simulation starts.
    for (const auto& v : spec.values) {
        feclab::ScenarioConfig probe = config;
        feclab::apply_axis(probe, spec.axis, v);
    }
    if (spec.values.empty()) {
        feclab::ScenarioConfig probe = config;
        // Still reject unknown axes even when there is nothing to run.
        try {
            feclab::apply_axis(probe, spec.axis, "0");
        } catch (const feclab::ConfigError& e) {
            const std::string what = e.what();
            if (what.find("unknown sweep axis") != std::string::npos) throw;
        }
    }

    const auto rows = feclab::run_sweep(config, spec);
    if (out_path.empty()) {
        feclab::write_sweep_csv(rows, std::cout);
    } else {
        write_file_or_die(out_path, "sweep summary",
                          [&](std::ostream& o) { feclab::write_sweep_csv(rows, o); });
    }
    for (const auto& row : rows)
        if (row.truncated)
            std::cerr << "note: point " << row.axis_value << " rep " << row.rep
                      << " truncated; its row holds partial metrics" << '\n';
    return kExitOk;
}

int cmd_validate(const std::string& config_path,
                 const std::vector<std::string>& overrides) {
    feclab::ScenarioConfig config = load_config(config_path);
    apply_overrides(config, overrides);
    if (!check_scenario(config)) return kExitConfig;
    std::cout << feclab::serialize_scenario(config);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"feclab: sliding-window erasure-coding protocol laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_path, metrics_path, axis, values_csv;
    long long seed_offset = 0;
    bool allow_partial = false;
    unsigned reps = 1, jobs = 1;
    std::vector<std::string> overrides;

    auto* run = app.add_subcommand("run", "Run one scenario; emit trace and metrics");
    run->add_option("config", config_path, "scenario config file")->required();
    run->add_option("--out", out_path, "write per-event trace CSV here");
    run->add_option("--metrics", metrics_path, "write one-row metrics CSV here");
    run->add_option("--seed", seed_offset, "offset applied to every configured seed");
    run->add_flag("--allow-partial", allow_partial,
                  "compute metrics even if the run was truncated");
    run->add_option("overrides", overrides, "config overrides as key=value");

    auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep; emit summary CSV");
    sweep->add_option("config", config_path, "scenario config file")->required();
    sweep->add_option("--axis", axis, "sweep axis: plr, one_way_delay, rho, coupling, "
                                      "reliability, i_frame_byte_share")->required();
    sweep->add_option("--values", values_csv, "comma-separated axis values")->required();
    sweep->add_option("--reps", reps, "repetitions per value (seeds offset by rep)");
    sweep->add_option("--jobs", jobs, "max concurrent simulations");
    sweep->add_option("--out", out_path, "summary CSV path (default: stdout)");
    sweep->add_option("overrides", overrides, "config overrides as key=value");

    auto* validate = app.add_subcommand("validate", "Check a config; print canonical form");
    validate->add_option("config", config_path, "scenario config file")->required();
    validate->add_option("overrides", overrides, "config overrides as key=value");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        // CLI11 returns 0 for --help; anything else is a usage error.
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run->parsed())
            return cmd_run(config_path, out_path, metrics_path, seed_offset,
                           allow_partial, overrides);
        if (sweep->parsed())
            return cmd_sweep(config_path, axis, values_csv, reps, jobs, out_path,
                             overrides);
        return cmd_validate(config_path, overrides);
    } catch (const feclab::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const feclab::MetricsError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitTruncated;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}
