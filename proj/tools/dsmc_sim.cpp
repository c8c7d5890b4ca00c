// dsmc_sim: run one scenario (or its compensation A/B pair) from an INI
// description and drop the trace and metrics next to each other.
//
//   dsmc_sim run path/to/scenario.ini --out results
//   dsmc_sim ab  path/to/scenario.ini --out results --format both
//
// Exit codes: 0 ok, 1 configuration problem, 2 numeric failure,
// 3 invariant violation under --strict-invariants.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dsmc/dsmc.hpp"

namespace fs = std::filesystem;
using namespace dsmc;
using namespace dsmc::sim;

namespace {

struct Options {
    std::string scenario_path;
    std::string out_dir = ".";
    std::string format  = "csv";
    bool        strict  = false;
    std::optional<double> skip_settle;
};

void print_summary(const ScenarioResult& r) {
    std::printf("scenario     %s\n", r.name.c_str());
    std::printf("steps        %zu (T = %s s, settle skip = %s s)\n", r.trace.rows.size(),
                format_double(r.sample_period_s).c_str(), format_double(r.settle_skip_s).c_str());
    for (const auto& w : r.warnings)
        std::printf("warning      %s\n", w.c_str());
    if (r.estimate_clamp_events || r.plant_clamp_events)
        std::printf("clamps       estimate %ld, plant %ld\n", r.estimate_clamp_events,
                    r.plant_clamp_events);
    if (r.monitor_violations)
        std::printf("monitor      %ld violation(s), worst residual %s\n", r.monitor_violations,
                    format_double(r.max_monitor_residual).c_str());
    else if (r.max_monitor_residual > 0.0)
        std::printf("monitor      clean, worst residual %s\n",
                    format_double(r.max_monitor_residual).c_str());
    for (const auto& [name, value] : r.final_estimates)
        std::printf("estimate     %-6s %s\n", name.c_str(), format_double(value).c_str());
    if (r.metrics_present) {
        std::printf("errors over the settled window (mean |e|, sigma, n):\n");
        for (const auto& [name, m] : r.metrics.signals)
            std::printf("  %-6s %-24s %-24s %ld\n", name.c_str(),
                        format_double(m.mean_abs_error).c_str(),
                        format_double(m.std_error).c_str(), m.count);
    }
}

void write_metrics(const fs::path& dir, const std::string& stem, const MetricsReport& m,
                   const std::string& format) {
    if (format == "csv" || format == "both")
        write_text((dir / (stem + "_metrics.csv")).string(), metrics_csv(m));
    if (format == "json" || format == "both")
        write_text((dir / (stem + "_metrics.json")).string(), metrics_to_json(m).dump(2) + "\n");
}

int cmd_run(const Options& opt) {
    Scenario sc = load_scenario_file(opt.scenario_path);

    RunOptions ro;
    ro.strict_invariants = opt.strict;
    ro.settle_override   = opt.skip_settle;

    ScenarioResult res = run_scenario(sc, ro);

    const fs::path dir(opt.out_dir);
    fs::create_directories(dir);
    write_trace_csv((dir / (res.name + "_trace.csv")).string(), res.trace);
    if (res.metrics_present)
        write_metrics(dir, res.name, res.metrics, opt.format);

    print_summary(res);
    std::printf("trace        %s\n", (dir / (res.name + "_trace.csv")).string().c_str());
    return 0;
}

int cmd_ab(const Options& opt) {
    Scenario sc = load_scenario_file(opt.scenario_path);

    RunOptions ro;
    ro.strict_invariants = opt.strict;
    ro.settle_override   = opt.skip_settle;

    AbResult ab = run_ab(sc, ro);

    const fs::path dir(opt.out_dir);
    fs::create_directories(dir);
    write_trace_csv((dir / (sc.name + "_baseline_trace.csv")).string(), ab.baseline.trace);
    write_trace_csv((dir / (sc.name + "_compensated_trace.csv")).string(),
                    ab.compensated.trace);

    if (ab.baseline.metrics_present && ab.compensated.metrics_present) {
        const std::string table = ab_metrics_csv(ab.baseline.metrics, ab.compensated.metrics);
        if (opt.format == "csv" || opt.format == "both")
            write_text((dir / (sc.name + "_ab_metrics.csv")).string(), table);
        if (opt.format == "json" || opt.format == "both") {
            nlohmann::ordered_json j;
            j["baseline"]    = metrics_to_json(ab.baseline.metrics);
            j["compensated"] = metrics_to_json(ab.compensated.metrics);
            write_text((dir / (sc.name + "_ab_metrics.json")).string(), j.dump(2) + "\n");
        }
        std::printf("A/B over the settled window, mean |e| baseline -> compensated:\n");
        for (const auto& [name, bm] : ab.baseline.metrics.signals) {
            const SignalMetrics* cm = ab.compensated.metrics.find(name);
            if (!cm)
                continue;
            std::printf("  %-6s %-24s -> %-24s", name.c_str(),
                        format_double(bm.mean_abs_error).c_str(),
                        format_double(cm->mean_abs_error).c_str());
            if (bm.mean_abs_error != 0.0)
                std::printf("  (%+.2f%%)",
                            -improvement_percent(bm.mean_abs_error, cm->mean_abs_error));
            std::printf("\n");
        }
    }

    std::printf("-- baseline --\n");
    print_summary(ab.baseline);
    std::printf("-- compensated --\n");
    print_summary(ab.compensated);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"discrete sliding-mode control simulator"};
    app.require_subcommand(1);

    Options opt;
    double  skip_settle_value = 0.0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("scenario", opt.scenario_path, "scenario INI file")->required();
        cmd->add_option("--out", opt.out_dir, "output directory (default .)");
        cmd->add_option("--format", opt.format, "metrics format: csv, json or both")
            ->check(CLI::IsMember({"csv", "json", "both"}));
        cmd->add_option("--skip-settle", skip_settle_value,
                        "override the scenario's settle window [s]");
        cmd->add_flag("--strict-invariants", opt.strict,
                      "abort on monitor violations and estimate clamps");
    };

    CLI::App* run = app.add_subcommand("run", "run one scenario");
    CLI::App* ab  = app.add_subcommand("ab", "run the compensation on/off pair");
    add_common(run);
    add_common(ab);

    CLI11_PARSE(app, argc, argv);

    if (run->count("--skip-settle") || ab->count("--skip-settle"))
        opt.skip_settle = skip_settle_value;

    try {
        return app.got_subcommand(run) ? cmd_run(opt) : cmd_ab(opt);
    } catch (const InvariantViolation& e) {
        std::fprintf(stderr, "invariant violation: %s\n", e.what());
        return 3;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
