#pragma once

// Deterministic text I/O for traces, metrics, and scenario fingerprints.
//
// Doubles are written with std::to_chars (shortest round-trip form, no
// locale), so re-importing a trace reproduces the original values bit for
// bit and two identical runs produce byte-identical files. NaN marks an
// inactive cell and is written as an empty field.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "dsmc/errors.hpp"
#include "dsmc/sim/metrics.hpp"
#include "dsmc/sim/scenario.hpp"

namespace dsmc::sim {

inline std::string format_double(double v) {
    if (std::isnan(v))
        return "";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& text) {
    if (text.empty())
        return std::numeric_limits<double>::quiet_NaN();
    double      v   = 0.0;
    const char* b   = text.data();
    const char* e   = b + text.size();
    auto        res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e)
        throw ConfigError("io: not a number: '" + text + "'");
    return v;
}

struct TraceTable {
    std::vector<std::string>         columns;
    std::vector<std::vector<double>> rows;

    int column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name)
                return static_cast<int>(i);
        throw ConfigError("io: no trace column named '" + name + "'");
    }
};

inline void write_trace_csv(const std::string& path, const TraceTable& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("io: cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < trace.columns.size(); ++i)
        out << (i ? "," : "") << trace.columns[i];
    out << '\n';
    for (const auto& row : trace.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << '\n';
    }
    if (!out)
        throw ConfigError("io: write failed for '" + path + "'");
}

inline TraceTable read_trace_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("io: cannot open '" + path + "'");
    TraceTable  t;
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError("io: empty trace file '" + path + "'");
    std::stringstream hs(line);
    for (std::string cell; std::getline(hs, cell, ',');)
        t.columns.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<double> row;
        row.reserve(t.columns.size());
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const std::string cell  = line.substr(start, comma == std::string::npos
                                                             ? std::string::npos
                                                             : comma - start);
            row.push_back(parse_double(cell));
            if (comma == std::string::npos)
                break;
            start = comma + 1;
        }
        if (row.size() != t.columns.size())
            throw ConfigError("io: ragged row in '" + path + "'");
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---------------------------------------------------------------------------
// Metrics output
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json metrics_to_json(const MetricsReport& report) {
    nlohmann::ordered_json signals = nlohmann::ordered_json::object();
    for (const auto& [name, m] : report.signals) {
        signals[name] = {{"mean_abs_error", m.mean_abs_error},
                         {"std_error", m.std_error},
                         {"count", m.count}};
    }
    return signals;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("io: cannot open '" + path + "' for writing");
    out << text;
    if (!out)
        throw ConfigError("io: write failed for '" + path + "'");
}

inline std::string metrics_csv(const MetricsReport& report) {
    std::string s = "signal,mean_abs_error,std_error,count\n";
    for (const auto& [name, m] : report.signals) {
        s += name + "," + format_double(m.mean_abs_error) + "," + format_double(m.std_error) +
             "," + std::to_string(m.count) + "\n";
    }
    return s;
}

/// A/B comparison table: per signal, both variants' metrics and the
/// relative change of the mean absolute error (negative = improvement).
inline std::string ab_metrics_csv(const MetricsReport& base, const MetricsReport& comp) {
    std::string s = "signal,baseline_mean_abs_error,compensated_mean_abs_error,delta_percent,"
                    "baseline_std_error,compensated_std_error\n";
    for (const auto& [name, bm] : base.signals) {
        const SignalMetrics* cm = comp.find(name);
        if (!cm)
            continue;
        const double delta = -improvement_percent(bm.mean_abs_error, cm->mean_abs_error);
        s += name + "," + format_double(bm.mean_abs_error) + "," +
             format_double(cm->mean_abs_error) + "," + format_double(delta) + "," +
             format_double(bm.std_error) + "," + format_double(cm->std_error) + "\n";
    }
    return s;
}

// ---------------------------------------------------------------------------
// Scenario fingerprint
// ---------------------------------------------------------------------------

namespace detail {

inline void dump_kv(std::string& out, const std::string& key, double v) {
    out += key + "=" + format_double(v) + "\n";
}
inline void dump_kv(std::string& out, const std::string& key, const std::string& v) {
    out += key + "=" + v + "\n";
}
inline void dump_kv(std::string& out, const std::string& key, bool v) {
    out += key + "=" + (v ? "on" : "off") + "\n";
}

inline const char* mode_name(engine::UncertaintyMode m) {
    switch (m) {
    case engine::UncertaintyMode::additive: return "additive";
    case engine::UncertaintyMode::multiplicative: return "multiplicative";
    default: return "none";
    }
}
inline const char* adapt_name(engine::AdaptMode m) {
    switch (m) {
    case engine::AdaptMode::additive: return "additive";
    case engine::AdaptMode::multiplicative: return "multiplicative";
    default: return "none";
    }
}

inline void dump_trajectory(std::string& out, const std::string& key, const TrajectorySpec& t) {
    out += key + ".kind=";
    out += t.kind == TrajectoryKind::constant ? "constant"
           : t.kind == TrajectoryKind::steps  ? "steps"
                                              : "ramps";
    out += "\n";
    for (const auto& [bt, bv] : t.points)
        out += key + ".point=" + format_double(bt) + ":" + format_double(bv) + "\n";
    dump_kv(out, key + ".dither", t.dither_amplitude);
}

inline void dump_adc(std::string& out, const std::string& key, const AdcChannelConfig& c) {
    dump_kv(out, key + ".sample_period_s", c.sample_period_s);
    dump_kv(out, key + ".bits", static_cast<double>(c.bits));
    dump_kv(out, key + ".fsr", c.fsr);
    dump_kv(out, key + ".range_min", c.range_min);
}

inline void dump_loop(std::string& out, const std::string& key, const LoopSetup& l,
                      bool mask_compensation) {
    dump_kv(out, key + ".rho", l.control.rho);
    if (!mask_compensation)
        dump_kv(out, key + ".adc_compensation", l.control.adc_compensation);
    dump_kv(out, key + ".actuator_min", l.control.limits.min);
    dump_kv(out, key + ".actuator_max", l.control.limits.max);
    dump_kv(out, key + ".adapt", std::string(adapt_name(l.adapt)));
    dump_kv(out, key + ".kappa", l.kappa);
    dump_kv(out, key + ".rho_beta", l.rho_beta);
    dump_kv(out, key + ".alpha0", l.alpha0);
    dump_kv(out, key + ".beta0", l.beta0);
    dump_kv(out, key + ".clamp_scale", l.clamp_scale);
}

} // namespace detail

/// Canonical text form of every field that affects a run. Used to verify
/// that A/B variants differ only in the compensation flags (those fields
/// are omitted when `mask_compensation` is set).
inline std::string canonical_dump(const Scenario& sc, bool mask_compensation = false) {
    using namespace detail;
    std::string out;
    dump_kv(out, "name", sc.name);
    dump_kv(out, "kind", std::string(sc.kind == ScenarioKind::engine ? "engine" : "scalar"));
    dump_kv(out, "duration_s", sc.duration_s);
    dump_kv(out, "sample_period_s", sc.sample_period_s);
    dump_kv(out, "settle_skip_s", sc.settle_skip_s);
    dump_kv(out, "seed", static_cast<double>(sc.seed));
    dump_kv(out, "adaptation_update", sc.adaptation_update);
    dump_kv(out, "monitor_tolerance", sc.monitor_tolerance);
    if (sc.kind == ScenarioKind::scalar) {
        const auto& s = sc.scalar;
        dump_kv(out, "scalar.g", s.g);
        dump_kv(out, "scalar.drift_c0", s.drift_c0);
        dump_kv(out, "scalar.drift_c1", s.drift_c1);
        dump_kv(out, "scalar.x0", s.x0);
        dump_kv(out, "scalar.injection", std::string(mode_name(s.injection_mode)));
        dump_kv(out, "scalar.alpha_true", s.alpha_true);
        dump_kv(out, "scalar.beta_true", s.beta_true);
        dump_loop(out, "scalar.loop", s.loop, mask_compensation);
        dump_trajectory(out, "scalar.trajectory", s.trajectory);
        dump_kv(out, "scalar.adc.enabled", s.adc_enabled);
        if (s.adc_enabled)
            dump_adc(out, "scalar.adc", s.adc);
    } else {
        const auto& e = sc.engine;
        const auto& p = e.params;
        dump_kv(out, "plant.tau_e", p.tau_e);
        dump_kv(out, "plant.tau_f", p.tau_f);
        dump_kv(out, "plant.inertia_j", p.inertia_j);
        dump_kv(out, "plant.afi", p.afi_value);
        dump_kv(out, "plant.torque_gain", p.torque_gain);
        const double ks[] = {p.k1, p.k2, p.k3, p.k4, p.k5, p.k6, p.k7, p.k8, p.k9, p.k10};
        for (int i = 0; i < 10; ++i)
            dump_kv(out, "plant.k" + std::to_string(i + 1), ks[i]);
        for (const auto& [afr, afi] : p.afi_table)
            out += "plant.afi_point=" + format_double(afr) + ":" + format_double(afi) + "\n";
        dump_kv(out, "plant.init_texh", e.initial.t_exh);
        dump_kv(out, "plant.init_mdotf", e.initial.mdot_f);
        dump_kv(out, "plant.init_omega", e.initial.omega_e);
        dump_kv(out, "plant.init_ma", e.initial.m_a);
        const auto& inj = e.injection;
        dump_kv(out, "injection.texh_mode", std::string(mode_name(inj.texh_mode)));
        dump_kv(out, "injection.texh_alpha", inj.alpha_texh);
        dump_kv(out, "injection.texh_beta", inj.beta_texh);
        dump_kv(out, "injection.mdotf_mode", std::string(mode_name(inj.mdotf_mode)));
        dump_kv(out, "injection.mdotf_alpha", inj.alpha_mdotf);
        dump_kv(out, "injection.mdotf_beta", inj.beta_mdotf);
        dump_kv(out, "injection.omega_mode", std::string(mode_name(inj.omega_mode)));
        dump_kv(out, "injection.omega_alpha", inj.alpha_omega);
        dump_kv(out, "injection.ma_mode", std::string(mode_name(inj.ma_mode)));
        dump_kv(out, "injection.ma_alpha", inj.alpha_ma);
        dump_loop(out, "loops.texh", e.texh, mask_compensation);
        dump_loop(out, "loops.mdotf", e.mdotf, mask_compensation);
        dump_loop(out, "loops.omega", e.omega, mask_compensation);
        dump_loop(out, "loops.ma", e.ma, mask_compensation);
        dump_trajectory(out, "trajectory.texh", e.traj_texh);
        dump_trajectory(out, "trajectory.omega", e.traj_omega);
        dump_trajectory(out, "trajectory.afr", e.traj_afr);
        dump_kv(out, "adc.enabled", e.adc_enabled);
        if (e.adc_enabled) {
            dump_adc(out, "adc.texh", e.adc_texh);
            dump_adc(out, "adc.mdotf", e.adc_mdotf);
            dump_adc(out, "adc.omega", e.adc_omega);
            dump_adc(out, "adc.ma", e.adc_ma);
        }
    }
    return out;
}

} // namespace dsmc::sim
