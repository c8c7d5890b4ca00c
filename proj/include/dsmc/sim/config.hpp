#pragma once

// Scenario files: a small INI dialect.
//
//   [section]            subsections use dots: [loops.texh], [adc.omega]
//   key = value          '#' starts a comment, also after a value
//   points = 0:400, 2:700
//
// Unknown keys, duplicate keys, and values that fail to parse are hard
// errors; silent typos in a control experiment are worse than a refused
// file. Keys not present fall back to the scenario defaults, except where
// noted (kind, trajectories).
//
// Sections for kind = scalar: [scenario], [plant] (g, drift_c0, drift_c1,
// x0), [injection] (mode, alpha, beta), [loop], [trajectory], [adc].
// For kind = engine: [scenario], [plant], [injection] (texh_mode,
// texh_alpha, texh_beta, mdotf_*, omega_mode, omega_alpha, ma_mode,
// ma_alpha), [loops.texh|mdotf|omega|ma], [trajectory.texh|omega|afr],
// [adc] (enabled) and [adc.texh|mdotf|omega|ma] (bits, fsr, range_min).
// The ADC always runs at the control rate; there is no per-channel period.

#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dsmc/errors.hpp"
#include "dsmc/sim/scenario.hpp"

namespace dsmc::sim {

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct ConfigData {
    std::map<std::string, std::map<std::string, std::string>> sections;
};

inline ConfigData parse_config(const std::string& text) {
    ConfigData  d;
    std::string section;
    std::istringstream in(text);
    std::string        raw;
    int                lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (const auto pos = line.find('#'); pos != std::string::npos)
            line.resize(pos);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
            d.sections[section]; // a header alone is legal
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key   = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": key outside a section");
        auto& sect = d.sections[section];
        if (sect.count(key))
            throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" +
                              section + "." + key + "'");
        sect[key] = value;
    }
    return d;
}

inline double to_number(const std::string& v, const std::string& where) {
    std::string low;
    for (char c : v)
        low += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const bool   neg  = !low.empty() && low.front() == '-';
    const std::string mag = (!low.empty() && (low.front() == '-' || low.front() == '+'))
                                ? low.substr(1)
                                : low;
    if (mag == "inf" || mag == "infinity")
        return neg ? -std::numeric_limits<double>::infinity()
                   : std::numeric_limits<double>::infinity();
    double      out = 0.0;
    const char* b   = v.data();
    const char* e   = b + v.size();
    auto        res = std::from_chars(b, e, out);
    if (res.ec != std::errc{} || res.ptr != e)
        throw ConfigError("config: " + where + ": not a number: '" + v + "'");
    return out;
}

inline long to_integer(const std::string& v, const std::string& where) {
    long        out = 0;
    const char* b   = v.data();
    const char* e   = b + v.size();
    auto        res = std::from_chars(b, e, out);
    if (res.ec != std::errc{} || res.ptr != e)
        throw ConfigError("config: " + where + ": not an integer: '" + v + "'");
    return out;
}

inline bool to_flag(const std::string& v, const std::string& where) {
    if (v == "on" || v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "off" || v == "false" || v == "0" || v == "no")
        return false;
    throw ConfigError("config: " + where + ": not a flag (on/off): '" + v + "'");
}

inline std::vector<std::pair<double, double>> to_points(const std::string& v,
                                                        const std::string& where) {
    std::vector<std::pair<double, double>> pts;
    std::stringstream ss(v);
    std::string       item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ConfigError("config: " + where + ": expected t:value, got '" + item + "'");
        pts.emplace_back(to_number(trim(item.substr(0, colon)), where),
                         to_number(trim(item.substr(colon + 1)), where));
    }
    if (pts.empty())
        throw ConfigError("config: " + where + ": empty point list");
    return pts;
}

/// Typed access with consumption tracking so finish() can reject typos.
class ConfigReader {
public:
    explicit ConfigReader(ConfigData d) : data_(std::move(d)) {}

    bool has_section(const std::string& sec) const { return data_.sections.count(sec) != 0; }

    std::optional<std::string> fetch(const std::string& sec, const std::string& key) {
        used_.insert(sec + "\n" + key);
        const auto s = data_.sections.find(sec);
        if (s == data_.sections.end())
            return std::nullopt;
        const auto k = s->second.find(key);
        if (k == s->second.end())
            return std::nullopt;
        return k->second;
    }

    std::string require(const std::string& sec, const std::string& key) {
        auto v = fetch(sec, key);
        if (!v)
            throw ConfigError("config: missing required key '" + sec + "." + key + "'");
        return *v;
    }

    std::string text(const std::string& sec, const std::string& key, const std::string& def) {
        auto v = fetch(sec, key);
        return v ? *v : def;
    }
    double number(const std::string& sec, const std::string& key, double def) {
        auto v = fetch(sec, key);
        return v ? to_number(*v, sec + "." + key) : def;
    }
    long integer(const std::string& sec, const std::string& key, long def) {
        auto v = fetch(sec, key);
        return v ? to_integer(*v, sec + "." + key) : def;
    }
    bool flag(const std::string& sec, const std::string& key, bool def) {
        auto v = fetch(sec, key);
        return v ? to_flag(*v, sec + "." + key) : def;
    }

    void finish() const {
        for (const auto& [sec, keys] : data_.sections)
            for (const auto& [key, value] : keys)
                if (!used_.count(sec + "\n" + key))
                    throw ConfigError("config: unknown key '" + sec + "." + key + "'");
    }

private:
    ConfigData            data_;
    std::set<std::string> used_;
};

inline TrajectoryKind to_traj_kind(const std::string& v, const std::string& where) {
    if (v == "constant")
        return TrajectoryKind::constant;
    if (v == "steps")
        return TrajectoryKind::steps;
    if (v == "ramps")
        return TrajectoryKind::ramps;
    throw ConfigError("config: " + where + ": unknown trajectory kind '" + v + "'");
}

inline engine::UncertaintyMode to_unc_mode(const std::string& v, const std::string& where) {
    if (v == "none")
        return engine::UncertaintyMode::none;
    if (v == "additive")
        return engine::UncertaintyMode::additive;
    if (v == "multiplicative")
        return engine::UncertaintyMode::multiplicative;
    throw ConfigError("config: " + where + ": unknown uncertainty mode '" + v + "'");
}

inline engine::AdaptMode to_adapt_mode(const std::string& v, const std::string& where) {
    if (v == "none")
        return engine::AdaptMode::none;
    if (v == "additive")
        return engine::AdaptMode::additive;
    if (v == "multiplicative")
        return engine::AdaptMode::multiplicative;
    throw ConfigError("config: " + where + ": unknown adaptation mode '" + v + "'");
}

inline TrajectorySpec load_trajectory(ConfigReader& r, const std::string& sec) {
    if (!r.has_section(sec))
        throw ConfigError("config: missing section [" + sec + "]");
    TrajectorySpec t;
    t.kind              = to_traj_kind(r.text(sec, "kind", "constant"), sec + ".kind");
    t.points            = to_points(r.require(sec, "points"), sec + ".points");
    t.dither_amplitude  = r.number(sec, "dither", 0.0);
    return t;
}

inline void load_loop(ConfigReader& r, const std::string& sec, LoopSetup& l) {
    if (!r.has_section(sec))
        return;
    l.control.rho              = r.number(sec, "rho", l.control.rho);
    l.control.adc_compensation = r.flag(sec, "adc_compensation", l.control.adc_compensation);
    l.control.limits.min       = r.number(sec, "actuator_min", l.control.limits.min);
    l.control.limits.max       = r.number(sec, "actuator_max", l.control.limits.max);
    l.adapt       = to_adapt_mode(r.text(sec, "adapt", "none"), sec + ".adapt");
    l.kappa       = r.number(sec, "kappa", l.kappa);
    l.rho_beta    = r.number(sec, "rho_beta", l.rho_beta);
    l.alpha0      = r.number(sec, "alpha0", l.alpha0);
    l.beta0       = r.number(sec, "beta0", l.beta0);
    l.clamp_scale = r.number(sec, "clamp_scale", l.clamp_scale);
}

inline void load_adc_channel(ConfigReader& r, const std::string& sec, AdcChannelConfig& c) {
    if (!r.has_section(sec))
        return;
    c.bits      = static_cast<int>(r.integer(sec, "bits", c.bits));
    c.fsr       = r.number(sec, "fsr", c.fsr);
    c.range_min = r.number(sec, "range_min", c.range_min);
}

} // namespace detail

inline Scenario load_scenario_text(const std::string& text,
                                   const std::string& fallback_name = "scenario") {
    using namespace detail;
    ConfigReader r(parse_config(text));

    Scenario sc;
    sc.name = r.text("scenario", "name", fallback_name);
    const std::string kind = r.require("scenario", "kind");
    if (kind == "scalar")
        sc.kind = ScenarioKind::scalar;
    else if (kind == "engine")
        sc.kind = ScenarioKind::engine;
    else
        throw ConfigError("config: scenario.kind must be scalar or engine, got '" + kind + "'");

    sc.duration_s      = r.number("scenario", "duration_s", sc.duration_s);
    sc.sample_period_s = r.number("scenario", "sample_period_s", sc.sample_period_s);
    sc.settle_skip_s   = r.number("scenario", "settle_skip_s", sc.settle_skip_s);
    const long seed    = r.integer("scenario", "seed", 0);
    if (seed < 0)
        throw ConfigError("config: scenario.seed must be >= 0");
    sc.seed              = static_cast<std::uint64_t>(seed);
    sc.adaptation_update = r.flag("scenario", "adaptation_update", sc.adaptation_update);
    sc.monitor_tolerance = r.number("scenario", "monitor_tolerance", sc.monitor_tolerance);

    if (sc.kind == ScenarioKind::scalar) {
        auto& s    = sc.scalar;
        s.g        = r.number("plant", "g", s.g);
        s.drift_c0 = r.number("plant", "drift_c0", s.drift_c0);
        s.drift_c1 = r.number("plant", "drift_c1", s.drift_c1);
        s.x0       = r.number("plant", "x0", s.x0);

        s.injection_mode =
            to_unc_mode(r.text("injection", "mode", "none"), "injection.mode");
        s.alpha_true = r.number("injection", "alpha", s.alpha_true);
        s.beta_true  = r.number("injection", "beta", s.beta_true);

        load_loop(r, "loop", s.loop);
        s.trajectory  = load_trajectory(r, "trajectory");
        s.adc_enabled = r.flag("adc", "enabled", s.adc_enabled);
        load_adc_channel(r, "adc", s.adc);
    } else {
        auto& e = sc.engine;
        auto& p = e.params;

        p.tau_e       = r.number("plant", "tau_e", p.tau_e);
        p.tau_f       = r.number("plant", "tau_f", p.tau_f);
        p.inertia_j   = r.number("plant", "inertia_j", p.inertia_j);
        p.afi_value   = r.number("plant", "afi", p.afi_value);
        p.torque_gain = r.number("plant", "torque_gain", p.torque_gain);
        double* ks[10] = {&p.k1, &p.k2, &p.k3, &p.k4, &p.k5,
                          &p.k6, &p.k7, &p.k8, &p.k9, &p.k10};
        for (int i = 0; i < 10; ++i)
            *ks[i] = r.number("plant", "k" + std::to_string(i + 1), *ks[i]);
        if (auto v = r.fetch("plant", "afi_points"))
            p.afi_table = to_points(*v, "plant.afi_points");
        e.initial.t_exh   = r.number("plant", "init_texh", e.initial.t_exh);
        e.initial.mdot_f  = r.number("plant", "init_mdotf", e.initial.mdot_f);
        e.initial.omega_e = r.number("plant", "init_omega", e.initial.omega_e);
        e.initial.m_a     = r.number("plant", "init_ma", e.initial.m_a);

        auto& inj     = e.injection;
        inj.texh_mode = to_unc_mode(r.text("injection", "texh_mode", "none"), "injection.texh_mode");
        inj.alpha_texh  = r.number("injection", "texh_alpha", inj.alpha_texh);
        inj.beta_texh   = r.number("injection", "texh_beta", inj.beta_texh);
        inj.mdotf_mode  = to_unc_mode(r.text("injection", "mdotf_mode", "none"), "injection.mdotf_mode");
        inj.alpha_mdotf = r.number("injection", "mdotf_alpha", inj.alpha_mdotf);
        inj.beta_mdotf  = r.number("injection", "mdotf_beta", inj.beta_mdotf);
        inj.omega_mode  = to_unc_mode(r.text("injection", "omega_mode", "none"), "injection.omega_mode");
        inj.alpha_omega = r.number("injection", "omega_alpha", inj.alpha_omega);
        inj.ma_mode     = to_unc_mode(r.text("injection", "ma_mode", "none"), "injection.ma_mode");
        inj.alpha_ma    = r.number("injection", "ma_alpha", inj.alpha_ma);

        load_loop(r, "loops.texh", e.texh);
        load_loop(r, "loops.mdotf", e.mdotf);
        load_loop(r, "loops.omega", e.omega);
        load_loop(r, "loops.ma", e.ma);

        e.traj_texh  = load_trajectory(r, "trajectory.texh");
        e.traj_omega = load_trajectory(r, "trajectory.omega");
        e.traj_afr   = load_trajectory(r, "trajectory.afr");

        e.adc_enabled = r.flag("adc", "enabled", e.adc_enabled);
        load_adc_channel(r, "adc.texh", e.adc_texh);
        load_adc_channel(r, "adc.mdotf", e.adc_mdotf);
        load_adc_channel(r, "adc.omega", e.adc_omega);
        load_adc_channel(r, "adc.ma", e.adc_ma);
    }

    r.finish();
    sc.validate();
    return sc;
}

inline Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    std::string stem = path;
    if (const auto slash = stem.find_last_of('/'); slash != std::string::npos)
        stem = stem.substr(slash + 1);
    if (const auto dot = stem.find_last_of('.'); dot != std::string::npos && dot > 0)
        stem = stem.substr(0, dot);
    return load_scenario_text(ss.str(), stem);
}

} // namespace dsmc::sim
