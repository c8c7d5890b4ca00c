#pragma once

// Deterministic software-in-the-loop runner. One entry point, run_scenario,
// executes a scalar or engine scenario on a fixed step grid and returns the
// full per-step trace plus settled tracking metrics and event counters.
// run_ab executes the measurement-compensation A/B pair: two runs from the
// same scenario that differ only in the per-loop compensation flags, which
// is checked against the canonical scenario fingerprint before running.
//
// Per step, in order: read references (with lookahead), sample the ADC
// front end, snapshot the adaptive estimates the controller will use, run
// the control law(s), advance the Lyapunov monitors, record the trace row,
// then advance the plant truth. The trace row therefore holds the state at
// the sample instant together with everything computed *from* it.
//
// The Lyapunov monitor checks the exact decrement identity
//
//   V(i+1) - V(i) = -(1 - rho) s(i)^2 + ds^2/2 + kappa da^2/2
//
// (ds, da the realized surface/estimate-error increments) that holds
// whenever the surface recursion s(i+1) = rho s(i) + T alpha_tilde(i) and
// the additive update both hold. Loops whose references are internally
// generated and held, or that run behind an active ADC, deviate from the
// recursion for physical reasons, so the tolerance is per scenario and
// defaults to infinity (report only).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dsmc/adaptation.hpp"
#include "dsmc/adc.hpp"
#include "dsmc/core.hpp"
#include "dsmc/engine/control.hpp"
#include "dsmc/engine/plant.hpp"
#include "dsmc/errors.hpp"
#include "dsmc/sim/io.hpp"
#include "dsmc/sim/metrics.hpp"
#include "dsmc/sim/scenario.hpp"
#include "dsmc/sim/trajectory.hpp"

namespace dsmc::sim {

struct RunOptions {
    /// Turn monitor violations and estimate-clamp events into exceptions.
    bool strict_invariants = false;
    /// Replaces the scenario's settle_skip_s when set.
    std::optional<double> settle_override;
};

struct ScenarioResult {
    std::string name;
    double      sample_period_s = 0.02;
    double      settle_skip_s   = 0.0;

    TraceTable trace;

    bool          metrics_present = false;
    MetricsReport metrics;

    long   estimate_clamp_events = 0;
    long   plant_clamp_events    = 0;
    long   monitor_violations    = 0;
    double max_monitor_residual  = 0.0; // scaled; see monitor notes above

    std::vector<std::pair<std::string, double>> final_estimates;
    std::vector<std::string>                    warnings;
};

namespace detail {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

inline engine::LoopAdaptation make_adaptation(const LoopSetup& l, double alpha_true,
                                              double beta_true, bool update) {
    engine::LoopAdaptation ad;
    ad.mode   = l.adapt;
    ad.update = update;

    ad.add.alpha_hat  = l.alpha0;
    ad.add.kappa      = l.kappa;
    ad.add.alpha_true = alpha_true;
    if (l.clamp_scale > 0.0 && alpha_true != 0.0) {
        ad.add.clamp_hi = l.clamp_scale * std::abs(alpha_true);
        ad.add.clamp_lo = -ad.add.clamp_hi;
    }

    ad.mult.beta_hat  = l.beta0;
    ad.mult.rho_beta  = l.rho_beta;
    ad.mult.beta_true = beta_true;
    if (l.clamp_scale > 0.0) {
        ad.mult.clamp_hi = l.clamp_scale * std::max(std::abs(beta_true), 1.0);
        ad.mult.clamp_lo = -ad.mult.clamp_hi;
    }
    return ad;
}

struct LyapMonitor {
    bool   active     = false;
    double rho        = 0.5;
    double kappa      = 1.0;
    double alpha_true = 0.0;
    std::optional<LyapunovSample> prev;
};

/// Advance one monitor. Returns the scaled identity residual (0 for the
/// first sample). x_scale guards the relative scale when the surface has
/// converged far below the state magnitude.
inline double monitor_advance(LyapMonitor& mon, double s_used, double est_used, double x_scale,
                              LyapunovSample& out) {
    out = lyapunov_sample(s_used, mon.alpha_true - est_used, mon.kappa, mon.prev);
    double scaled = 0.0;
    if (mon.prev) {
        const double ds       = out.s - mon.prev->s;
        const double da       = out.alpha_tilde - mon.prev->alpha_tilde;
        const double expected = -(1.0 - mon.rho) * mon.prev->s * mon.prev->s + 0.5 * ds * ds +
                                0.5 * mon.kappa * da * da;
        const double floor_s = 1e-5 * x_scale;
        const double scale =
            std::max({out.v, mon.prev->v, mon.prev->s * mon.prev->s, floor_s * floor_s});
        scaled = std::abs(out.delta_v - expected) / scale;
    }
    mon.prev = out;
    return scaled;
}

inline void check_monitor(ScenarioResult& res, const Scenario& sc, const RunOptions& opt,
                          double scaled, const char* loop, long step) {
    res.max_monitor_residual = std::max(res.max_monitor_residual, scaled);
    if (scaled > sc.monitor_tolerance) {
        ++res.monitor_violations;
        if (opt.strict_invariants)
            throw InvariantViolation("monitor: Lyapunov identity residual " +
                                     format_double(scaled) + " on loop " + loop + " at step " +
                                     std::to_string(step));
    }
}

inline void check_finite(double v, const char* what, long step) {
    if (!std::isfinite(v))
        throw NumericError(std::string("run: non-finite ") + what + " at step " +
                           std::to_string(step));
}

inline void add_signal_metrics(ScenarioResult& res, const std::string& name,
                               const std::vector<double>& errors) {
    for (double e : errors)
        if (!std::isfinite(e)) {
            res.warnings.push_back("metrics: signal '" + name +
                                   "' undefined inside the settle window, omitted");
            return;
        }
    if (errors.empty())
        return;
    res.metrics.signals.emplace_back(name, compute_metrics(errors));
    res.metrics_present = true;
}

// ---------------------------------------------------------------------------
// Scalar runner
// ---------------------------------------------------------------------------

inline ScenarioResult run_scalar(const Scenario& sc, const RunOptions& opt) {
    const ScalarScenario& p = sc.scalar;
    const double          T = sc.sample_period_s;
    const long            n = sc.step_count();

    const double alpha_true =
        p.injection_mode == engine::UncertaintyMode::additive ? p.alpha_true : 0.0;
    const double beta_true =
        p.injection_mode == engine::UncertaintyMode::multiplicative ? p.beta_true : 1.0;

    engine::LoopAdaptation ad =
        make_adaptation(p.loop, alpha_true, beta_true, sc.adaptation_update);

    AdcChannelConfig adc_cfg = p.adc;
    adc_cfg.sample_period_s  = T; // the ADC runs at the loop rate by construction
    if (p.adc_enabled)
        adc_cfg.validate();
    AdcChannelState adc_st;

    LyapMonitor mon;
    mon.active = p.loop.adapt == engine::AdaptMode::additive &&
                 p.injection_mode != engine::UncertaintyMode::multiplicative;
    mon.rho        = p.loop.control.rho;
    mon.kappa      = p.loop.kappa;
    mon.alpha_true = alpha_true;

    SisoModel model;
    model.g = p.g;
    model.T = T;

    ScenarioResult res;
    res.name            = sc.name;
    res.sample_period_s = T;
    res.settle_skip_s   = sc.settle_skip_s;
    res.trace.columns   = {"t", "x",    "x_q", "x_d", "s", "u",
                           "mu_x", "mu_u", "est", "v",   "dv"};
    res.trace.rows.reserve(static_cast<std::size_t>(n));

    double x = p.x0;
    std::vector<double> errors;
    for (long i = 0; i < n; ++i) {
        const double t        = static_cast<double>(i) * T;
        const double x_d      = trajectory_sample(p.trajectory, sc.seed, 0, i, T);
        const double x_d_next = trajectory_sample(p.trajectory, sc.seed, 0, i + 1, T);

        double mu_x    = 0.0;
        double x_meas  = x;
        if (p.adc_enabled) {
            x_meas = sample_and_hold(x, adc_st, adc_cfg);
            mu_x   = predict_total_uncertainty(adc_st, adc_cfg).mu_total;
        }

        const double est_used =
            ad.mode == engine::AdaptMode::none ? kNan : ad.estimate();

        auto f_hat = [&](double xv) {
            switch (ad.mode) {
            case engine::AdaptMode::additive:
                return p.drift_c0 + p.drift_c1 * xv + ad.add.alpha_hat;
            case engine::AdaptMode::multiplicative:
                return ad.mult.beta_hat * (p.drift_c0 + p.drift_c1 * xv);
            default:
                return p.drift_c0 + p.drift_c1 * xv;
            }
        };

        engine::LoopIo io{x_meas, mu_x, x_d, x_d_next};
        const long prev_clamps = ad.clamp_events();
        engine::LoopResult r = engine::detail::run_loop(model, io, p.loop.control, f_hat);
        if (ad.update) {
            if (ad.mode == engine::AdaptMode::additive) {
                update_additive(ad.add, r.s, T);
            } else if (ad.mode == engine::AdaptMode::multiplicative) {
                const double f_nom = p.drift_c0 + p.drift_c1 * x_meas;
                update_multiplicative(ad.mult, f_nom, r.s, T);
            }
        }
        if (ad.clamp_events() > prev_clamps && opt.strict_invariants)
            throw InvariantViolation("run: estimate clamp engaged at step " + std::to_string(i));

        double v = kNan, dv = kNan;
        if (mon.active) {
            const double   x_scale = std::max({1.0, std::abs(x_meas), std::abs(x_d)});
            LyapunovSample samp;
            const double scaled = monitor_advance(mon, r.s, est_used, x_scale, samp);
            if (i > 0)
                check_monitor(res, sc, opt, scaled, "x", i);
            v  = samp.v;
            dv = samp.delta_v;
        }

        res.trace.rows.push_back({t, x, x_meas, x_d, r.s, r.command, mu_x, r.mu_u, est_used, v, dv});
        if (t >= sc.settle_skip_s - 1e-9)
            errors.push_back(x - x_d);

        double f_actual = p.drift_c0 + p.drift_c1 * x;
        if (p.injection_mode == engine::UncertaintyMode::additive)
            f_actual += p.alpha_true;
        else if (p.injection_mode == engine::UncertaintyMode::multiplicative)
            f_actual = p.beta_true * (p.drift_c0 + p.drift_c1 * x);
        x = plant_euler_step(model, x, r.command, f_actual);

        check_finite(x, "state", i);
        check_finite(r.command, "command", i);
        if (ad.mode != engine::AdaptMode::none)
            check_finite(ad.estimate(), "estimate", i);
    }

    res.estimate_clamp_events = ad.clamp_events();
    if (ad.mode != engine::AdaptMode::none)
        res.final_estimates.emplace_back("x", ad.estimate());
    add_signal_metrics(res, "x", errors);
    if (errors.empty())
        res.warnings.push_back("metrics: settle window is empty");
    return res;
}

// ---------------------------------------------------------------------------
// Engine runner
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& engine_trace_columns() {
    static const std::vector<std::string> cols = {
        "t",         "texh",      "mdotf",      "omega",      "ma",
        "texh_q",    "mdotf_q",   "omega_q",    "ma_q",
        "texh_d",    "mdotf_d",   "omega_d",    "ma_d",
        "s_texh",    "s_mdotf",   "s_omega",    "s_ma",
        "u_delta",   "u_mdotfc",  "u_mad",      "u_mdotai",
        "mu_x_texh", "mu_x_mdotf", "mu_x_omega", "mu_x_ma",
        "mu_u_texh", "mu_u_mdotf", "mu_u_omega", "mu_u_ma",
        "est_texh",  "est_mdotf", "est_omega",  "est_ma",
        "afr",       "afr_d",     "mdot_ao_d",
        "v_texh",    "dv_texh",   "v_mdotf",    "dv_mdotf",
        "v_omega",   "dv_omega",  "v_ma",       "dv_ma"};
    return cols;
}

inline ScenarioResult run_engine(const Scenario& sc, const RunOptions& opt) {
    const EngineScenario& e = sc.engine;
    const double          T = sc.sample_period_s;
    const long            n = sc.step_count();

    using engine::AdaptMode;
    using engine::UncertaintyMode;

    const auto inj_alpha = [](UncertaintyMode m, double a) {
        return m == UncertaintyMode::additive ? a : 0.0;
    };
    const auto inj_beta = [](UncertaintyMode m, double b) {
        return m == UncertaintyMode::multiplicative ? b : 1.0;
    };
    const double alpha_true[4] = {inj_alpha(e.injection.texh_mode, e.injection.alpha_texh),
                                  inj_alpha(e.injection.mdotf_mode, e.injection.alpha_mdotf),
                                  inj_alpha(e.injection.omega_mode, e.injection.alpha_omega),
                                  inj_alpha(e.injection.ma_mode, e.injection.alpha_ma)};
    const double beta_true[4]  = {inj_beta(e.injection.texh_mode, e.injection.beta_texh),
                                  inj_beta(e.injection.mdotf_mode, e.injection.beta_mdotf), 1.0,
                                  1.0};

    // Drift-level equivalents of the physical injections. The additive
    // estimators work in state units per second, so each physical offset
    // maps through the coefficient it carries inside the state equation.
    const double drift_true[4] = {alpha_true[0] / e.params.tau_e,
                                  -alpha_true[1] / e.params.tau_f,
                                  -alpha_true[2] / e.params.inertia_j, -alpha_true[3]};

    const LoopSetup* setups[4] = {&e.texh, &e.mdotf, &e.omega, &e.ma};

    engine::EngineAdaptBank adapt;
    engine::LoopAdaptation* ads[4] = {&adapt.texh, &adapt.mdotf, &adapt.omega, &adapt.ma};
    for (int k = 0; k < 4; ++k)
        *ads[k] = make_adaptation(*setups[k], drift_true[k], beta_true[k], sc.adaptation_update);

    engine::EngineLoopConfigs cfgs{e.texh.control, e.mdotf.control, e.omega.control,
                                   e.ma.control};

    engine::EngineAdcBank adc;
    adc.enabled   = e.adc_enabled;
    adc.cfg_texh  = e.adc_texh;
    adc.cfg_mdotf = e.adc_mdotf;
    adc.cfg_omega = e.adc_omega;
    adc.cfg_ma    = e.adc_ma;
    for (AdcChannelConfig* c : {&adc.cfg_texh, &adc.cfg_mdotf, &adc.cfg_omega, &adc.cfg_ma}) {
        c->sample_period_s = T;
        if (adc.enabled)
            c->validate();
    }

    const UncertaintyMode inj_modes[4] = {e.injection.texh_mode, e.injection.mdotf_mode,
                                          e.injection.omega_mode, e.injection.ma_mode};
    LyapMonitor mons[4];
    for (int k = 0; k < 4; ++k) {
        mons[k].active = setups[k]->adapt == AdaptMode::additive &&
                         inj_modes[k] != UncertaintyMode::multiplicative;
        mons[k].rho        = setups[k]->control.rho;
        mons[k].kappa      = setups[k]->kappa;
        mons[k].alpha_true = drift_true[k];
    }
    static const char* loop_names[4] = {"texh", "mdotf", "omega", "ma"};

    ScenarioResult res;
    res.name            = sc.name;
    res.sample_period_s = T;
    res.settle_skip_s   = sc.settle_skip_s;
    res.trace.columns   = engine_trace_columns();
    res.trace.rows.reserve(static_cast<std::size_t>(n));
    if (auto w = engine::discretization_warning(e.params, T))
        res.warnings.push_back(*w);

    engine::PlantState state = e.initial;
    engine::StepEvents plant_events;

    std::vector<double> err_texh, err_mdotf, err_omega, err_ma, err_afr;

    for (long i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * T;

        engine::EngineTrajectorySamples traj;
        traj.texh_d       = trajectory_sample(e.traj_texh, sc.seed, 0, i, T);
        traj.texh_d_next  = trajectory_sample(e.traj_texh, sc.seed, 0, i + 1, T);
        traj.omega_d      = trajectory_sample(e.traj_omega, sc.seed, 1, i, T);
        traj.omega_d_next = trajectory_sample(e.traj_omega, sc.seed, 1, i + 1, T);
        traj.afr_d        = trajectory_sample(e.traj_afr, sc.seed, 2, i, T);
        traj.afr_d_next   = trajectory_sample(e.traj_afr, sc.seed, 2, i + 1, T);

        double est_used[4];
        for (int k = 0; k < 4; ++k)
            est_used[k] = ads[k]->mode == AdaptMode::none ? kNan : ads[k]->estimate();

        long prev_clamps = 0;
        for (int k = 0; k < 4; ++k)
            prev_clamps += ads[k]->clamp_events();

        const engine::ControllerOutputs out =
            engine::step_all(state, adc, traj, cfgs, adapt, e.params, T);

        long clamps = 0;
        for (int k = 0; k < 4; ++k)
            clamps += ads[k]->clamp_events();
        if (clamps > prev_clamps && opt.strict_invariants)
            throw InvariantViolation("run: estimate clamp engaged at step " + std::to_string(i));

        double v[4], dv[4];
        for (int k = 0; k < 4; ++k) {
            v[k]  = kNan;
            dv[k] = kNan;
            if (!mons[k].active)
                continue;
            const double x_scale =
                std::max({1.0, std::abs(out.measured[k]), std::abs(out.x_d[k])});
            LyapunovSample samp;
            const double scaled = monitor_advance(mons[k], out.s[k], est_used[k], x_scale, samp);
            if (i > 0)
                check_monitor(res, sc, opt, scaled, loop_names[k], i);
            v[k]  = samp.v;
            dv[k] = samp.delta_v;
        }

        const double mdot_ao_true = engine::cylinder_air_flow(e.params, state.m_a, state.omega_e);
        const double afr = state.mdot_f > 0.0 ? mdot_ao_true / state.mdot_f : kNan;

        res.trace.rows.push_back(
            {t,
             state.t_exh, state.mdot_f, state.omega_e, state.m_a,
             out.measured[0], out.measured[1], out.measured[2], out.measured[3],
             out.x_d[0], out.x_d[1], out.x_d[2], out.x_d[3],
             out.s[0], out.s[1], out.s[2], out.s[3],
             out.inputs.delta_spark, out.inputs.mdot_fc, out.m_a_desired, out.inputs.mdot_ai,
             out.mu_x[0], out.mu_x[1], out.mu_x[2], out.mu_x[3],
             out.mu_u[0], out.mu_u[1], out.mu_u[2], out.mu_u[3],
             est_used[0], est_used[1], est_used[2], est_used[3],
             afr, traj.afr_d, out.mdot_ao_d,
             v[0], dv[0], v[1], dv[1], v[2], dv[2], v[3], dv[3]});

        if (t >= sc.settle_skip_s - 1e-9) {
            err_texh.push_back(state.t_exh - out.x_d[0]);
            err_mdotf.push_back(state.mdot_f - out.x_d[1]);
            err_omega.push_back(state.omega_e - out.x_d[2]);
            err_ma.push_back(state.m_a - out.x_d[3]);
            err_afr.push_back(afr - traj.afr_d);
        }

        state = engine::step(state, out.inputs, e.injection, e.params, T, &plant_events);

        check_finite(state.t_exh, "t_exh", i);
        check_finite(state.mdot_f, "mdot_f", i);
        check_finite(state.omega_e, "omega_e", i);
        check_finite(state.m_a, "m_a", i);
        check_finite(out.inputs.delta_spark, "delta_spark", i);
        check_finite(out.inputs.mdot_fc, "mdot_fc", i);
        check_finite(out.inputs.mdot_ai, "mdot_ai", i);
        for (int k = 0; k < 4; ++k)
            if (ads[k]->mode != AdaptMode::none)
                check_finite(ads[k]->estimate(), "estimate", i);
    }

    for (int k = 0; k < 4; ++k) {
        res.estimate_clamp_events += ads[k]->clamp_events();
        if (ads[k]->mode != AdaptMode::none)
            res.final_estimates.emplace_back(loop_names[k], ads[k]->estimate());
    }
    res.plant_clamp_events = plant_events.omega_clamps + plant_events.ma_clamps;

    add_signal_metrics(res, "texh", err_texh);
    add_signal_metrics(res, "mdotf", err_mdotf);
    add_signal_metrics(res, "omega", err_omega);
    add_signal_metrics(res, "ma", err_ma);
    add_signal_metrics(res, "afr", err_afr);
    if (err_texh.empty())
        res.warnings.push_back("metrics: settle window is empty");
    return res;
}

} // namespace detail

inline ScenarioResult run_scenario(const Scenario& sc, const RunOptions& opt = {}) {
    sc.validate();
    Scenario local = sc;
    if (opt.settle_override)
        local.settle_skip_s = *opt.settle_override;
    return local.kind == ScenarioKind::engine ? detail::run_engine(local, opt)
                                              : detail::run_scalar(local, opt);
}

// ---------------------------------------------------------------------------
// Compensation A/B
// ---------------------------------------------------------------------------

/// Copy of `sc` with every loop's ADC compensation forced to `on`.
inline Scenario with_compensation(Scenario sc, bool on) {
    if (sc.kind == ScenarioKind::scalar) {
        sc.scalar.loop.control.adc_compensation = on;
    } else {
        sc.engine.texh.control.adc_compensation  = on;
        sc.engine.mdotf.control.adc_compensation = on;
        sc.engine.omega.control.adc_compensation = on;
        sc.engine.ma.control.adc_compensation    = on;
    }
    return sc;
}

struct AbResult {
    ScenarioResult baseline;    // compensation off
    ScenarioResult compensated; // compensation on
};

/// Run the A/B pair. Both variants are derived from the same scenario and
/// verified to agree on every other field before anything executes.
inline AbResult run_ab(const Scenario& sc, const RunOptions& opt = {}) {
    const Scenario base = with_compensation(sc, false);
    const Scenario comp = with_compensation(sc, true);
    if (canonical_dump(base, /*mask_compensation=*/true) !=
        canonical_dump(comp, /*mask_compensation=*/true))
        throw InvariantViolation("ab: variants differ beyond the compensation flags");

    AbResult r;
    r.baseline    = run_scenario(base, opt);
    r.compensated = run_scenario(comp, opt);
    const bool adc_on =
        sc.kind == ScenarioKind::engine ? sc.engine.adc_enabled : sc.scalar.adc_enabled;
    if (!adc_on) {
        r.baseline.warnings.push_back("ab: ADC disabled, both variants are identical");
        r.compensated.warnings.push_back("ab: ADC disabled, both variants are identical");
    }
    return r;
}

} // namespace dsmc::sim
