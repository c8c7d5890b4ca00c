#pragma once

// Four decoupled SISO sliding-mode loops over the engine model, each built
// from the scalar pieces in core.hpp:
//
//   loop      state    input           g                nominal drift f_nom
//   texh      T_exh    Delta_spark     7.5 AFI / tau_e  (600 AFI - T_exh) / tau_e
//   mdotf     mdot_f   mdot_fc         1 / tau_f        -mdot_f / tau_f
//   omega     omega_e  m_a (desired)   gain / J         -T_loss / J
//   ma        m_a      mdot_ai         1                -mdot_ao
//
// Additive adaptation estimates the drift-level offset a in f = f_nom + a
// (state units per second), so f_hat = f_nom + a_hat uniformly; estimating
// inside the physical bracket instead would flip the sensitivity sign on
// the fuel, speed, and air loops and destabilize the a_hat update.
// Multiplicative adaptation estimates b in f = b f_nom, f_hat = b_hat f_nom.
//
// Cascade: the speed loop's command is a desired air mass, which becomes the
// air loop's reference (held for the lookahead sample: the next desired value
// is not known yet). The fuel reference comes from the desired air/fuel
// ratio applied to the desired cylinder air flow, evaluated from the speed
// loop's command and the desired speed. Execution order per step:
// speed -> air -> exhaust temperature -> fuel.
//
// Each loop runs the same per-step pipeline: surface and baseline command
// from the current estimates, dual-evaluation uncertainty propagation,
// adaptation update, then the uncertainty correction and actuator clamp.

#include <algorithm>
#include <cmath>
#include <limits>

#include "dsmc/adaptation.hpp"
#include "dsmc/adc.hpp"
#include "dsmc/core.hpp"
#include "dsmc/engine/plant.hpp"
#include "dsmc/errors.hpp"

namespace dsmc::engine {

enum class AdaptMode { none, additive, multiplicative };

struct ActuatorLimits {
    double min = -std::numeric_limits<double>::infinity();
    double max = std::numeric_limits<double>::infinity();
};

struct LoopConfig {
    double         rho              = 0.5;
    bool           adc_compensation = true;
    ActuatorLimits limits;

    void validate(const char* loop) const {
        if (!(rho > 0.0) || !(rho < 1.0))
            throw ConfigError(std::string("engine: rho must be in (0,1) for loop ") + loop);
        if (!(limits.min <= limits.max))
            throw ConfigError(std::string("engine: empty actuator range for loop ") + loop);
    }
};

/// Adaptation bundle for one loop. `update` pins the estimates when false
/// (the drift structure stays whatever `mode` says).
struct LoopAdaptation {
    AdaptMode                mode   = AdaptMode::none;
    bool                     update = true;
    AdditiveAdaptState       add;
    MultiplicativeAdaptState mult;

    double estimate() const {
        return mode == AdaptMode::multiplicative ? mult.beta_hat
               : mode == AdaptMode::additive     ? add.alpha_hat
                                                 : 0.0;
    }
    long clamp_events() const { return add.clamp_events + mult.clamp_events; }
};

/// Per-loop view of one control step, assembled by step_all.
struct LoopIo {
    double measured = 0.0; // post-ADC state
    double mu_x     = 0.0; // signed predicted measurement uncertainty
    double x_d_curr = 0.0;
    double x_d_next = 0.0;
};

struct LoopResult {
    double command  = 0.0; // final, after correction and clamp
    double s        = 0.0;
    double mu_u     = 0.0;
    double x_d_curr = 0.0;
    double x_d_next = 0.0;
};

namespace detail {

/// Shared per-loop pipeline; `f_hat_of` captures the loop's estimates.
template <class DriftFn>
LoopResult run_loop(const SisoModel& m, const LoopIo& io, const LoopConfig& cfg,
                    DriftFn&& f_hat_of) {
    LoopState loop;
    loop.rho      = cfg.rho;
    loop.s        = sliding_surface(io.measured, io.x_d_curr);
    loop.x_d_curr = io.x_d_curr;
    loop.x_d_next = io.x_d_next;

    const double u_base = baseline_control(m, io.measured, loop, f_hat_of(io.measured));
    const PropagatedUncertainty mu =
        propagate_uncertainty(m, loop, io.measured, io.mu_x, f_hat_of);

    LoopResult r;
    r.s        = loop.s;
    r.mu_u     = mu.mu_u;
    r.x_d_curr = io.x_d_curr;
    r.x_d_next = io.x_d_next;
    r.command  = cfg.adc_compensation ? modified_control(u_base, mu, loop.s) : u_base;
    r.command  = std::clamp(r.command, cfg.limits.min, cfg.limits.max);
    return r;
}

} // namespace detail

/// Spark command from the exhaust-temperature loop [deg].
inline LoopResult texh_control(const LoopIo& io, const LoopConfig& cfg, LoopAdaptation& ad,
                               const EngineParams& p, double T, double afi) {
    cfg.validate("texh");
    SisoModel m;
    m.g = 7.5 * afi / p.tau_e;
    m.T = T;
    auto f_hat = [&](double t_exh) {
        switch (ad.mode) {
        case AdaptMode::additive:
            return (600.0 * afi - t_exh) / p.tau_e + ad.add.alpha_hat;
        case AdaptMode::multiplicative:
            return ad.mult.beta_hat * ((600.0 * afi - t_exh) / p.tau_e);
        default:
            return (600.0 * afi - t_exh) / p.tau_e;
        }
    };
    LoopResult r = detail::run_loop(m, io, cfg, f_hat);
    if (ad.update) {
        if (ad.mode == AdaptMode::additive) {
            update_additive(ad.add, r.s, T);
        } else if (ad.mode == AdaptMode::multiplicative) {
            const double f_nominal = (600.0 * afi - io.measured) / p.tau_e;
            update_multiplicative(ad.mult, f_nominal, r.s, T);
        }
    }
    return r;
}

/// Fuel-flow command from the fuel loop [kg/s]. The caller provides the
/// desired fuel flow samples (desired air flow over desired AFR).
inline LoopResult fuel_control(const LoopIo& io, const LoopConfig& cfg, LoopAdaptation& ad,
                               const EngineParams& p, double T) {
    cfg.validate("mdotf");
    SisoModel m;
    m.g = 1.0 / p.tau_f;
    m.T = T;
    auto f_hat = [&](double mdot_f) {
        switch (ad.mode) {
        case AdaptMode::additive:
            return -(mdot_f) / p.tau_f + ad.add.alpha_hat;
        case AdaptMode::multiplicative:
            return ad.mult.beta_hat * (-(mdot_f) / p.tau_f);
        default:
            return -(mdot_f) / p.tau_f;
        }
    };
    LoopResult r = detail::run_loop(m, io, cfg, f_hat);
    if (ad.update) {
        if (ad.mode == AdaptMode::additive) {
            update_additive(ad.add, r.s, T);
        } else if (ad.mode == AdaptMode::multiplicative) {
            const double f_nominal = -(io.measured) / p.tau_f;
            update_multiplicative(ad.mult, f_nominal, r.s, T);
        }
    }
    return r;
}

/// Desired air mass from the speed loop [kg]. Additive adaptation only.
inline LoopResult speed_control(const LoopIo& io, const LoopConfig& cfg, LoopAdaptation& ad,
                                const EngineParams& p, double T) {
    cfg.validate("omega");
    if (ad.mode == AdaptMode::multiplicative)
        throw ConfigError("engine: speed loop has no multiplicative estimator");
    SisoModel m;
    m.g = p.torque_gain / p.inertia_j;
    m.T = T;
    auto f_hat = [&](double omega) {
        const double alpha = ad.mode == AdaptMode::additive ? ad.add.alpha_hat : 0.0;
        return -torque_loss(omega) / p.inertia_j + alpha;
    };
    LoopResult r = detail::run_loop(m, io, cfg, f_hat);
    if (ad.update && ad.mode == AdaptMode::additive)
        update_additive(ad.add, r.s, T);
    return r;
}

/// Throttle air-flow command from the air loop [kg/s]. Additive only.
/// `omega_measured` freezes the cross coupling inside the outflow model.
inline LoopResult airflow_control(const LoopIo& io, const LoopConfig& cfg, LoopAdaptation& ad,
                                  const EngineParams& p, double T, double omega_measured) {
    cfg.validate("ma");
    if (ad.mode == AdaptMode::multiplicative)
        throw ConfigError("engine: air loop has no multiplicative estimator");
    SisoModel m;
    m.g = 1.0;
    m.T = T;
    auto f_hat = [&](double m_a) {
        const double alpha = ad.mode == AdaptMode::additive ? ad.add.alpha_hat : 0.0;
        return -cylinder_air_flow(p, m_a, omega_measured) + alpha;
    };
    LoopResult r = detail::run_loop(m, io, cfg, f_hat);
    if (ad.update && ad.mode == AdaptMode::additive)
        update_additive(ad.add, r.s, T);
    return r;
}

// ---------------------------------------------------------------------------
// Whole-controller step
// ---------------------------------------------------------------------------

/// ADC front end for the four sensed states. With `enabled` false the
/// channels pass the analog values through and predict zero uncertainty.
struct EngineAdcBank {
    bool             enabled = true;
    AdcChannelConfig cfg_texh, cfg_mdotf, cfg_omega, cfg_ma;
    AdcChannelState  st_texh, st_mdotf, st_omega, st_ma;
};

/// Reference samples for the externally specified trajectories.
struct EngineTrajectorySamples {
    double texh_d       = 0.0;
    double texh_d_next  = 0.0;
    double omega_d      = 0.0;
    double omega_d_next = 0.0;
    double afr_d        = 14.7;
    double afr_d_next   = 14.7;
};

struct EngineLoopConfigs {
    LoopConfig texh, mdotf, omega, ma;
};

struct EngineAdaptBank {
    LoopAdaptation texh, mdotf, omega, ma;
};

/// Everything one control step produced, in loop order texh/mdotf/omega/ma
/// for the arrays.
struct ControllerOutputs {
    PlantInputs inputs;            // commands applied to the plant
    double      m_a_desired = 0.0; // the speed loop's command (air reference)
    double      mdot_ao_d   = 0.0; // desired cylinder air flow (fuel reference basis)
    double      measured[4]{};     // post-ADC states
    double      mu_x[4]{};
    double      s[4]{};
    double      mu_u[4]{};
    double      x_d[4]{};          // reference each loop used this step
    double      x_d_next[4]{};     // lookahead sample each loop used
    double      afi = 1.0;
};

namespace detail {

inline double sample_channel(bool enabled, double analog, AdcChannelState& st,
                             const AdcChannelConfig& cfg, double& mu_x_out) {
    if (!enabled) {
        mu_x_out = 0.0;
        return analog;
    }
    const double q = sample_and_hold(analog, st, cfg);
    mu_x_out       = predict_total_uncertainty(st, cfg).mu_total;
    return q;
}

} // namespace detail

/// Run all four loops for one step against the current analog state.
/// Mutates the ADC histories and the adaptation estimates.
inline ControllerOutputs step_all(const PlantState& analog, EngineAdcBank& adc,
                                  const EngineTrajectorySamples& traj,
                                  const EngineLoopConfigs& cfgs, EngineAdaptBank& adapt,
                                  const EngineParams& p, double T) {
    ControllerOutputs out;

    out.measured[0] = detail::sample_channel(adc.enabled, analog.t_exh, adc.st_texh, adc.cfg_texh, out.mu_x[0]);
    out.measured[1] = detail::sample_channel(adc.enabled, analog.mdot_f, adc.st_mdotf, adc.cfg_mdotf, out.mu_x[1]);
    out.measured[2] = detail::sample_channel(adc.enabled, analog.omega_e, adc.st_omega, adc.cfg_omega, out.mu_x[2]);
    out.measured[3] = detail::sample_channel(adc.enabled, analog.m_a, adc.st_ma, adc.cfg_ma, out.mu_x[3]);

    // AFI from the measured AFR when a table is configured, else constant.
    const double mdot_ao_meas = cylinder_air_flow(p, out.measured[3], out.measured[2]);
    const double afr_meas     = out.measured[1] > 0.0 ? mdot_ao_meas / out.measured[1] : 0.0;
    out.afi                   = p.afi_of(afr_meas);

    // Speed loop first: its command is the air loop's reference.
    LoopIo io_omega{out.measured[2], out.mu_x[2], traj.omega_d, traj.omega_d_next};
    LoopResult r_omega = speed_control(io_omega, cfgs.omega, adapt.omega, p, T);
    out.m_a_desired    = r_omega.command;

    // Air loop: reference held for the lookahead sample.
    LoopIo io_ma{out.measured[3], out.mu_x[3], out.m_a_desired, out.m_a_desired};
    LoopResult r_ma = airflow_control(io_ma, cfgs.ma, adapt.ma, p, T, out.measured[2]);

    LoopIo io_texh{out.measured[0], out.mu_x[0], traj.texh_d, traj.texh_d_next};
    LoopResult r_texh = texh_control(io_texh, cfgs.texh, adapt.texh, p, T, out.afi);

    // Fuel reference: desired cylinder air flow over desired AFR. The air
    // part is evaluated from desired quantities (speed command, desired
    // speed) and held; the AFR part has a real lookahead.
    if (!(traj.afr_d > 0.0) || !(traj.afr_d_next > 0.0))
        throw SignalError("engine: desired AFR must be > 0");
    out.mdot_ao_d             = cylinder_air_flow(p, out.m_a_desired, traj.omega_d);
    const double mdot_fd      = out.mdot_ao_d / traj.afr_d;
    const double mdot_fd_next = out.mdot_ao_d / traj.afr_d_next;
    LoopIo io_mdotf{out.measured[1], out.mu_x[1], mdot_fd, mdot_fd_next};
    LoopResult r_mdotf = fuel_control(io_mdotf, cfgs.mdotf, adapt.mdotf, p, T);

    out.inputs.delta_spark = r_texh.command;
    out.inputs.mdot_fc     = r_mdotf.command;
    out.inputs.mdot_ai     = r_ma.command;

    const LoopResult* rs[4] = {&r_texh, &r_mdotf, &r_omega, &r_ma};
    for (int k = 0; k < 4; ++k) {
        out.s[k]        = rs[k]->s;
        out.mu_u[k]     = rs[k]->mu_u;
        out.x_d[k]      = rs[k]->x_d_curr;
        out.x_d_next[k] = rs[k]->x_d_next;
    }
    return out;
}

} // namespace dsmc::engine
