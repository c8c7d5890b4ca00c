#pragma once

// Four-state mean-value engine model for cold-start studies, explicit Euler:
//
//   T_exh(i+1)  = (1 - T/tau_e) T_exh + (T/tau_e)(7.5 Delta + 600) AFI
//   mdot_f(i+1) = mdot_f + (T/tau_f)(mdot_fc - mdot_f)
//   omega(i+1)  = omega + (T/J)(torque_gain m_a - T_loss)
//   m_a(i+1)    = m_a + (mdot_ai - mdot_ao) T
//
// with T_loss = 0.4 omega + 100 and cylinder outflow
// mdot_ao = k1 eta_vol m_a omega, eta_vol a bivariate quadratic in
// (m_a, omega). The constants here are surrogates with plausible scales:
// time constants and inertia give cold-start-like transients, torque_gain
// makes the indicated torque 30000 * m_a N*m, and the eta_vol coefficients
// keep eta in [0.62, 0.90] over the operating envelope
// (m_a in [0, 0.012] kg, omega in [50, 450] rad/s).
//
// Constant model uncertainty can be injected per state equation, either
// additive inside the drift bracket or multiplicative on the whole drift
// (exhaust-temperature and fuel loops only, mirroring the corresponding
// controller estimators).

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dsmc/errors.hpp"

namespace dsmc::engine {

/// Which uncertainty form a state equation carries.
enum class UncertaintyMode { none, additive, multiplicative };

struct EngineParams {
    double tau_e       = 0.5;     // exhaust-temperature time constant [s]
    double tau_f       = 0.06;    // fuel-film time constant [s]
    double inertia_j   = 0.2;     // crankshaft inertia [kg m^2]
    double afi_value   = 1.0;     // air/fuel influence factor (constant default)
    double torque_gain = 30000.0; // indicated torque per kg of cylinder air [N m/kg]

    // eta_vol = m_a^2 (k2 w^2 + k3 w + k4) + m_a (k5 w^2 + k6 w + k7)
    //           + k8 w^2 + k9 w + k10,  w = omega
    double k1  = 0.012;       // outflow scale [1/rad]
    double k2  = 0.0;
    double k3  = 0.0;
    double k4  = -50.0;
    double k5  = 0.0;
    double k6  = 0.0;
    double k7  = 2.0;
    double k8  = -4.915e-6;
    double k9  = 2.7524e-3;
    double k10 = 0.49466;

    /// Optional AFI as a function of AFR, piecewise linear over (afr, afi)
    /// breakpoints; empty means the constant afi_value is used everywhere.
    std::vector<std::pair<double, double>> afi_table;

    void validate() const {
        if (!(tau_e > 0.0) || !(tau_f > 0.0))
            throw ConfigError("engine: time constants must be > 0");
        if (!(inertia_j > 0.0))
            throw ConfigError("engine: inertia_j must be > 0");
        if (!(torque_gain > 0.0))
            throw ConfigError("engine: torque_gain must be > 0");
        if (!(afi_value > 0.0))
            throw ConfigError("engine: afi_value must be > 0");
        if (!(k1 > 0.0))
            throw ConfigError("engine: k1 must be > 0");
        for (std::size_t i = 1; i < afi_table.size(); ++i)
            if (!(afi_table[i].first > afi_table[i - 1].first))
                throw ConfigError("engine: afi_table breakpoints must be strictly increasing");
    }

    /// AFI at a given AFR: table lookup with clamped linear interpolation,
    /// or the constant when no table is configured.
    double afi_of(double afr) const {
        if (afi_table.empty())
            return afi_value;
        if (afr <= afi_table.front().first)
            return afi_table.front().second;
        if (afr >= afi_table.back().first)
            return afi_table.back().second;
        for (std::size_t i = 1; i < afi_table.size(); ++i) {
            if (afr <= afi_table[i].first) {
                const auto& [t0, v0] = afi_table[i - 1];
                const auto& [t1, v1] = afi_table[i];
                return v0 + (v1 - v0) * (afr - t0) / (t1 - t0);
            }
        }
        return afi_table.back().second;
    }
};

struct PlantState {
    double t_exh   = 400.0;  // exhaust temperature [K]
    double mdot_f  = 0.0005; // fuel mass flow into cylinder [kg/s]
    double omega_e = 80.0;   // crankshaft speed [rad/s]
    double m_a     = 0.004;  // air mass in manifold [kg]
};

struct PlantInputs {
    double delta_spark = 0.0; // spark advance relative to base [deg]
    double mdot_fc     = 0.0; // commanded fuel flow [kg/s]
    double mdot_ai     = 0.0; // throttle air flow into manifold [kg/s]
};

/// Injected constant uncertainty per state equation. Exactly one mode is
/// active per equation; the speed and air equations support only the
/// additive form (there is no multiplicative estimator for them).
struct UncertaintyInjection {
    UncertaintyMode texh_mode  = UncertaintyMode::none;
    double          alpha_texh = 0.0; // [K]
    double          beta_texh  = 1.0;

    UncertaintyMode mdotf_mode  = UncertaintyMode::none;
    double          alpha_mdotf = 0.0; // [kg/s]
    double          beta_mdotf  = 1.0;

    UncertaintyMode omega_mode  = UncertaintyMode::none;
    double          alpha_omega = 0.0; // [N m], torque-map error

    UncertaintyMode ma_mode  = UncertaintyMode::none;
    double          alpha_ma = 0.0; // [kg/s]

    void validate() const {
        if (omega_mode == UncertaintyMode::multiplicative ||
            ma_mode == UncertaintyMode::multiplicative)
            throw ConfigError("engine: speed/air equations support only additive injection");
    }
};

/// Friction and pumping losses [N m].
inline double torque_loss(double omega_e) {
    return 0.4 * omega_e + 100.0;
}

/// Volumetric efficiency at (m_a, omega).
inline double volumetric_efficiency(const EngineParams& p, double m_a, double omega_e) {
    const double w = omega_e;
    return m_a * m_a * (p.k2 * w * w + p.k3 * w + p.k4) +
           m_a * (p.k5 * w * w + p.k6 * w + p.k7) + p.k8 * w * w + p.k9 * w + p.k10;
}

/// Air mass flow out of the manifold into the cylinders [kg/s].
inline double cylinder_air_flow(const EngineParams& p, double m_a, double omega_e) {
    return p.k1 * volumetric_efficiency(p, m_a, omega_e) * m_a * omega_e;
}

/// Counters for physical-floor clamps applied during stepping.
struct StepEvents {
    long omega_clamps = 0;
    long ma_clamps    = 0;
};

/// Returns a human-readable warning when the step size is too coarse for
/// the fastest configured time constant, nothing otherwise.
inline std::optional<std::string> discretization_warning(const EngineParams& p, double T) {
    const double fastest = std::min(p.tau_e, p.tau_f);
    if (T >= fastest)
        return "engine: step " + std::to_string(T) + " s is not smaller than the fastest time constant " +
               std::to_string(fastest) + " s; the Euler model will be inaccurate";
    return std::nullopt;
}

/// One Euler step with injected uncertainty. Speed and air mass are floored
/// at zero (events counted); with no injection the update is exactly the
/// nominal recursion above.
inline PlantState step(const PlantState& s, const PlantInputs& in, const UncertaintyInjection& inj,
                       const EngineParams& p, double T, StepEvents* ev = nullptr) {
    inj.validate();
    const double mdot_ao = cylinder_air_flow(p, s.m_a, s.omega_e);
    const double afr     = s.mdot_f > 0.0 ? mdot_ao / s.mdot_f : 0.0;
    const double afi     = p.afi_of(afr);

    PlantState n;

    if (inj.texh_mode == UncertaintyMode::multiplicative) {
        n.t_exh = s.t_exh + T * (inj.beta_texh * ((600.0 * afi - s.t_exh) / p.tau_e)) +
                  (T / p.tau_e) * 7.5 * afi * in.delta_spark;
    } else {
        const double alpha = inj.texh_mode == UncertaintyMode::additive ? inj.alpha_texh : 0.0;
        n.t_exh = (1.0 - T / p.tau_e) * s.t_exh +
                  (T / p.tau_e) * (7.5 * in.delta_spark + 600.0) * afi + (T / p.tau_e) * alpha;
    }

    if (inj.mdotf_mode == UncertaintyMode::multiplicative) {
        n.mdot_f = s.mdot_f + T * (-(inj.beta_mdotf * s.mdot_f) / p.tau_f) +
                   (T / p.tau_f) * in.mdot_fc;
    } else {
        const double alpha = inj.mdotf_mode == UncertaintyMode::additive ? inj.alpha_mdotf : 0.0;
        n.mdot_f = s.mdot_f + (T / p.tau_f) * (in.mdot_fc - s.mdot_f - alpha);
    }

    {
        const double alpha = inj.omega_mode == UncertaintyMode::additive ? inj.alpha_omega : 0.0;
        const double t_e   = p.torque_gain * s.m_a - torque_loss(s.omega_e) - alpha;
        n.omega_e          = s.omega_e + (T / p.inertia_j) * t_e;
        if (n.omega_e < 0.0) {
            n.omega_e = 0.0;
            if (ev) ++ev->omega_clamps;
        }
    }

    {
        const double alpha = inj.ma_mode == UncertaintyMode::additive ? inj.alpha_ma : 0.0;
        n.m_a              = s.m_a + (in.mdot_ai - mdot_ao - alpha) * T;
        if (n.m_a < 0.0) {
            n.m_a = 0.0;
            if (ev) ++ev->ma_clamps;
        }
    }

    return n;
}

} // namespace dsmc::engine
