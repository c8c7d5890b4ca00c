#pragma once

// Discrete sliding-mode control for a scalar first-order loop
//
//     x(i+1) = x(i) + f(x(i)) * T + g * u(i) * T
//
// Surface s = x - x_d and reaching law s(i+1) = rho * s(i), 0 < rho < 1.
// Substituting the Euler model into the reaching law gives the control
//
//     u(i) = [ (rho - 1) x(i) - rho x_d(i) - f_hat T + x_d(i+1) ] / (g T)
//
// which is exact: with f_hat == f the closed loop contracts the surface by
// exactly rho each step, with no reaching phase and no chattering term.
//
// Measurement uncertainty enters through a second, virtual evaluation of
// the same control law at the uncertainty-shifted state ("ideal DSMC").
// The difference between the two commands is the propagated control
// uncertainty mu_u; the modified command subtracts mu_u scaled by the
// current surface, so the correction vanishes on the surface.

#include <cmath>
#include <functional>
#include <utility>

#include "dsmc/errors.hpp"

namespace dsmc {

/// Scalar plant model for one loop: drift f, input gain g, step T.
/// `f_eval` is the drift as a function of the loop's own state; cross
/// couplings are frozen into the closure by the caller.
struct SisoModel {
    std::function<double(double)> f_eval;
    double g = 1.0;
    double T = 0.02;
};

/// Per-step loop record: contraction rate and the reference samples the
/// control law uses. 0 < rho < 1.
struct LoopState {
    double rho      = 0.5;
    double s        = 0.0;
    double x_d_curr = 0.0;
    double x_d_next = 0.0;
};

/// Control-signal uncertainty from the dual evaluation, in input units.
struct PropagatedUncertainty {
    double mu_u = 0.0;
};

/// s = x - x_d.
inline double sliding_surface(double x, double x_d) {
    return x - x_d;
}

/// Equivalent control for reaching law s(i+1) = rho * s(i).
/// `f_hat` is the drift estimate evaluated at `x` by the caller.
inline double baseline_control(const SisoModel& m, double x, const LoopState& loop, double f_hat) {
    const double gT = m.g * m.T;
    if (gT == 0.0)
        throw ConfigError("core: baseline_control requires g * T != 0");
    return ((loop.rho - 1.0) * x - loop.rho * loop.x_d_curr - f_hat * m.T + loop.x_d_next) / gT;
}

/// Dual evaluation: run the same control law once at the measured state and
/// once at the uncertainty-shifted state x + mu_x (with the drift estimate
/// re-evaluated there), and return the command difference. Shares whatever
/// adaptive estimates `f_hat_of` has captured. mu_x == 0 gives exactly 0.
template <class DriftFn>
inline PropagatedUncertainty propagate_uncertainty(const SisoModel& m, const LoopState& loop,
                                                   double x_measured, double mu_x,
                                                   DriftFn&& f_hat_of) {
    const double u_measured = baseline_control(m, x_measured, loop, f_hat_of(x_measured));
    const double x_ideal    = x_measured + mu_x;
    const double u_ideal    = baseline_control(m, x_ideal, loop, f_hat_of(x_ideal));
    return PropagatedUncertainty{u_ideal - u_measured};
}

/// u_modified = u - mu_u * s. No saturation here; actuator limits are the
/// caller's concern.
inline double modified_control(double u, const PropagatedUncertainty& mu, double s) {
    return u - mu.mu_u * s;
}

/// One explicit-Euler step of the scalar plant with the *actual* drift.
inline double plant_euler_step(const SisoModel& m, double x, double u, double f_actual) {
    return x + f_actual * m.T + (m.g * m.T) * u;
}

} // namespace dsmc
