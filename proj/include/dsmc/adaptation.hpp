#pragma once

// Online estimation of constant model uncertainty, driven by the sliding
// surface. Two forms:
//
//   additive        f_true = f_nominal + alpha,    alpha_hat(i+1) = alpha_hat(i) + T s(i) / kappa
//   multiplicative  f_true = beta * f_nominal,     beta_hat(i+1)  = beta_hat(i) + f_nominal s(i) T / rho_beta
//
// Both are the discrete gradient laws that make the first-order part of
// Delta V equal to -(1 - rho) s^2 for V = s^2/2 + kappa alpha_tilde^2/2
// (resp. rho_beta beta_tilde^2/2), with alpha_tilde = alpha - alpha_hat.
// The multiplicative law uses the *signed* nominal drift; flipping its sign
// makes Delta V indefinite.
//
// Estimates can be clamped to a configurable band as an anti-windup guard;
// clamp events are counted and are expected to be zero in a healthy run.

#include <cmath>
#include <limits>
#include <optional>

#include "dsmc/errors.hpp"

namespace dsmc {

/// State for the additive law. `alpha_true` is the injected truth where the
/// harness knows it (monitoring only); the update never reads it.
struct AdditiveAdaptState {
    double alpha_hat  = 0.0;
    double kappa      = 1.0;
    double alpha_true = 0.0;
    double clamp_lo   = -std::numeric_limits<double>::infinity();
    double clamp_hi   = std::numeric_limits<double>::infinity();
    long   clamp_events = 0;
};

/// State for the multiplicative law. beta converges to the plant's true
/// factor (1 when the plant is nominal).
struct MultiplicativeAdaptState {
    double beta_hat  = 0.5;
    double rho_beta  = 1.0;
    double beta_true = 1.0;
    double clamp_lo  = -std::numeric_limits<double>::infinity();
    double clamp_hi  = std::numeric_limits<double>::infinity();
    long   clamp_events = 0;
};

/// One Lyapunov monitor sample: V = s^2/2 + kappa alpha_tilde^2/2 and its
/// backward difference (0 for the first sample of a run).
struct LyapunovSample {
    double v           = 0.0;
    double delta_v     = 0.0;
    double s           = 0.0;
    double alpha_tilde = 0.0;
};

inline void detail_apply_clamp(double& value, double lo, double hi, long& events) {
    if (value < lo) { value = lo; ++events; }
    else if (value > hi) { value = hi; ++events; }
}

/// alpha_hat(i+1) = alpha_hat(i) + T s(i) / kappa. `s` is the surface the
/// controller actually used this step (post-ADC when sampling is active).
inline void update_additive(AdditiveAdaptState& st, double s, double T) {
    if (!(st.kappa > 0.0))
        throw ConfigError("adaptation: kappa must be > 0");
    st.alpha_hat += T * s / st.kappa;
    detail_apply_clamp(st.alpha_hat, st.clamp_lo, st.clamp_hi, st.clamp_events);
}

/// beta_hat(i+1) = beta_hat(i) + f_nominal s(i) T / rho_beta, signed f.
inline void update_multiplicative(MultiplicativeAdaptState& st, double f_nominal, double s,
                                  double T) {
    if (!(st.rho_beta > 0.0))
        throw ConfigError("adaptation: rho_beta must be > 0");
    st.beta_hat += f_nominal * s * T / st.rho_beta;
    detail_apply_clamp(st.beta_hat, st.clamp_lo, st.clamp_hi, st.clamp_events);
}

/// Closed-loop surface recursion under additive mismatch:
/// s(i+1) = rho s(i) + T alpha_tilde(i).
inline double surface_error_dynamics(double s, double alpha_tilde, double rho, double T) {
    return rho * s + T * alpha_tilde;
}

/// Build one monitor sample; chains delta_v off the previous sample.
inline LyapunovSample lyapunov_sample(double s, double alpha_tilde, double kappa,
                                      const std::optional<LyapunovSample>& prev = std::nullopt) {
    if (!(kappa > 0.0))
        throw ConfigError("adaptation: kappa must be > 0");
    LyapunovSample out;
    out.s           = s;
    out.alpha_tilde = alpha_tilde;
    out.v           = 0.5 * s * s + 0.5 * kappa * alpha_tilde * alpha_tilde;
    out.delta_v     = prev ? out.v - prev->v : 0.0;
    return out;
}

} // namespace dsmc
