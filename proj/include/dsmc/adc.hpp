#pragma once

// Sample-and-hold ADC model with online uncertainty prediction.
//
// A measured signal differs from the underlying analog signal for two
// reasons the controller can reason about at runtime:
//   - sampling: the signal keeps moving between two sample instants, and
//     the best causal estimate of that motion is the last observed
//     first difference x(i) - x(i-1);
//   - quantization: a uniform n-bit converter over a full-scale range
//     contributes at most half an LSB, fsr / 2^(n+1).
// Both terms are carried *signed* so a falling signal produces a negative
// total. The sum feeds the control-uncertainty propagation in core.hpp.

#include <algorithm>
#include <cmath>
#include <string>

#include "dsmc/errors.hpp"

namespace dsmc {

/// One converter channel. `fsr` is the full-scale range spanned above
/// `range_min`; the quantization grid has step fsr / 2^bits anchored at
/// range_min, and conversions clamp to [range_min, range_min + fsr].
struct AdcChannelConfig {
    double sample_period_s = 0.02;
    int    bits            = 10;
    double fsr             = 1.0;
    double range_min       = 0.0;

    void validate() const {
        if (!(sample_period_s > 0.0))
            throw ConfigError("adc: sample_period_s must be > 0");
        if (bits < 1 || bits > 52)
            throw ConfigError("adc: bits must be in [1, 52]");
        if (!(fsr > 0.0))
            throw ConfigError("adc: fsr must be > 0");
        if (!std::isfinite(range_min))
            throw ConfigError("adc: range_min must be finite");
    }
};

/// Two-sample history of one channel. `initialized` means prev_sample holds
/// a real earlier conversion; until then the slope prediction is zero.
struct AdcChannelState {
    double prev_sample = 0.0;
    double curr_sample = 0.0;
    bool   initialized = false;
};

/// Signed uncertainty prediction for the current step.
struct MeasuredUncertainty {
    double mu_sampling     = 0.0;
    double mu_quantization = 0.0;
    double mu_total        = 0.0; // mu_sampling + mu_quantization
};

/// Quantization grid step, fsr / 2^bits. Exact: power-of-two scaling.
inline double quantizer_step(const AdcChannelConfig& cfg) {
    return std::ldexp(cfg.fsr, -cfg.bits);
}

/// Half-LSB quantization uncertainty bound, fsr / 2^(bits+1).
inline double quantization_uncertainty(const AdcChannelConfig& cfg) {
    cfg.validate();
    return std::ldexp(cfg.fsr, -(cfg.bits + 1));
}

/// Convert one analog value: snap to the grid (ties round away from zero,
/// like std::round) and clamp to the converter range. Idempotent.
inline double quantize(double value, const AdcChannelConfig& cfg) {
    cfg.validate();
    if (!std::isfinite(value))
        throw SignalError("adc: quantize received a non-finite input");
    const double step  = quantizer_step(cfg);
    const double level = std::round((value - cfg.range_min) / step);
    const double q     = cfg.range_min + level * step;
    return std::clamp(q, cfg.range_min, cfg.range_min + cfg.fsr);
}

/// Convert `analog`, pushing the previous conversion into the history.
/// The first call seeds both history slots so the slope starts at zero.
inline double sample_and_hold(double analog, AdcChannelState& st, const AdcChannelConfig& cfg) {
    const double q = quantize(analog, cfg);
    if (!st.initialized) {
        st.prev_sample = q;
        st.initialized = true;
    } else {
        st.prev_sample = st.curr_sample;
    }
    st.curr_sample = q;
    return q;
}

/// Slope-based sampling-uncertainty prediction: the last first difference
/// of the held samples. The period cancels (rate * T = difference), so the
/// config is taken only for interface symmetry. Zero before two samples.
inline double predict_sampling_uncertainty(const AdcChannelState& st,
                                           const AdcChannelConfig& /*cfg*/) {
    if (!st.initialized)
        return 0.0;
    return st.curr_sample - st.prev_sample;
}

/// Total predicted measurement uncertainty for the current step, signed.
inline MeasuredUncertainty predict_total_uncertainty(const AdcChannelState& st,
                                                     const AdcChannelConfig& cfg) {
    MeasuredUncertainty u;
    u.mu_sampling     = predict_sampling_uncertainty(st, cfg);
    u.mu_quantization = quantization_uncertainty(cfg);
    u.mu_total        = u.mu_sampling + u.mu_quantization;
    return u;
}

} // namespace dsmc
