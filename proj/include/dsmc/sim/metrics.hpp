#pragma once

// Tracking-error metrics over a settled window: mean absolute error and
// population standard deviation of the signed error.

#include <cmath>
#include <string>
#include <vector>

#include "dsmc/errors.hpp"

namespace dsmc::sim {

struct SignalMetrics {
    double mean_abs_error = 0.0;
    double std_error      = 0.0;
    long   count          = 0;
};

struct MetricsReport {
    std::vector<std::pair<std::string, SignalMetrics>> signals;

    const SignalMetrics* find(const std::string& name) const {
        for (const auto& [n, m] : signals)
            if (n == name)
                return &m;
        return nullptr;
    }
};

/// Metrics of one error sequence. Two-pass mean/variance; deterministic
/// for a given input order.
inline SignalMetrics compute_metrics(const std::vector<double>& errors) {
    if (errors.empty())
        throw ConfigError("metrics: empty window");
    double sum_abs = 0.0, sum = 0.0;
    for (double e : errors) {
        if (!std::isfinite(e))
            throw NumericError("metrics: non-finite error sample");
        sum_abs += std::abs(e);
        sum += e;
    }
    const double n    = static_cast<double>(errors.size());
    const double mean = sum / n;
    double ss         = 0.0;
    for (double e : errors) {
        const double d = e - mean;
        ss += d * d;
    }
    SignalMetrics m;
    m.mean_abs_error = sum_abs / n;
    m.std_error      = std::sqrt(ss / n);
    m.count          = errors.size();
    return m;
}

/// Positive when the compensated run beats the baseline.
inline double improvement_percent(double baseline, double compensated) {
    if (baseline == 0.0)
        throw ConfigError("metrics: baseline metric is zero, improvement undefined");
    return 100.0 * (baseline - compensated) / baseline;
}

} // namespace dsmc::sim
