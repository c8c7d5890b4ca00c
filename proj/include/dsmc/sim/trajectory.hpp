#pragma once

// Desired-value trajectories on the controller's step grid. Three kinds:
// a constant, a piecewise-constant step sequence, and a piecewise-linear
// ramp sequence. Breakpoint times are in seconds, strictly increasing,
// starting at 0; evaluation uses exact comparisons against t = i * T, so
// breakpoints should sit on the step grid.
//
// An optional dither adds a deterministic, seed-derived perturbation per
// step index (not per wall time), so the lookahead sample at step i equals
// the current sample at step i+1 bit-for-bit.

#include <cstdint>
#include <utility>
#include <vector>

#include "dsmc/errors.hpp"

namespace dsmc::sim {

enum class TrajectoryKind { constant, steps, ramps };

struct TrajectorySpec {
    TrajectoryKind kind = TrajectoryKind::constant;
    std::vector<std::pair<double, double>> points; // (t [s], value)
    double dither_amplitude = 0.0;

    void validate() const {
        if (points.empty())
            throw ConfigError("trajectory: needs at least one (t, value) point");
        if (points.front().first != 0.0)
            throw ConfigError("trajectory: first breakpoint must be at t = 0");
        for (std::size_t i = 1; i < points.size(); ++i)
            if (!(points[i].first > points[i - 1].first))
                throw ConfigError("trajectory: breakpoint times must be strictly increasing");
        if (dither_amplitude < 0.0)
            throw ConfigError("trajectory: dither_amplitude must be >= 0");
    }
};

/// Base value at time t (no dither).
inline double trajectory_value(const TrajectorySpec& spec, double t) {
    const auto& pts = spec.points;
    switch (spec.kind) {
    case TrajectoryKind::constant:
        return pts.front().second;
    case TrajectoryKind::steps: {
        double v = pts.front().second;
        for (const auto& [bt, bv] : pts) {
            if (bt <= t)
                v = bv;
            else
                break;
        }
        return v;
    }
    case TrajectoryKind::ramps: {
        if (t <= pts.front().first)
            return pts.front().second;
        if (t >= pts.back().first)
            return pts.back().second;
        for (std::size_t i = 1; i < pts.size(); ++i) {
            if (t <= pts[i].first) {
                const auto& [t0, v0] = pts[i - 1];
                const auto& [t1, v1] = pts[i];
                return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
            }
        }
        return pts.back().second;
    }
    }
    return pts.front().second;
}

namespace detail {

// splitmix64; gives each (seed, channel, step) an independent 64-bit word.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline double unit_noise(std::uint64_t seed, std::uint64_t channel, std::uint64_t step) {
    const std::uint64_t w = mix64(mix64(seed ^ (channel * 0x100000001b3ull)) ^ step);
    // 53 mantissa bits -> [0, 1), then centered.
    return static_cast<double>(w >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

} // namespace detail

/// Value at step index i (t = i * T), dithered when the spec asks for it.
inline double trajectory_sample(const TrajectorySpec& spec, std::uint64_t seed,
                                std::uint64_t channel, std::uint64_t step, double T) {
    const double base = trajectory_value(spec, static_cast<double>(step) * T);
    if (spec.dither_amplitude == 0.0)
        return base;
    return base + spec.dither_amplitude * detail::unit_noise(seed, channel, step);
}

} // namespace dsmc::sim
