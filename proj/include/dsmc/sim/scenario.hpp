#pragma once

// Scenario descriptions: everything a run needs, resolved from a config
// file or built programmatically. Two kinds share the envelope:
//
//   scalar  one first-order loop with affine drift f(x) = c0 + c1 x,
//           for studying the control/adaptation identities in isolation;
//   engine  the four-state model with its four cascaded loops.

#include <cstdint>
#include <limits>
#include <string>

#include "dsmc/adc.hpp"
#include "dsmc/engine/control.hpp"
#include "dsmc/engine/plant.hpp"
#include "dsmc/sim/trajectory.hpp"

namespace dsmc::sim {

enum class ScenarioKind { scalar, engine };

/// Per-loop setup: control parameters plus adaptation configuration.
struct LoopSetup {
    engine::LoopConfig control;                         // rho, compensation, limits
    engine::AdaptMode  adapt = engine::AdaptMode::none;
    double kappa    = 1.0;   // additive gain
    double rho_beta = 1.0;   // multiplicative gain
    double alpha0   = 0.0;   // initial additive estimate
    double beta0    = 0.5;   // initial multiplicative estimate
    // Anti-windup band: +/- clamp_scale * max(|true value|, for beta also 1).
    // <= 0 disables clamping.
    double clamp_scale = 10.0;
};

struct ScalarScenario {
    double g        = 1.0;
    double drift_c0 = 0.0;
    double drift_c1 = 0.0;
    double x0       = 0.0;

    engine::UncertaintyMode injection_mode = engine::UncertaintyMode::none;
    double alpha_true = 0.0;
    double beta_true  = 1.0;

    LoopSetup        loop;
    TrajectorySpec   trajectory;
    bool             adc_enabled = false;
    AdcChannelConfig adc;
};

struct EngineScenario {
    engine::EngineParams          params;
    engine::PlantState            initial;
    engine::UncertaintyInjection  injection;

    LoopSetup texh, mdotf, omega, ma;

    TrajectorySpec traj_texh;
    TrajectorySpec traj_omega;
    TrajectorySpec traj_afr;

    bool             adc_enabled = true;
    AdcChannelConfig adc_texh, adc_mdotf, adc_omega, adc_ma;
};

struct Scenario {
    std::string  name = "scenario";
    ScenarioKind kind = ScenarioKind::scalar;

    double        duration_s      = 10.0;
    double        sample_period_s = 0.02;
    double        settle_skip_s   = 5.0;
    std::uint64_t seed            = 0;

    /// False pins every adaptive estimate at its initial value.
    bool adaptation_update = true;

    /// Tolerance for the Lyapunov-identity residual monitor (active on
    /// additive loops with known injected truth). Infinity means the
    /// monitor only reports; a finite value turns excesses into counted
    /// violations (fatal under --strict-invariants).
    double monitor_tolerance = std::numeric_limits<double>::infinity();

    ScalarScenario scalar;
    EngineScenario engine;

    /// Number of whole steps in the run. The duration must sit on the grid.
    long step_count() const {
        const double raw = duration_s / sample_period_s;
        const long   n   = static_cast<long>(raw + 0.5);
        if (!(sample_period_s > 0.0))
            throw ConfigError("scenario: sample_period_s must be > 0");
        if (n < 0 || std::abs(raw - static_cast<double>(n)) > 1e-9)
            throw ConfigError("scenario: duration_s must be a whole number of steps");
        return n;
    }

    void validate() const {
        step_count();
        if (settle_skip_s < 0.0)
            throw ConfigError("scenario: settle_skip_s must be >= 0");
        if (kind == ScenarioKind::engine) {
            engine.params.validate();
            engine.injection.validate();
            engine.traj_texh.validate();
            engine.traj_omega.validate();
            engine.traj_afr.validate();
            engine.texh.control.validate("texh");
            engine.mdotf.control.validate("mdotf");
            engine.omega.control.validate("omega");
            engine.ma.control.validate("ma");
            if (engine.omega.adapt == engine::AdaptMode::multiplicative ||
                engine.ma.adapt == engine::AdaptMode::multiplicative)
                throw ConfigError("scenario: speed/air loops support only additive adaptation");
            if (engine.adc_enabled) {
                engine.adc_texh.validate();
                engine.adc_mdotf.validate();
                engine.adc_omega.validate();
                engine.adc_ma.validate();
            }
        } else {
            scalar.loop.control.validate("scalar");
            scalar.trajectory.validate();
            if (scalar.adc_enabled)
                scalar.adc.validate();
            if (scalar.g == 0.0)
                throw ConfigError("scenario: scalar g must be nonzero");
        }
    }
};

} // namespace dsmc::sim
