#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <string>

#include "dsmc/sim/config.hpp"

using namespace dsmc;
using namespace dsmc::sim;
using Catch::Matchers::ContainsSubstring;

namespace {

const char* kScalarIni = R"(
# a scalar loop with an additive disturbance
[scenario]
name = demo
kind = scalar
duration_s = 4
sample_period_s = 0.02
settle_skip_s = 1
seed = 7
monitor_tolerance = 1e-10

[plant]
g = 1.5
drift_c0 = 1.0
drift_c1 = -0.5
x0 = 2.0

[injection]
mode = additive
alpha = 2.0

[loop]
rho = 0.9            # contraction per step
adapt = additive
kappa = 0.04
clamp_scale = 20

[trajectory]
kind = steps
points = 0:1, 2:2
dither = 0.0

[adc]
enabled = on
bits = 12
fsr = 8
range_min = -4
)";

const char* kEngineIni = R"(
[scenario]
name = rig
kind = engine
duration_s = 10
sample_period_s = 0.02
settle_skip_s = 5

[plant]
tau_e = 0.5
tau_f = 0.06
init_texh = 420
afi_points = 10:0.8, 14.7:1.0, 20:0.7

[injection]
texh_mode = additive
texh_alpha = 100
mdotf_mode = multiplicative
mdotf_beta = 0.85

[loops.texh]
rho = 0.5
adapt = additive
kappa = 0.05

[loops.mdotf]
rho = 0.6
adapt = multiplicative
rho_beta = 2.8e-6
beta0 = 0.5

[loops.omega]
rho = 0.5
actuator_min = 0
actuator_max = 0.012

[loops.ma]
rho = 0.5

[trajectory.texh]
kind = ramps
points = 0:400, 2:700, 10:700

[trajectory.omega]
kind = constant
points = 0:250

[trajectory.afr]
kind = constant
points = 0:14.7

[adc]
enabled = on

[adc.texh]
bits = 10
fsr = 1000

[adc.omega]
bits = 10
fsr = 1000

[adc.mdotf]
bits = 10
fsr = 0.003

[adc.ma]
bits = 10
fsr = 0.012
)";

} // namespace

TEST_CASE("scalar scenario loads every section") {
    const Scenario sc = load_scenario_text(kScalarIni);
    CHECK(sc.name == "demo");
    CHECK(sc.kind == ScenarioKind::scalar);
    CHECK(sc.duration_s == 4.0);
    CHECK(sc.settle_skip_s == 1.0);
    CHECK(sc.seed == 7);
    CHECK(sc.adaptation_update); // default
    CHECK(sc.monitor_tolerance == 1e-10);
    CHECK(sc.step_count() == 200);

    CHECK(sc.scalar.g == 1.5);
    CHECK(sc.scalar.drift_c0 == 1.0);
    CHECK(sc.scalar.drift_c1 == -0.5);
    CHECK(sc.scalar.x0 == 2.0);
    CHECK(sc.scalar.injection_mode == engine::UncertaintyMode::additive);
    CHECK(sc.scalar.alpha_true == 2.0);

    CHECK(sc.scalar.loop.control.rho == 0.9);
    CHECK(sc.scalar.loop.adapt == engine::AdaptMode::additive);
    CHECK(sc.scalar.loop.kappa == 0.04);
    CHECK(sc.scalar.loop.clamp_scale == 20.0);

    CHECK(sc.scalar.trajectory.kind == TrajectoryKind::steps);
    REQUIRE(sc.scalar.trajectory.points.size() == 2);
    CHECK(sc.scalar.trajectory.points[1].first == 2.0);
    CHECK(sc.scalar.trajectory.points[1].second == 2.0);

    CHECK(sc.scalar.adc_enabled);
    CHECK(sc.scalar.adc.bits == 12);
    CHECK(sc.scalar.adc.fsr == 8.0);
    CHECK(sc.scalar.adc.range_min == -4.0);
}

TEST_CASE("engine scenario loads loops, channels, and injections") {
    const Scenario sc = load_scenario_text(kEngineIni);
    CHECK(sc.kind == ScenarioKind::engine);
    const auto& e = sc.engine;

    CHECK(e.params.tau_e == 0.5);
    CHECK(e.initial.t_exh == 420.0);
    REQUIRE(e.params.afi_table.size() == 3);
    CHECK(e.params.afi_table[1].first == 14.7);

    CHECK(e.injection.texh_mode == engine::UncertaintyMode::additive);
    CHECK(e.injection.alpha_texh == 100.0);
    CHECK(e.injection.mdotf_mode == engine::UncertaintyMode::multiplicative);
    CHECK(e.injection.beta_mdotf == 0.85);
    CHECK(e.injection.omega_mode == engine::UncertaintyMode::none);

    CHECK(e.texh.adapt == engine::AdaptMode::additive);
    CHECK(e.texh.kappa == 0.05);
    CHECK(e.mdotf.adapt == engine::AdaptMode::multiplicative);
    CHECK(e.mdotf.rho_beta == 2.8e-6);
    CHECK(e.omega.control.limits.min == 0.0);
    CHECK(e.omega.control.limits.max == 0.012);
    CHECK(e.ma.control.rho == 0.5);

    CHECK(e.traj_texh.kind == TrajectoryKind::ramps);
    CHECK(e.traj_texh.points.size() == 3);
    CHECK(e.traj_omega.points[0].second == 250.0);
    CHECK(e.traj_afr.points[0].second == 14.7);

    CHECK(e.adc_enabled);
    CHECK(e.adc_texh.fsr == 1000.0);
    CHECK(e.adc_mdotf.fsr == 0.003);
    CHECK(e.adc_ma.fsr == 0.012);
}

TEST_CASE("unknown keys are rejected by name") {
    const std::string bad = std::string(kScalarIni) + "\n[loop]\nrho_typo = 1\n";
    // duplicate section header merges, so the unknown key lands in [loop]
    CHECK_THROWS_WITH(load_scenario_text(bad), ContainsSubstring("loop.rho_typo"));
}

TEST_CASE("config parse errors") {
    CHECK_THROWS_AS(load_scenario_text("[scenario]\nkind = engine\nkind = scalar\n"),
                    ConfigError); // duplicate key
    CHECK_THROWS_AS(load_scenario_text("kind = scalar\n"), ConfigError); // key outside section
    CHECK_THROWS_AS(load_scenario_text("[scenario\nkind = scalar\n"), ConfigError);
    CHECK_THROWS_AS(load_scenario_text("[scenario]\njust a line\n"), ConfigError);
    CHECK_THROWS_AS(load_scenario_text("[scenario]\nkind = planetary\n"), ConfigError);
    CHECK_THROWS_AS(load_scenario_text("[scenario]\n"), ConfigError); // kind required

    // bad values
    CHECK_THROWS_AS(load_scenario_text("[scenario]\nkind = scalar\nduration_s = soon\n"),
                    ConfigError);
    CHECK_THROWS_AS(load_scenario_text("[scenario]\nkind = scalar\nseed = -1\n"), ConfigError);
    CHECK_THROWS_AS(
        load_scenario_text("[scenario]\nkind = scalar\nadaptation_update = maybe\n"),
        ConfigError);

    // missing trajectory section
    CHECK_THROWS_WITH(load_scenario_text("[scenario]\nkind = scalar\n"),
                      ContainsSubstring("trajectory"));

    // malformed points
    CHECK_THROWS_AS(
        load_scenario_text("[scenario]\nkind = scalar\n[trajectory]\npoints = 0;1\n"),
        ConfigError);
}

TEST_CASE("whole-step grid is enforced") {
    const std::string text =
        "[scenario]\nkind = scalar\nduration_s = 0.03\nsample_period_s = 0.02\n"
        "[trajectory]\npoints = 0:1\n";
    CHECK_THROWS_WITH(load_scenario_text(text), ContainsSubstring("whole number of steps"));
}

TEST_CASE("inf parses for unbounded actuators") {
    const std::string text =
        "[scenario]\nkind = scalar\n[trajectory]\npoints = 0:1\n"
        "[loop]\nactuator_min = -inf\nactuator_max = inf\n";
    const Scenario sc = load_scenario_text(text);
    CHECK(std::isinf(sc.scalar.loop.control.limits.min));
    CHECK(sc.scalar.loop.control.limits.min < 0);
    CHECK(std::isinf(sc.scalar.loop.control.limits.max));
}

TEST_CASE("scenario file name falls back to the stem") {
    const std::string path = "config_stem_check.ini";
    {
        std::ofstream out(path);
        out << "[scenario]\nkind = scalar\n[trajectory]\npoints = 0:1\n";
    }
    const Scenario sc = load_scenario_file(path);
    CHECK(sc.name == "config_stem_check");
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_scenario_file("no_such_file.ini"), ConfigError);
}
