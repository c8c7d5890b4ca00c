#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dsmc/sim/trajectory.hpp"

using namespace dsmc::sim;
using Catch::Matchers::WithinRel;

TEST_CASE("constant trajectory") {
    TrajectorySpec t;
    t.points = {{0.0, 5.0}};
    t.validate();
    CHECK(trajectory_value(t, 0.0) == 5.0);
    CHECK(trajectory_value(t, 123.4) == 5.0);
}

TEST_CASE("step trajectory holds the last breakpoint value") {
    TrajectorySpec t;
    t.kind   = TrajectoryKind::steps;
    t.points = {{0.0, 50.0}, {2.0, 800.0}, {6.0, 300.0}};
    t.validate();
    CHECK(trajectory_value(t, 0.0) == 50.0);
    CHECK(trajectory_value(t, 1.98) == 50.0);
    CHECK(trajectory_value(t, 2.0) == 800.0);
    CHECK(trajectory_value(t, 5.0) == 800.0);
    CHECK(trajectory_value(t, 6.0) == 300.0);
    CHECK(trajectory_value(t, 1e6) == 300.0);
}

TEST_CASE("ramp trajectory interpolates and clamps at the ends") {
    TrajectorySpec t;
    t.kind   = TrajectoryKind::ramps;
    t.points = {{0.0, 0.0}, {2.0, 100.0}, {4.0, 100.0}};
    t.validate();
    CHECK(trajectory_value(t, 0.0) == 0.0);
    CHECK_THAT(trajectory_value(t, 0.5), WithinRel(25.0, 1e-14));
    CHECK_THAT(trajectory_value(t, 1.0), WithinRel(50.0, 1e-14));
    CHECK(trajectory_value(t, 2.0) == 100.0);
    CHECK(trajectory_value(t, 3.0) == 100.0);
    CHECK(trajectory_value(t, 9.0) == 100.0);
}

TEST_CASE("dither is deterministic, bounded, and consistent across lookahead") {
    TrajectorySpec t;
    t.points           = {{0.0, 10.0}};
    t.dither_amplitude = 0.3;
    t.validate();

    const double T = 0.02;
    for (long i = 0; i < 1000; ++i) {
        const double now   = trajectory_sample(t, 42, 1, i, T);
        const double again = trajectory_sample(t, 42, 1, i, T);
        REQUIRE(now == again);
        REQUIRE(std::abs(now - 10.0) <= 0.3);

        // the lookahead taken at step i equals the sample taken at step i+1
        const double ahead = trajectory_sample(t, 42, 1, i + 1, T);
        const double next  = trajectory_sample(t, 42, 1, i + 1, T);
        REQUIRE(ahead == next);
    }

    // different seeds and channels decorrelate
    CHECK(trajectory_sample(t, 42, 1, 7, T) != trajectory_sample(t, 43, 1, 7, T));
    CHECK(trajectory_sample(t, 42, 1, 7, T) != trajectory_sample(t, 42, 2, 7, T));

    // zero amplitude reproduces the base value exactly
    t.dither_amplitude = 0.0;
    CHECK(trajectory_sample(t, 42, 1, 7, T) == 10.0);
}

TEST_CASE("trajectory validation") {
    TrajectorySpec t;
    CHECK_THROWS_AS(t.validate(), dsmc::ConfigError); // no points

    t.points = {{1.0, 0.0}};
    CHECK_THROWS_AS(t.validate(), dsmc::ConfigError); // must start at 0

    t.points = {{0.0, 0.0}, {2.0, 1.0}, {2.0, 2.0}};
    CHECK_THROWS_AS(t.validate(), dsmc::ConfigError); // strictly increasing

    t.points           = {{0.0, 0.0}};
    t.dither_amplitude = -0.1;
    CHECK_THROWS_AS(t.validate(), dsmc::ConfigError);
}
