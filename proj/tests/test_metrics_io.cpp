#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <limits>

#include "dsmc/sim/config.hpp"
#include "dsmc/sim/io.hpp"
#include "dsmc/sim/metrics.hpp"

using namespace dsmc;
using namespace dsmc::sim;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("error metrics: mean absolute and population deviation") {
    const auto m = compute_metrics({1.0, -1.0});
    CHECK(m.mean_abs_error == 1.0);
    CHECK(m.std_error == 1.0); // mean 0, spread 1
    CHECK(m.count == 2);

    const auto c = compute_metrics({2.0, 2.0, 2.0});
    CHECK(c.mean_abs_error == 2.0);
    CHECK(c.std_error == 0.0);

    CHECK_THROWS_AS(compute_metrics({}), ConfigError);
    CHECK_THROWS_AS(compute_metrics({1.0, std::numeric_limits<double>::infinity()}),
                    NumericError);
}

TEST_CASE("improvement percentage") {
    CHECK(improvement_percent(2.0, 1.0) == 50.0);
    CHECK(improvement_percent(2.0, 3.0) == -50.0);
    CHECK_THROWS_AS(improvement_percent(0.0, 1.0), ConfigError);
}

TEST_CASE("doubles survive the text round trip bit for bit") {
    const double cases[] = {0.0,    1.0 / 3.0, 1e-300, 1e300,  0.1,
                            -2.5e-7, 12345.6789, 5.0,   -0.125, 4503599627370497.0};
    for (double v : cases) {
        const double back = parse_double(format_double(v));
        REQUIRE(back == v);
    }
    CHECK(format_double(-0.0) == "-0");
    CHECK(std::signbit(parse_double("-0")));

    // empty cell convention for inactive values
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()).empty());
    CHECK(std::isnan(parse_double("")));
    CHECK_THROWS_AS(parse_double("abc"), ConfigError);
}

TEST_CASE("trace csv round trip preserves every cell") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    TraceTable   t;
    t.columns = {"t", "x", "est"};
    t.rows    = {{0.0, 1.5, nan}, {0.02, -0.3333333333333333, 2.0}, {0.04, 1e-17, nan}};

    const std::string path = "trace_roundtrip_check.csv";
    write_trace_csv(path, t);
    const TraceTable back = read_trace_csv(path);
    std::remove(path.c_str());

    REQUIRE(back.columns == t.columns);
    REQUIRE(back.rows.size() == t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        for (std::size_t j = 0; j < t.columns.size(); ++j) {
            const double a = t.rows[i][j], b = back.rows[i][j];
            if (std::isnan(a))
                REQUIRE(std::isnan(b));
            else
                REQUIRE(a == b);
        }
    }
    CHECK(back.column_index("est") == 2);
    CHECK_THROWS_AS(back.column_index("missing"), ConfigError);
}

TEST_CASE("metrics render to csv and json") {
    MetricsReport r;
    SignalMetrics m;
    m.mean_abs_error = 0.5;
    m.std_error      = 0.25;
    m.count          = 10;
    r.signals.emplace_back("x", m);

    CHECK(metrics_csv(r) == "signal,mean_abs_error,std_error,count\nx,0.5,0.25,10\n");

    const auto j = metrics_to_json(r);
    CHECK(j["x"]["mean_abs_error"] == 0.5);
    CHECK(j["x"]["count"] == 10);

    MetricsReport comp;
    SignalMetrics cm = m;
    cm.mean_abs_error = 0.25;
    cm.std_error      = 0.2;
    comp.signals.emplace_back("x", cm);

    const std::string ab = ab_metrics_csv(r, comp);
    CHECK_THAT(ab, ContainsSubstring("x,0.5,0.25,-50,0.25,0.2"));
}

TEST_CASE("canonical fingerprint isolates the compensation flags") {
    Scenario a;
    a.kind = ScenarioKind::scalar;
    a.scalar.trajectory.points = {{0.0, 1.0}};

    Scenario b = a;
    CHECK(canonical_dump(a) == canonical_dump(b));

    b.scalar.loop.control.adc_compensation = !a.scalar.loop.control.adc_compensation;
    CHECK(canonical_dump(a) != canonical_dump(b));
    CHECK(canonical_dump(a, true) == canonical_dump(b, true)); // masked: equal again

    b.scalar.loop.control.rho = 0.7;
    CHECK(canonical_dump(a, true) != canonical_dump(b, true)); // other diffs still show

    Scenario e1;
    e1.kind = ScenarioKind::engine;
    e1.engine.traj_texh.points  = {{0.0, 400.0}};
    e1.engine.traj_omega.points = {{0.0, 250.0}};
    e1.engine.traj_afr.points   = {{0.0, 14.7}};
    Scenario e2                 = e1;
    e2.engine.mdotf.control.adc_compensation = false;
    CHECK(canonical_dump(e1, true) == canonical_dump(e2, true));
    CHECK(canonical_dump(e1) != canonical_dump(e2));
    e2.engine.injection.alpha_texh = 1.0;
    CHECK(canonical_dump(e1, true) != canonical_dump(e2, true));
}
