#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <optional>

#include "dsmc/adaptation.hpp"

using namespace dsmc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("additive update moves by T s / kappa") {
    AdditiveAdaptState st;
    st.kappa = 0.5;
    update_additive(st, 1.0, 0.02);
    CHECK_THAT(st.alpha_hat, WithinRel(0.04, 1e-15));
    update_additive(st, -1.0, 0.02);
    CHECK_THAT(st.alpha_hat, WithinAbs(0.0, 1e-15));

    st.kappa = 0.0;
    CHECK_THROWS_AS(update_additive(st, 1.0, 0.02), ConfigError);
}

TEST_CASE("multiplicative update uses the signed nominal drift") {
    MultiplicativeAdaptState st;
    st.beta_hat = 0.5;
    st.rho_beta = 2.0;
    update_multiplicative(st, -3.0, 0.5, 0.02);
    CHECK_THAT(st.beta_hat, WithinRel(0.485, 1e-14)); // negative drift, positive s: down

    update_multiplicative(st, 3.0, 0.5, 0.02);
    CHECK_THAT(st.beta_hat, WithinRel(0.5, 1e-14)); // sign flip undoes it

    st.rho_beta = -1.0;
    CHECK_THROWS_AS(update_multiplicative(st, 1.0, 1.0, 0.02), ConfigError);
}

TEST_CASE("estimate clamps pin the value and count events") {
    AdditiveAdaptState st;
    st.kappa    = 0.01;
    st.clamp_lo = -0.1;
    st.clamp_hi = 0.1;
    update_additive(st, 1.0, 0.02); // raw step would be +2
    CHECK(st.alpha_hat == 0.1);
    CHECK(st.clamp_events == 1);
    update_additive(st, -1.0, 0.02);
    CHECK(st.alpha_hat == -0.1);
    CHECK(st.clamp_events == 2);
    update_additive(st, 0.0, 0.02);
    CHECK(st.clamp_events == 2);
}

TEST_CASE("surface error dynamics and the monitor sample") {
    CHECK_THAT(surface_error_dynamics(1.0, 2.0, 0.5, 0.02), WithinRel(0.54, 1e-15));

    const auto first = lyapunov_sample(1.0, 2.0, 1.0);
    CHECK(first.v == 2.5);
    CHECK(first.delta_v == 0.0);

    const auto second = lyapunov_sample(0.5, 1.0, 1.0, first);
    CHECK(second.v == 0.625);
    CHECK_THAT(second.delta_v, WithinRel(-1.875, 1e-15));

    CHECK_THROWS_AS(lyapunov_sample(1.0, 1.0, 0.0), ConfigError);
}

TEST_CASE("estimator converges and the exact decrement identity holds") {
    const double rho = 0.9, T = 0.02, kappa = 0.04, alpha = 2.0;

    AdditiveAdaptState st;
    st.kappa = kappa;

    double                        s = 1.0;
    std::optional<LyapunovSample> prev;
    double                        max_resid = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const double tilde = alpha - st.alpha_hat;
        const auto   samp  = lyapunov_sample(s, tilde, kappa, prev);
        if (prev) {
            const double ds = samp.s - prev->s;
            const double da = samp.alpha_tilde - prev->alpha_tilde;
            const double expected =
                -(1.0 - rho) * prev->s * prev->s + 0.5 * ds * ds + 0.5 * kappa * da * da;
            const double scale = std::max({samp.v, prev->v, prev->s * prev->s, 1e-12});
            max_resid = std::max(max_resid, std::abs(samp.delta_v - expected) / scale);
        }
        prev = samp;

        const double s_next = surface_error_dynamics(s, tilde, rho, T);
        update_additive(st, s, T);
        s = s_next;
    }
    CHECK(max_resid <= 1e-10);
    CHECK_THAT(st.alpha_hat, WithinAbs(alpha, 1e-6));
    CHECK(std::abs(s) < 1e-9);
    CHECK(st.clamp_events == 0);
}

TEST_CASE("first-order decrement is nonpositive along the estimator run") {
    // dv - (ds^2/2 + kappa da^2/2) = -(1-rho) s^2 <= 0, every step
    const double rho = 0.6, T = 0.02, kappa = 0.02;

    AdditiveAdaptState st;
    st.kappa = kappa;

    double                        s = -3.0;
    std::optional<LyapunovSample> prev;
    for (int i = 0; i < 500; ++i) {
        const double tilde = 1.5 - st.alpha_hat;
        const auto   samp  = lyapunov_sample(s, tilde, kappa, prev);
        if (prev) {
            const double ds = samp.s - prev->s;
            const double da = samp.alpha_tilde - prev->alpha_tilde;
            const double first_order = samp.delta_v - 0.5 * ds * ds - 0.5 * kappa * da * da;
            REQUIRE(first_order <= 1e-12 * std::max(1.0, prev->s * prev->s));
        }
        prev = samp;
        const double s_next = surface_error_dynamics(s, tilde, rho, T);
        update_additive(st, s, T);
        s = s_next;
    }
}
