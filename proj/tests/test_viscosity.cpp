#include <catch2/catch_amalgamated.hpp>

#include "detflow/viscosity.hpp"
#include "oracles.hpp"

using namespace detflow;

TEST_CASE("closed-form cumulative viscosity matches quadrature") {
    const auto models = {
        ViscosityModel::constant(0.7),
        ViscosityModel::sinusoidal(1.0, 0.5, 1.0),
        ViscosityModel::sinusoidal(0.3, -0.4, 2.7),
        ViscosityModel::decay_to_floor(2.0, 0.5, 0.8),
    };
    for (const auto& m : models) {
        for (auto [s, t] : {std::pair{0.0, 3.0}, {0.4, 0.9}, {1.3, 7.2}}) {
            const double want =
                oracles::integrate([&](double z) { return m.value(z); }, s, t);
            REQUIRE(m.phi(s, t) == Catch::Approx(want).margin(1e-10));
        }
    }
    // the step profile by hand (quadrature oracles mis-handle the jumps)
    const auto pw = ViscosityModel::piecewise({0.0, 1.0, 2.5}, {1.0, 0.5, 2.0});
    REQUIRE(pw.phi(0.0, 3.0) == Catch::Approx(1.0 + 0.75 + 1.0).margin(1e-14));
    REQUIRE(pw.phi(0.4, 0.9) == Catch::Approx(0.5).margin(1e-14));
    REQUIRE(pw.phi(1.3, 7.2) == Catch::Approx(0.6 + 9.4).margin(1e-14));
}

TEST_CASE("certified bounds bracket the profile") {
    const auto m = ViscosityModel::sinusoidal(1.0, 0.5, 1.0);
    // long window reaches the global extrema
    auto [lo, hi] = m.bounds(0.0, 100.0);
    REQUIRE(lo == Catch::Approx(0.5).epsilon(1e-12));
    REQUIRE(hi == Catch::Approx(1.5).epsilon(1e-12));
    // short window away from the extrema stays between endpoint values
    auto [slo, shi] = m.bounds(0.1, 0.3);
    REQUIRE(slo == Catch::Approx(m.value(0.1)).epsilon(1e-12));
    REQUIRE(shi == Catch::Approx(m.value(0.3)).epsilon(1e-12));
    // window crossing the sine maximum picks up the interior extremum
    auto [xlo, xhi] = m.bounds(1.0, 2.0);
    REQUIRE(xhi == Catch::Approx(1.5).epsilon(1e-12));
    REQUIRE(xlo == Catch::Approx(std::min(m.value(1.0), m.value(2.0))).epsilon(1e-12));

    const auto pw = ViscosityModel::piecewise({0.0, 1.0, 2.0}, {1.0, 0.25, 3.0});
    auto [plo, phi_] = pw.bounds(0.5, 10.0);
    REQUIRE(plo == 0.25);
    REQUIRE(phi_ == 3.0);
    auto [qlo, qhi] = pw.bounds(2.5, 3.0);
    REQUIRE(qlo == 3.0);
    REQUIRE(qhi == 3.0);
}

TEST_CASE("nonpositive profiles are rejected") {
    REQUIRE_THROWS_AS(ViscosityModel::constant(0.0), ConfigError);
    REQUIRE_THROWS_AS(ViscosityModel::sinusoidal(1.0, 1.2, 1.0), ConfigError);
    REQUIRE_THROWS_AS(ViscosityModel::piecewise({0.0, 1.0}, {1.0, -0.5}), ConfigError);
}

TEST_CASE("kbar of a constant profile is the dissipation time") {
    for (double nu : {0.25, 1.0, 3.0}) {
        const auto m = ViscosityModel::constant(nu);
        const double horizon = 40.0 / nu;
        REQUIRE(m.kbar(1.0, horizon) == Catch::Approx(1.0 / nu).epsilon(1e-6));
    }
}

TEST_CASE("kbar of a sinusoidal profile matches nested quadrature") {
    const auto m = ViscosityModel::sinusoidal(1.0, 0.5, 1.0);
    const double horizon = 60.0;
    const double got = m.kbar(1.0, horizon);
    // oracle: evaluate int_0^t e^{-phi_s(t)} ds on a fine grid of t over the
    // trailing quarter, with phi from quadrature
    auto eval = [&](double t) {
        return oracles::integrate(
            [&](double s) {
                const double phi = oracles::integrate(
                    [&](double z) { return m.value(z); }, s, t, 1e-10);
                return std::exp(-phi);
            },
            std::max(0.0, t - 45.0), t, 1e-9);
    };
    double want = 0.0, t_best = horizon * 0.75;
    const double dt = horizon * 0.25 / 48.0;
    for (int it = 0; it <= 48; ++it) {
        const double t = horizon * 0.75 + dt * it;
        const double val = eval(t);
        if (val > want) {
            want = val;
            t_best = t;
        }
    }
    double a = t_best - dt, b = std::min(horizon, t_best + dt);
    for (int it = 0; it < 50 && b - a > 1e-10 * horizon; ++it) {
        const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
        if (eval(m1) < eval(m2)) a = m1;
        else b = m2;
    }
    want = std::max(want, eval(0.5 * (a + b)));
    REQUIRE(got == Catch::Approx(want).epsilon(1e-6));
}

TEST_CASE("kbar refuses horizons that have not decayed") {
    const auto m = ViscosityModel::constant(1.0);
    REQUIRE_THROWS_AS(m.kbar(1.0, 5.0), InsufficientHorizonError);
}

TEST_CASE("space-varying model exposes field bounds and rejects time ops") {
    const int n = 32;
    auto nu = ScalarField::from_function(
        n, [](double x, double) { return 1.0 + 0.1 * std::sin(x); });
    const auto m = ViscosityModel::space_varying(nu);
    auto [lo, hi] = m.bounds(0.0, 1.0);
    REQUIRE(lo == Catch::Approx(0.9).margin(1e-10));
    REQUIRE(hi == Catch::Approx(1.1).margin(1e-10));
    REQUIRE_THROWS_AS(m.phi(0.0, 1.0), PreconditionError);
    REQUIRE_THROWS_AS(m.kbar(1.0, 50.0), PreconditionError);
}

TEST_CASE("profile descriptions are stable") {
    REQUIRE(ViscosityModel::constant(1.0).describe() ==
            ViscosityModel::constant(1.0).describe());
    REQUIRE(ViscosityModel::sinusoidal(1.0, 0.5, 1.0).describe() !=
            ViscosityModel::constant(1.0).describe());
}
