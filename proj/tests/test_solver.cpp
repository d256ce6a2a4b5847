#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "detflow/solver.hpp"

using namespace detflow;

namespace {

double final_h(SolverConfig cfg) {
    Stepper st(cfg);
    const long nsteps = std::lround(cfg.t_end / cfg.dt);
    for (long k = 0; k < nsteps; ++k) st.step();
    return compute_norms(st.state()).h_norm;
}

}  // namespace

TEST_CASE("viscous single-mode decay converges at second order") {
    SolverConfig cfg;
    cfg.resolution = 32;
    cfg.t_end = 1.0;
    cfg.viscosity = ViscosityModel::constant(0.4);
    cfg.initial.kind = InitialSpec::Kind::SingleMode;
    cfg.initial.kx = 2;
    cfg.initial.ky = 1;
    cfg.initial.amplitude = 1.0;
    const double k2 = 5.0;
    const double exact = 1.0 / std::sqrt(2.0) * std::exp(-0.4 * k2 * cfg.t_end);
    double prev_err = 0.0;
    std::vector<double> errs;
    for (double dt : {0.02, 0.01, 0.005}) {
        cfg.dt = dt;
        errs.push_back(std::abs(final_h(cfg) - exact));
    }
    REQUIRE(errs[0] / errs[1] == Catch::Approx(4.0).epsilon(0.3));
    REQUIRE(errs[1] / errs[2] == Catch::Approx(4.0).epsilon(0.3));
    (void)prev_err;
}

TEST_CASE("taylor-green vortex decays exactly through the nonlinear term") {
    SolverConfig cfg;
    cfg.resolution = 32;
    cfg.t_end = 1.0;
    cfg.viscosity = ViscosityModel::constant(0.1);
    cfg.initial.kind = InitialSpec::Kind::TaylorGreen;
    cfg.initial.amplitude = 1.0;
    const double exact = std::exp(-2.0 * 0.1 * cfg.t_end) / std::sqrt(2.0);
    std::vector<double> errs;
    for (double dt : {0.02, 0.01, 0.005}) {
        cfg.dt = dt;
        errs.push_back(std::abs(final_h(cfg) - exact));
    }
    REQUIRE(errs[0] / errs[1] == Catch::Approx(4.0).epsilon(0.3));
    REQUIRE(errs[1] / errs[2] == Catch::Approx(4.0).epsilon(0.3));
}

TEST_CASE("laminar response to steady shear forcing is an exact fixed point") {
    SolverConfig cfg;
    cfg.resolution = 32;
    cfg.dt = 0.01;
    cfg.t_end = 40.0;
    cfg.viscosity = ViscosityModel::constant(1.0);
    cfg.forcing.kind = ForcingSpec::Kind::Kolmogorov;
    cfg.forcing.amplitude = 1.0;
    cfg.forcing.kf = 1;
    cfg.initial.kind = InitialSpec::Kind::Zero;
    const double h_lam = 1.0 / std::sqrt(2.0);
    REQUIRE(final_h(cfg) == Catch::Approx(h_lam).margin(1e-10));

    // once on the fixed point, a long continuation stays within round-off
    Stepper st(cfg);
    for (long k = 0; k < 4000; ++k) st.step();
    const double h1 = compute_norms(st.state()).h_norm;
    for (long k = 0; k < 2000; ++k) st.step();
    REQUIRE(compute_norms(st.state()).h_norm == Catch::Approx(h1).margin(1e-12));
}

TEST_CASE("time-varying viscous decay uses the midpoint profile at second order") {
    SolverConfig cfg;
    cfg.resolution = 32;
    cfg.t_end = 2.0;
    cfg.viscosity = ViscosityModel::sinusoidal(1.0, 0.5, 1.0);
    cfg.initial.kind = InitialSpec::Kind::SingleMode;
    cfg.initial.kx = 1;
    cfg.initial.ky = 1;
    const double k2 = 2.0;
    const double exact = 1.0 / std::sqrt(2.0) *
                         std::exp(-k2 * cfg.viscosity.phi(0.0, cfg.t_end));
    std::vector<double> errs;
    for (double dt : {0.02, 0.01, 0.005}) {
        cfg.dt = dt;
        errs.push_back(std::abs(final_h(cfg) - exact));
    }
    REQUIRE(errs[0] / errs[1] == Catch::Approx(4.0).epsilon(0.3));
    REQUIRE(errs[1] / errs[2] == Catch::Approx(4.0).epsilon(0.3));
}

TEST_CASE("a constant spatial field reproduces the constant model") {
    SolverConfig a;
    a.resolution = 32;
    a.dt = 0.01;
    a.t_end = 2.0;
    a.viscosity = ViscosityModel::constant(0.3);
    a.forcing.kind = ForcingSpec::Kind::Kolmogorov;
    a.forcing.amplitude = 1.0;
    a.forcing.kf = 2;
    a.initial.kind = InitialSpec::Kind::RandomBand;
    a.initial.amplitude = 0.5;

    SolverConfig b = a;
    b.viscosity = ViscosityModel::space_varying(ScalarField::from_function(
        32, [](double, double) { return 0.3; }));

    const TrajectoryRecord ra = integrate(a), rb = integrate(b);
    REQUIRE(ra.t.size() == rb.t.size());
    for (size_t i = 0; i < ra.t.size(); ++i)
        REQUIRE(ra.h_norm[i] == Catch::Approx(rb.h_norm[i]).margin(1e-11));
}

TEST_CASE("energy budget residual is at the time-discretization scale") {
    SolverConfig cfg;
    cfg.resolution = 32;
    cfg.dt = 0.005;
    cfg.t_end = 20.0;
    cfg.sample_stride = 5;
    cfg.viscosity = ViscosityModel::constant(0.2);
    cfg.forcing.kind = ForcingSpec::Kind::Kolmogorov;
    cfg.forcing.amplitude = 1.0;
    cfg.forcing.kf = 2;
    cfg.initial.kind = InitialSpec::Kind::RandomBand;
    cfg.initial.amplitude = 0.5;
    const TrajectoryRecord rec = integrate(cfg);
    REQUIRE(rec.residual_scale() < 1e-3);
}

TEST_CASE("configuration validation rejects unusable settings") {
    SolverConfig cfg;
    cfg.resolution = 17;
    REQUIRE_THROWS_AS(validate_config(cfg), ConfigError);
    cfg.resolution = 32;
    cfg.dt = -1.0;
    REQUIRE_THROWS_AS(validate_config(cfg), ConfigError);
    cfg.dt = 0.5;  // far beyond the advective limit for a fast field
    cfg.initial.kind = InitialSpec::Kind::TaylorGreen;
    cfg.initial.amplitude = 50.0;
    REQUIRE_THROWS_AS(validate_config(cfg), ConfigError);
}

TEST_CASE("trajectory output is deterministic") {
    SolverConfig cfg;
    cfg.resolution = 32;
    cfg.dt = 0.01;
    cfg.t_end = 1.0;
    cfg.viscosity = ViscosityModel::constant(0.5);
    cfg.forcing.kind = ForcingSpec::Kind::Kolmogorov;
    cfg.forcing.amplitude = 1.0;
    cfg.forcing.kf = 2;
    cfg.initial.kind = InitialSpec::Kind::RandomBand;
    cfg.initial.seed = 9;
    std::ostringstream a, b;
    integrate(cfg).write_csv(a);
    integrate(cfg).write_csv(b);
    REQUIRE(a.str() == b.str());
    REQUIRE(a.str().find("time,h_norm,v_norm,f_vdual,nu,residual") !=
            std::string::npos);
}

TEST_CASE("converging forcing pair closes on the primary forcing") {
    ForcingSpec f;
    f.kind = ForcingSpec::Kind::ConvergingPair;
    f.amplitude = 1.0;
    f.kf = 2;
    f.sigma = 0.5;
    f.perturb_amp = 0.3;
    SpectralField d0 = forcing_field(f, 32, 0.0, true);
    d0 -= forcing_field(f, 32, 0.0, false);
    SpectralField dT = forcing_field(f, 32, 20.0, true);
    dT -= forcing_field(f, 32, 20.0, false);
    const double g0 = compute_norms(d0).h_norm;
    const double gT = compute_norms(dT).h_norm;
    REQUIRE(g0 == Catch::Approx(0.3).epsilon(1e-10));
    REQUIRE(gT == Catch::Approx(0.3 * std::exp(-10.0)).epsilon(1e-10));
}
