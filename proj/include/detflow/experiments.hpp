#pragma once

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "detflow/config.hpp"
#include "detflow/estimates.hpp"
#include "detflow/projections.hpp"
#include "detflow/solver.hpp"

namespace detflow {

// ---------------------------------------------------------------------------
// config binding

inline ViscosityModel viscosity_from_config(const Config& cfg) {
    const std::string kind = cfg.get_str("viscosity", "kind", "constant");
    const double nu0 = cfg.get_double("viscosity", "nu0", 1.0);
    if (kind == "constant") return ViscosityModel::constant(nu0);
    if (kind == "sinusoidal")
        return ViscosityModel::sinusoidal(nu0,
                                          cfg.get_double("viscosity", "epsilon", 0.5),
                                          cfg.get_double("viscosity", "omega", 1.0));
    if (kind == "piecewise")
        return ViscosityModel::piecewise(cfg.get_doubles("viscosity", "knots"),
                                         cfg.get_doubles("viscosity", "values"));
    if (kind == "decay")
        return ViscosityModel::decay_to_floor(nu0,
                                              cfg.get_double("viscosity", "floor", nu0 / 2),
                                              cfg.get_double("viscosity", "rate", 1.0));
    if (kind == "space") {
        const double eps = cfg.get_double("viscosity", "epsilon", 0.1);
        const int kx = static_cast<int>(cfg.get_int("viscosity", "mode", 1));
        const int n = static_cast<int>(cfg.get_int("solver", "resolution", 64));
        auto field = ScalarField::from_function(n, [=](double x, double) {
            return nu0 * (1.0 + eps * std::sin(kx * x));
        });
        return ViscosityModel::space_varying(field);
    }
    throw ConfigError("unknown viscosity kind: " + kind);
}

inline ForcingSpec forcing_from_config(const Config& cfg) {
    ForcingSpec f;
    const std::string kind = cfg.get_str("forcing", "kind", "kolmogorov");
    if (kind == "zero") f.kind = ForcingSpec::Kind::Zero;
    else if (kind == "kolmogorov") f.kind = ForcingSpec::Kind::Kolmogorov;
    else if (kind == "modulated") f.kind = ForcingSpec::Kind::TimeModulated;
    else if (kind == "pair") f.kind = ForcingSpec::Kind::ConvergingPair;
    else throw ConfigError("unknown forcing kind: " + kind);
    f.amplitude = cfg.get_double("forcing", "amplitude", 1.0);
    f.kf = static_cast<int>(cfg.get_int("forcing", "kf", 1));
    f.mod_eps = cfg.get_double("forcing", "mod_eps", 0.0);
    f.mod_omega = cfg.get_double("forcing", "mod_omega", 1.0);
    f.sigma = cfg.get_double("forcing", "sigma", 0.5);
    f.perturb_amp = cfg.get_double("forcing", "perturb_amp", 0.0);
    f.perturb_seed = cfg.get_u64("forcing", "perturb_seed", 7);
    return f;
}

inline InitialSpec initial_from_config(const Config& cfg) {
    InitialSpec s;
    const std::string kind = cfg.get_str("initial", "kind", "random");
    if (kind == "zero") s.kind = InitialSpec::Kind::Zero;
    else if (kind == "taylor-green") s.kind = InitialSpec::Kind::TaylorGreen;
    else if (kind == "random") s.kind = InitialSpec::Kind::RandomBand;
    else if (kind == "single-mode") s.kind = InitialSpec::Kind::SingleMode;
    else throw ConfigError("unknown initial kind: " + kind);
    s.amplitude = cfg.get_double("initial", "amplitude", 1.0);
    s.kmin = static_cast<int>(cfg.get_int("initial", "kmin", 1));
    s.kmax = static_cast<int>(cfg.get_int("initial", "kmax", 6));
    s.kx = static_cast<int>(cfg.get_int("initial", "kx", 1));
    s.ky = static_cast<int>(cfg.get_int("initial", "ky", 0));
    s.seed = cfg.get_u64("initial", "seed", 1);
    return s;
}

inline SolverConfig solver_from_config(const Config& cfg) {
    SolverConfig s;
    s.resolution = static_cast<int>(cfg.get_int("solver", "resolution", 64));
    s.dt = cfg.get_double("solver", "dt", 1e-2);
    s.t_end = cfg.get_double("solver", "t_end", 1.0);
    s.sample_stride = static_cast<int>(cfg.get_int("solver", "sample_stride", 1));
    s.cfl_safety = cfg.get_double("solver", "cfl_safety", 0.4);
    s.seed = cfg.get_u64("solver", "seed", 1);
    s.viscosity = viscosity_from_config(cfg);
    s.forcing = forcing_from_config(cfg);
    s.initial = initial_from_config(cfg);
    return s;
}

// ---------------------------------------------------------------------------
// twin experiments

enum class TwinMode { Slaving, Nudging };

struct ExperimentConfig {
    SolverConfig solver;
    std::optional<ProjectionOperator> projection;  ///< empty = N 0
    TwinMode mode = TwinMode::Slaving;
    double mu = 0.0;          ///< nudging gain; 0 = default 10 nu_lower lambda1
    double epsilon_h = 1e-6;  ///< convergence threshold on |u - v|_H
    double c1 = 0.0, gamma = 0.0;  ///< certified constants; 0 = uncertified
    std::uint64_t seed = 1;
    std::string echo;
};

inline ExperimentConfig experiment_from_config(const Config& cfg) {
    ExperimentConfig e;
    e.solver = solver_from_config(cfg);
    const std::string pk = cfg.get_str("projection", "kind", "none");
    if (pk == "modal")
        e.projection = ProjectionOperator::modal(
            static_cast<int>(cfg.get_int("projection", "k_cut", 4)));
    else if (pk == "volume")
        e.projection = ProjectionOperator::volume(
            static_cast<int>(cfg.get_int("projection", "m", 4)));
    else if (pk != "none")
        throw ConfigError("unknown projection kind: " + pk);
    const std::string mode = cfg.get_str("twin", "mode", "slaving");
    if (mode == "slaving") e.mode = TwinMode::Slaving;
    else if (mode == "nudging") e.mode = TwinMode::Nudging;
    else throw ConfigError("unknown twin mode: " + mode);
    e.mu = cfg.get_double("twin", "mu", 0.0);
    e.epsilon_h = cfg.get_double("twin", "epsilon_h", 1e-6);
    if (!(e.epsilon_h > 0.0)) throw ConfigError("epsilon_h must be positive");
    e.c1 = cfg.get_double("twin", "c1", 0.0);
    e.gamma = cfg.get_double("twin", "gamma", 0.0);
    e.seed = e.solver.seed;
    e.echo = cfg.echo();
    return e;
}

struct TwinReport {
    std::vector<double> t;
    std::vector<double> projected_diff;  ///< |R_N(u - v)|_H
    std::vector<double> h_diff;          ///< |u - v|_H
    std::vector<double> alpha;  ///< decay-rate series of the difference bound
    std::vector<double> beta;   ///< source series of the difference bound
    int dimension = 0;
    long long n_bound_value = -1;
    double mu = 0.0;
    double epsilon_h = 0.0;
    std::string mode;
    std::string verdict;  ///< determined | not-determined-within-horizon
    std::string config_echo;
    TrajectoryRecord primary;  ///< the u trajectory, for estimate reuse

    double trailing_h_diff() const {
        const double tail = t.back() - 0.1 * (t.back() - t.front());
        double m = 0.0;
        for (size_t i = 0; i < t.size(); ++i)
            if (t[i] >= tail) m = std::max(m, h_diff[i]);
        return m;
    }

    void write_json(std::ostream& os) const {
        char buf[128];
        os << "{\n  \"mode\": \"" << mode << "\",\n"
           << "  \"dimension\": " << dimension << ",\n"
           << "  \"n_bound\": " << n_bound_value << ",\n";
        std::snprintf(buf, sizeof buf, "  \"mu\": %.17g,\n", mu);
        os << buf;
        std::snprintf(buf, sizeof buf, "  \"epsilon_h\": %.17g,\n", epsilon_h);
        os << buf;
        std::snprintf(buf, sizeof buf, "  \"trailing_h_diff\": %.17g,\n",
                      trailing_h_diff());
        os << buf;
        os << "  \"verdict\": \"" << verdict << "\",\n  \"samples\": "
           << t.size() << "\n}\n";
    }

    void write_csv(std::ostream& os) const {
        os << "time,projected_diff,h_diff\n";
        char buf[160];
        for (size_t i = 0; i < t.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", t[i],
                          projected_diff[i], h_diff[i]);
            os << buf;
        }
    }
};

/// Evolve u under f and v under the converging pair forcing g, coupling v to
/// u through the projection (slaving or nudging), and judge determination.
inline TwinReport twin_run(const ExperimentConfig& ec) {
    SolverConfig ucfg = ec.solver;
    validate_config(ucfg);
    if (ucfg.forcing.kind != ForcingSpec::Kind::ConvergingPair)
        throw ConfigError("twin_run: forcing kind must be 'pair'");
    if (ec.projection && ec.mode == TwinMode::Slaving &&
        ec.projection->kind() == ProjectionOperator::Kind::Volume)
        throw ConfigError(
            "twin_run: slaving needs an idempotent modal projection; use "
            "twin mode 'nudging' for volume projections");

    SolverConfig vcfg = ucfg;
    vcfg.initial.seed = ucfg.initial.seed + 1;  // distinct initial data
    Stepper us(ucfg, false);
    Stepper vs(vcfg, true);

    const double mu =
        ec.mu > 0.0 ? ec.mu : 10.0 * us.nu_lower() * stokes_lambda1();
    SpectralField u_prev = us.state();
    if (ec.projection && ec.mode == TwinMode::Nudging) {
        const ProjectionOperator op = *ec.projection;
        vs.set_extra_rhs([&u_prev, op, mu](const SpectralField& v, double) {
            SpectralField d = op.apply(v);
            d -= op.apply(u_prev);
            return (-mu) * leray_project(d);
        });
    }

    TwinReport rep;
    rep.mode = ec.mode == TwinMode::Slaving ? "slaving" : "nudging";
    rep.mu = ec.projection && ec.mode == TwinMode::Nudging ? mu : 0.0;
    rep.epsilon_h = ec.epsilon_h;
    rep.dimension =
        ec.projection ? ec.projection->dimension(ucfg.resolution) : 0;
    rep.config_echo = ec.echo;
    rep.primary.nu_lower = us.nu_lower();
    rep.primary.nu_upper = us.nu_upper();
    rep.primary.seed = ucfg.seed;

    const long nsteps = std::lround(ucfg.t_end / ucfg.dt);
    const double nu_lo = us.nu_lower();

    auto sample = [&]() {
        SpectralField d = us.state();
        d -= vs.state();
        const NormReport nd = compute_norms(d);
        rep.t.push_back(us.time());
        rep.h_diff.push_back(nd.h_norm);
        if (ec.projection) {
            const SpectralField pd = ec.projection->apply(d);
            rep.projected_diff.push_back(compute_norms(pd).h_norm);
        } else {
            rep.projected_diff.push_back(0.0);
        }
        // difference-inequality coefficients for the decay classifier:
        // d/dt |w|^2 + alpha |w|^2 <= beta along the primary trajectory
        const NormReport nu_ = compute_norms(us.state());
        const double n2g =
            ec.c1 > 0.0 && ec.gamma > 0.0 && rep.dimension > 0
                ? std::pow(double(rep.dimension), 2.0 * ec.gamma)
                : 0.0;
        const double alpha =
            n2g > 0.0 ? nu_lo * n2g / (2.0 * ec.c1 * ec.c1) -
                            2.0 / nu_lo * nu_.v_norm * nu_.v_norm
                      : 0.0;
        SpectralField gf = forcing_field(ucfg.forcing, ucfg.resolution,
                                         us.time(), true);
        SpectralField ff = forcing_field(ucfg.forcing, ucfg.resolution,
                                         us.time(), false);
        gf -= ff;
        const double dg = compute_norms(leray_project(gf)).vdual_norm;
        const double beta = 2.0 / nu_lo * dg * dg;
        rep.alpha.push_back(alpha);
        rep.beta.push_back(beta);
        // primary record for bound evaluation
        const SpectralField fl = us.forcing_now();
        rep.primary.t.push_back(us.time());
        rep.primary.h_norm.push_back(nu_.h_norm);
        rep.primary.v_norm.push_back(nu_.v_norm);
        rep.primary.f_vdual.push_back(compute_norms(fl).vdual_norm);
        rep.primary.nu.push_back(nu_lo);
        rep.primary.residual.push_back(0.0);
        rep.primary.power.push_back(0.0);
        rep.primary.dissipation.push_back(0.0);
        rep.primary.gradnu_vdual.push_back(0.0);
    };

    sample();
    for (long k = 1; k <= nsteps; ++k) {
        u_prev = us.state();
        us.step();
        vs.step();
        if (ec.projection && ec.mode == TwinMode::Slaving) {
            SpectralField v = vs.state();
            v -= ec.projection->apply(v);
            v += ec.projection->apply(us.state());
            vs.set_state(std::move(v));
        }
        if (k % ucfg.sample_stride == 0 || k == nsteps) sample();
    }

    if (ec.c1 > 0.0 && ec.gamma > 0.0)
        rep.n_bound_value =
            n_bound(rep.primary, ucfg.viscosity, ec.c1, ec.gamma);
    rep.verdict = rep.trailing_h_diff() < ec.epsilon_h
                      ? "determined"
                      : "not-determined-within-horizon";
    return rep;
}

// ---------------------------------------------------------------------------
// estimate suites and certification

struct SuiteResult {
    std::vector<EstimateReport> reports;
    CoercivityReport coercivity;  ///< meaningful for space-varying runs only
    bool has_coercivity = false;
    bool all_satisfied = true;

    void write_csv(std::ostream& os) const {
        os << "id,measured,bound,margin,tolerance,satisfied\n";
        char buf[320];
        for (const auto& r : reports) {
            std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%d\n",
                          r.id.c_str(), r.measured, r.bound, r.margin,
                          r.tolerance, r.satisfied ? 1 : 0);
            os << buf;
        }
    }
    void write_json(std::ostream& os) const {
        os << "[\n";
        for (size_t i = 0; i < reports.size(); ++i)
            os << "  " << reports[i].to_json()
               << (i + 1 < reports.size() ? ",\n" : "\n");
        os << "]\n";
    }
};

/// Run one simulation and verify every estimate applicable to its viscosity
/// kind. The averaging window defaults to one dissipation time.
inline SuiteResult estimate_suite(const SolverConfig& cfg, double window = 0.0) {
    TrajectoryRecord rec = integrate(cfg);
    const double T =
        window > 0.0 ? window
                     : poincare_constant() * poincare_constant() / rec.nu_lower;
    std::vector<EstimateId> ids;
    switch (cfg.viscosity.kind()) {
        case ViscosityModel::Kind::Constant:
            ids = {EstimateId::Energy1, EstimateId::Energy2};
            break;
        case ViscosityModel::Kind::TimeVarying:
            ids = {EstimateId::TimeEnergy1, EstimateId::TimeEnergy3,
                   EstimateId::Energy2Time};
            break;
        case ViscosityModel::Kind::SpaceVarying:
            ids = {EstimateId::Energy1Space, EstimateId::Energy2Space};
            break;
    }
    SuiteResult out;
    for (EstimateId id : ids) {
        out.reports.push_back(verify_apriori(rec, cfg.viscosity, id, T));
        out.all_satisfied = out.all_satisfied && out.reports.back().satisfied;
    }
    if (cfg.viscosity.kind() == ViscosityModel::Kind::SpaceVarying) {
        Stepper st(cfg);
        out.coercivity =
            coercivity_check(cfg.viscosity.spatial_field(), st.state());
        out.has_coercivity = true;
        for (auto& r : out.reports)
            r.note += out.coercivity.satisfied ? "; coercivity held at t=0"
                                               : "; coercivity failed at t=0";
    }
    return out;
}

inline void write_certificate_json(const ProjectionCertificate& cert,
                                   std::ostream& os) {
    os << "{\n  \"kind\": \""
       << (cert.kind == ProjectionOperator::Kind::Modal ? "modal" : "volume")
       << "\",\n  \"parameters\": [";
    for (size_t i = 0; i < cert.parameters.size(); ++i)
        os << cert.parameters[i] << (i + 1 < cert.parameters.size() ? "," : "");
    os << "],\n  \"dimensions\": [";
    for (size_t i = 0; i < cert.dimensions.size(); ++i)
        os << cert.dimensions[i] << (i + 1 < cert.dimensions.size() ? "," : "");
    os << "],\n  \"max_ratio\": [";
    char buf[64];
    for (size_t i = 0; i < cert.max_ratio.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", cert.max_ratio[i]);
        os << buf << (i + 1 < cert.max_ratio.size() ? "," : "");
    }
    os << "],\n";
    std::snprintf(buf, sizeof buf, "  \"fitted_c1\": %.17g,\n", cert.fitted_c1);
    os << buf;
    std::snprintf(buf, sizeof buf, "  \"fitted_gamma\": %.17g,\n",
                  cert.fitted_gamma);
    os << buf;
    std::snprintf(buf, sizeof buf, "  \"analytic_c1\": %.17g,\n",
                  cert.analytic_c1);
    os << buf;
    std::snprintf(buf, sizeof buf, "  \"c1\": %.17g,\n", cert.c1);
    os << buf;
    std::snprintf(buf, sizeof buf, "  \"gamma\": %.17g,\n", cert.gamma);
    os << buf;
    os << "  \"samples\": " << cert.samples << ",\n  \"seed\": " << cert.seed
       << "\n}\n";
}

/// Drive the approximation-constant measurement for a configured family.
inline ProjectionCertificate certify_projection(const Config& cfg) {
    const std::string kind = cfg.get_str("certify", "kind", "modal");
    ProjectionOperator::Kind k;
    if (kind == "modal") k = ProjectionOperator::Kind::Modal;
    else if (kind == "volume") k = ProjectionOperator::Kind::Volume;
    else throw ConfigError("unknown certify kind: " + kind);
    std::vector<int> family = cfg.get_ints("certify", "family");
    if (family.empty()) family = {2, 4, 8, 16};
    const int n = static_cast<int>(cfg.get_int("solver", "resolution", 128));
    const int samples = static_cast<int>(cfg.get_int("certify", "samples", 24));
    const std::uint64_t seed = cfg.get_u64("certify", "seed", 1);
    return estimate_constants(k, family, n, samples, seed);
}

}  // namespace detflow
