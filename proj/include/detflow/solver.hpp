#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "detflow/field.hpp"
#include "detflow/operators.hpp"
#include "detflow/viscosity.hpp"

namespace detflow {

/// Volume force selection. The converging pair realizes g(t) = f(t) +
/// e^{-sigma t} d with a fixed seeded perturbation direction d.
struct ForcingSpec {
    enum class Kind { Zero, Kolmogorov, TimeModulated, ConvergingPair };
    Kind kind = Kind::Zero;
    double amplitude = 0.0;  ///< a in (a sin(k_f y), 0)
    int kf = 1;
    double mod_eps = 0.0;    ///< TimeModulated: a (1 + mod_eps sin(mod_omega t))
    double mod_omega = 1.0;
    double sigma = 0.5;        ///< pair convergence rate
    double perturb_amp = 0.0;  ///< H norm of d at t = 0
    std::uint64_t perturb_seed = 7;
};

struct InitialSpec {
    enum class Kind { Zero, TaylorGreen, RandomBand, SingleMode };
    Kind kind = Kind::Zero;
    double amplitude = 1.0;  ///< TG amplitude, or target H norm for RandomBand
    int kmin = 1, kmax = 6;  ///< RandomBand shell range
    int kx = 1, ky = 0;      ///< SingleMode wavevector
    std::uint64_t seed = 1;
};

struct SolverConfig {
    int resolution = 64;
    double dt = 1e-2;
    double t_end = 1.0;
    int sample_stride = 1;
    double cfl_safety = 0.4;
    ViscosityModel viscosity = ViscosityModel::constant(1.0);
    ForcingSpec forcing;
    InitialSpec initial;
    std::uint64_t seed = 1;
};

/// Kolmogorov base mode (a sin(k_f y), 0) in spectral form.
inline SpectralField kolmogorov_field(int n, double a, int kf) {
    SpectralField f(n);
    f.mode(0, 0, kf) = {0.0, -0.5 * a};
    f.mode(0, 0, -kf) = {0.0, 0.5 * a};
    return f;
}

/// Forcing at time t; `secondary` selects g of the converging pair.
inline SpectralField forcing_field(const ForcingSpec& spec, int n, double t,
                                   bool secondary = false) {
    switch (spec.kind) {
        case ForcingSpec::Kind::Zero:
            return SpectralField(n);
        case ForcingSpec::Kind::Kolmogorov:
            return kolmogorov_field(n, spec.amplitude, spec.kf);
        case ForcingSpec::Kind::TimeModulated:
            return kolmogorov_field(
                n, spec.amplitude * (1.0 + spec.mod_eps * std::sin(spec.mod_omega * t)),
                spec.kf);
        case ForcingSpec::Kind::ConvergingPair: {
            SpectralField f = kolmogorov_field(n, spec.amplitude, spec.kf);
            if (secondary) {
                const double decay = std::exp(-spec.sigma * t);
                if (decay > 0.0 && spec.perturb_amp != 0.0) {
                    SpectralField d = make_random_solenoidal(
                        n, spec.perturb_seed, 1, std::max(2, spec.kf),
                        spec.perturb_amp);
                    f += (decay)*d;
                }
            }
            return f;
        }
    }
    return SpectralField(n);
}

inline SpectralField initial_field(const InitialSpec& spec, int n) {
    switch (spec.kind) {
        case InitialSpec::Kind::Zero: return SpectralField(n);
        case InitialSpec::Kind::TaylorGreen: return taylor_green(n, spec.amplitude);
        case InitialSpec::Kind::RandomBand:
            return make_random_solenoidal(n, spec.seed, spec.kmin, spec.kmax,
                                          spec.amplitude);
        case InitialSpec::Kind::SingleMode:
            return single_mode(n, spec.kx, spec.ky, spec.amplitude);
    }
    return SpectralField(n);
}

/// Norm time series along one simulation, plus the raw energy-budget terms
/// needed by the estimate verifiers.
struct TrajectoryRecord {
    std::vector<double> t;
    std::vector<double> h_norm;
    std::vector<double> v_norm;
    std::vector<double> f_vdual;
    std::vector<double> nu;            ///< nu(t), or nu_lower for space-varying
    std::vector<double> residual;      ///< absolute per-interval energy defect
    std::vector<double> power;         ///< <f, u>_H
    std::vector<double> dissipation;   ///< nu ||u||_V^2 (or a(nu u,u) - (gradnu.gradu, u))
    std::vector<double> gradnu_vdual;  ///< ||P(grad nu . grad u)||_{V'}, space kind
    double nu_lower = 0.0;
    double nu_upper = 0.0;
    std::uint64_t seed = 0;
    std::string config_echo;

    double span() const { return t.empty() ? 0.0 : t.back() - t.front(); }

    /// Residual series relative to the dissipation scale.
    std::vector<double> relative_residual() const {
        double scale = 0.0;
        for (double d : dissipation) scale = std::max(scale, std::abs(d));
        if (scale == 0.0) scale = 1.0;
        std::vector<double> out(residual.size());
        for (size_t i = 0; i < out.size(); ++i) out[i] = residual[i] / scale;
        return out;
    }

    /// Max relative residual over the trailing half; feeds verdict tolerances.
    double residual_scale() const {
        const auto rel = relative_residual();
        double m = 0.0;
        for (size_t i = rel.size() / 2; i < rel.size(); ++i)
            m = std::max(m, std::abs(rel[i]));
        return m;
    }

    void write_csv(std::ostream& os) const {
        os << "# detflow trajectory\n";
        std::istringstream echo(config_echo);
        std::string line;
        while (std::getline(echo, line)) os << "# " << line << "\n";
        os << "time,h_norm,v_norm,f_vdual,nu,residual\n";
        const auto rel = relative_residual();
        char buf[256];
        for (size_t i = 0; i < t.size(); ++i) {
            std::snprintf(buf, sizeof buf,
                          "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", t[i], h_norm[i],
                          v_norm[i], f_vdual[i], nu[i], rel[i]);
            os << buf;
        }
    }
};

inline std::string config_echo(const SolverConfig& c) {
    std::ostringstream os;
    os.precision(17);
    os << "resolution=" << c.resolution << "\n"
       << "dt=" << c.dt << "\n"
       << "t_end=" << c.t_end << "\n"
       << "sample_stride=" << c.sample_stride << "\n"
       << "cfl_safety=" << c.cfl_safety << "\n"
       << "viscosity=" << c.viscosity.describe() << "\n"
       << "forcing.kind=" << static_cast<int>(c.forcing.kind) << "\n"
       << "forcing.amplitude=" << c.forcing.amplitude << "\n"
       << "forcing.kf=" << c.forcing.kf << "\n"
       << "forcing.sigma=" << c.forcing.sigma << "\n"
       << "forcing.perturb_amp=" << c.forcing.perturb_amp << "\n"
       << "forcing.perturb_seed=" << c.forcing.perturb_seed << "\n"
       << "initial.kind=" << static_cast<int>(c.initial.kind) << "\n"
       << "initial.amplitude=" << c.initial.amplitude << "\n"
       << "initial.seed=" << c.initial.seed << "\n"
       << "seed=" << c.seed << "\n";
    return os.str();
}

/// One simulation advanced with CNAB2: Crank-Nicolson on the (mean)
/// viscous term, 2nd-order Adams-Bashforth on everything explicit, Euler
/// startup. For time-varying viscosity the implicit coefficient uses
/// nu(t + dt/2); for space-varying viscosity the spatial mean is implicit
/// and the remainder terms are explicit.
class Stepper {
public:
    Stepper(const SolverConfig& cfg, bool secondary_forcing = false)
        : cfg_(cfg),
          n_(cfg.resolution),
          secondary_(secondary_forcing),
          u_(initial_field(cfg.initial, cfg.resolution)) {
        auto b = cfg_.viscosity.bounds(0.0, std::max(cfg_.t_end, cfg_.dt));
        nu_lo_ = b.first;
        nu_hi_ = b.second;
        if (cfg_.viscosity.kind() == ViscosityModel::Kind::SpaceVarying) {
            nu_mean_ = cfg_.viscosity.spatial_field().mean();
            nu_fluct_ = cfg_.viscosity.spatial_field();
            nu_fluct_.coefficients()[0] -= nu_mean_;
        }
        u_ = leray_project(u_);
        u_.pin_mean();
        b_ = SpectralField(n_);
        e_ = SpectralField(n_);
        eprev_ = SpectralField(n_);
        f_base_ = SpectralField(n_);
        if (cfg_.forcing.kind != ForcingSpec::Kind::Zero)
            f_base_ = leray_project(
                kolmogorov_field(n_, cfg_.forcing.amplitude, cfg_.forcing.kf));
        if (cfg_.forcing.kind == ForcingSpec::Kind::ConvergingPair &&
            secondary_ && cfg_.forcing.perturb_amp != 0.0)
            f_pert_ = leray_project(make_random_solenoidal(
                n_, cfg_.forcing.perturb_seed, 1, std::max(2, cfg_.forcing.kf),
                cfg_.forcing.perturb_amp));
        else
            f_pert_ = SpectralField(n_);
    }

    const SpectralField& state() const { return u_; }
    void set_state(SpectralField u) { u_ = std::move(u); }
    double time() const { return t_; }
    double nu_lower() const { return nu_lo_; }
    double nu_upper() const { return nu_hi_; }

    /// Optional additional explicit right-hand side (nudging etc.).
    void set_extra_rhs(std::function<SpectralField(const SpectralField&, double)> f) {
        extra_rhs_ = std::move(f);
    }

    SpectralField forcing_now() const {
        return leray_project(forcing_field(cfg_.forcing, n_, t_, secondary_));
    }

    void step() {
        const double dt = cfg_.dt;
        explicit_rhs_into(u_, t_, e_);
        const double nu_imp = implicit_nu(t_ + 0.5 * dt);
        const double w1 = started_ ? 1.5 : 1.0;
        const double w0 = started_ ? -0.5 : 0.0;
        for (int c = 0; c < 2; ++c) {
            for (int i = 0; i < n_; ++i) {
                const double kx = wavenumber(i, n_);
                for (int j = 0; j < n_; ++j) {
                    const double ky = wavenumber(j, n_);
                    const double a = 0.5 * dt * nu_imp * (kx * kx + ky * ky);
                    auto& z = u_.at(c, i, j);
                    const std::complex<double> eff =
                        w1 * e_.at(c, i, j) + w0 * eprev_.at(c, i, j);
                    z = (z * (1.0 - a) + dt * eff) / (1.0 + a);
                }
            }
        }
        u_.pin_mean();
        std::swap(eprev_, e_);
        started_ = true;
        t_ += dt;
        ++steps_;
        if (!u_.is_finite())
            throw BlowUpError("non-finite state during time integration", t_);
    }

    /// Advective CFL margin: dt_max admitted by the current state.
    double cfl_dt_limit() const {
        const double umax = u_.max_speed();
        if (umax <= 0.0) return std::numeric_limits<double>::infinity();
        return cfg_.cfl_safety * (2.0 * kPi / n_) / umax;
    }

private:
    double implicit_nu(double tmid) const {
        switch (cfg_.viscosity.kind()) {
            case ViscosityModel::Kind::Constant:
            case ViscosityModel::Kind::TimeVarying:
                return cfg_.viscosity.value(tmid);
            case ViscosityModel::Kind::SpaceVarying:
                return nu_mean_;
        }
        return nu_lo_;
    }

    void explicit_rhs_into(const SpectralField& u, double t, SpectralField& e) {
        e = f_base_;
        if (cfg_.forcing.kind == ForcingSpec::Kind::TimeModulated)
            e *= 1.0 + cfg_.forcing.mod_eps * std::sin(cfg_.forcing.mod_omega * t);
        if (cfg_.forcing.kind == ForcingSpec::Kind::ConvergingPair &&
            secondary_ && cfg_.forcing.perturb_amp != 0.0)
            e += std::exp(-cfg_.forcing.sigma * t) * f_pert_;
        detail::nonlinear_into(u, b_, ws_);
        e -= b_;
        if (cfg_.viscosity.kind() == ViscosityModel::Kind::SpaceVarying) {
            // nu'(x) lap u, dealiased and projected, plus grad nu . grad u.
            SpectralField lap(n_);
            for (int c = 0; c < 2; ++c) {
                auto lc = u.component(c);
                for (int i = 0; i < n_; ++i) {
                    const double kx = wavenumber(i, n_);
                    for (int j = 0; j < n_; ++j) {
                        const double ky = wavenumber(j, n_);
                        lc[ScalarField::idx(i, j, n_)] *= -(kx * kx + ky * ky);
                    }
                }
                lap.component(c) = detail::dealiased_product(
                    nu_fluct_.coefficients(), lc, n_);
            }
            e += leray_project(lap);
            e += gradnu_gradu(cfg_.viscosity.spatial_field(), u);
        }
        if (extra_rhs_) e += extra_rhs_(u, t);
        e.pin_mean();
    }

    SolverConfig cfg_;
    int n_;
    bool secondary_;
    SpectralField u_;
    SpectralField eprev_;
    SpectralField e_;
    SpectralField b_;
    SpectralField f_base_;
    SpectralField f_pert_;
    detail::AdvectionWorkspace ws_;
    ScalarField nu_fluct_;
    double nu_mean_ = 0.0;
    double nu_lo_ = 0.0, nu_hi_ = 0.0;
    double t_ = 0.0;
    bool started_ = false;
    long steps_ = 0;
    std::function<SpectralField(const SpectralField&, double)> extra_rhs_;
};

inline void validate_config(const SolverConfig& cfg) {
    if (cfg.resolution < 8 || cfg.resolution % 2 != 0)
        throw ConfigError("resolution must be even and >= 8");
    if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(cfg.t_end > 0.0)) throw ConfigError("t_end must be positive");
    if (cfg.sample_stride < 1) throw ConfigError("sample_stride must be >= 1");
    // CFL gate from the initial data; the evolved state is re-checked at
    // every recorded sample during integration.
    const SpectralField u0 = initial_field(cfg.initial, cfg.resolution);
    const double uest = u0.max_speed();
    if (uest > 0.0) {
        const double dt_max = cfg.cfl_safety * (2.0 * kPi / cfg.resolution) / uest;
        if (cfg.dt > dt_max)
            throw ConfigError("dt violates the advective CFL bound (dt_max=" +
                              std::to_string(dt_max) + ")");
    }
}

namespace detail {

inline double dissipation_now(const SolverConfig& cfg, const SpectralField& u,
                              double t, double v2, double* gradnu_w) {
    switch (cfg.viscosity.kind()) {
        case ViscosityModel::Kind::Constant:
        case ViscosityModel::Kind::TimeVarying:
            *gradnu_w = 0.0;
            return cfg.viscosity.value(t) * v2;
        case ViscosityModel::Kind::SpaceVarying: {
            const auto& nu = cfg.viscosity.spatial_field();
            const SpectralField g = gradnu_gradu(nu, u);
            *gradnu_w = compute_norms(g).vdual_norm;
            return a_nu(nu, u, u).value - inner_h(g, u);
        }
    }
    return 0.0;
}

}  // namespace detail

/// Run a full simulation, sampling every `sample_stride` steps.
inline TrajectoryRecord integrate(const SolverConfig& cfg,
                                  bool secondary_forcing = false) {
    validate_config(cfg);
    Stepper st(cfg, secondary_forcing);
    TrajectoryRecord rec;
    rec.nu_lower = st.nu_lower();
    rec.nu_upper = st.nu_upper();
    rec.seed = cfg.seed;
    rec.config_echo = config_echo(cfg);

    const long nsteps = std::lround(cfg.t_end / cfg.dt);
    double prev_h2 = 0.0, prev_p = 0.0, prev_d = 0.0, prev_t = 0.0;
    bool have_prev = false;

    auto sample = [&](bool check_cfl) {
        const SpectralField& u = st.state();
        const double t = st.time();
        const NormReport nr = compute_norms(u);
        const SpectralField f = st.forcing_now();
        const double fd = compute_norms(f).vdual_norm;
        double gw = 0.0;
        const double d = detail::dissipation_now(cfg, u, t, nr.v_norm * nr.v_norm, &gw);
        const double p = inner_h(f, u);
        double res = 0.0;
        if (have_prev) {
            const double dtau = t - prev_t;
            res = (nr.h_norm * nr.h_norm - prev_h2) / (2.0 * dtau) +
                  0.5 * (d + prev_d) - 0.5 * (p + prev_p);
        }
        rec.t.push_back(t);
        rec.h_norm.push_back(nr.h_norm);
        rec.v_norm.push_back(nr.v_norm);
        rec.f_vdual.push_back(fd);
        rec.nu.push_back(cfg.viscosity.kind() == ViscosityModel::Kind::SpaceVarying
                             ? rec.nu_lower
                             : cfg.viscosity.value(t));
        rec.residual.push_back(res);
        rec.power.push_back(p);
        rec.dissipation.push_back(d);
        rec.gradnu_vdual.push_back(gw);
        prev_h2 = nr.h_norm * nr.h_norm;
        prev_p = p;
        prev_d = d;
        prev_t = t;
        have_prev = true;
        if (check_cfl && cfg.dt > st.cfl_dt_limit())
            throw BlowUpError("advective CFL bound violated at runtime", t);
    };

    sample(true);
    for (long k = 1; k <= nsteps; ++k) {
        st.step();
        if (k % cfg.sample_stride == 0 || k == nsteps) sample(k != nsteps);
    }
    return rec;
}

/// Per-interval discrete energy-identity residual, relative to the
/// dissipation scale of the record.
inline std::vector<double> energy_balance_residual(const TrajectoryRecord& rec) {
    if (rec.t.size() < 3)
        throw PreconditionError("energy_balance_residual: need >= 3 samples");
    return rec.relative_residual();
}

}  // namespace detflow
