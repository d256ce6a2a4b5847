#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "detflow/errors.hpp"
#include "detflow/field.hpp"

namespace detflow {

namespace detail {

/// Adaptive Simpson quadrature.
inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double rel_tol, int depth = 48) {
    struct Rec {
        static double go(const std::function<double(double)>& f, double a, double b,
                         double fa, double fm, double fb, double whole, double tol,
                         int depth) {
            const double m = 0.5 * (a + b);
            const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            const double flm = f(lm), frm = f(rm);
            const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            const double delta = left + right - whole;
            if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
                return left + right + delta / 15.0;
            return go(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
                   go(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
        }
    };
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double tol = std::max(std::abs(whole), 1e-30) * rel_tol;
    return Rec::go(f, a, b, fa, fm, fb, whole, tol, depth);
}

}  // namespace detail

/// Viscosity model with certified pointwise bounds. Time profiles are
/// closed-form selections; the spatial kind carries a scalar field.
class ViscosityModel {
public:
    enum class Kind { Constant, TimeVarying, SpaceVarying };
    enum class Profile { Constant, Sinusoidal, PiecewiseConstant, DecayToFloor };

    static ViscosityModel constant(double nu0) {
        ViscosityModel m;
        m.kind_ = Kind::Constant;
        m.profile_ = Profile::Constant;
        m.nu0_ = nu0;
        m.validate_positive(nu0);
        return m;
    }

    /// nu(t) = nu0 (1 + eps sin(omega t)).
    static ViscosityModel sinusoidal(double nu0, double eps, double omega) {
        ViscosityModel m;
        m.kind_ = Kind::TimeVarying;
        m.profile_ = Profile::Sinusoidal;
        m.nu0_ = nu0;
        m.eps_ = eps;
        m.omega_ = omega;
        m.validate_positive(nu0 * (1.0 - std::abs(eps)));
        return m;
    }

    /// Piecewise-constant schedule: value[i] on [knots[i], knots[i+1]), the
    /// last value extending to infinity.
    static ViscosityModel piecewise(std::vector<double> knots, std::vector<double> values) {
        if (knots.size() != values.size() || knots.empty())
            throw ConfigError("piecewise viscosity: need one knot per value");
        ViscosityModel m;
        m.kind_ = Kind::TimeVarying;
        m.profile_ = Profile::PiecewiseConstant;
        m.knots_ = std::move(knots);
        m.values_ = std::move(values);
        for (double v : m.values_) m.validate_positive(v);
        return m;
    }

    /// nu(t) = floor + (nu0 - floor) e^{-rate t}.
    static ViscosityModel decay_to_floor(double nu0, double floor, double rate) {
        ViscosityModel m;
        m.kind_ = Kind::TimeVarying;
        m.profile_ = Profile::DecayToFloor;
        m.nu0_ = nu0;
        m.floor_ = floor;
        m.rate_ = rate;
        m.validate_positive(std::min(nu0, floor));
        return m;
    }

    static ViscosityModel space_varying(ScalarField nu) {
        ViscosityModel m;
        m.kind_ = Kind::SpaceVarying;
        m.spatial_ = std::move(nu);
        m.spatial_lo_ = m.spatial_.min_value();
        m.spatial_hi_ = m.spatial_.max_value();
        m.validate_positive(m.spatial_lo_);
        return m;
    }

    Kind kind() const { return kind_; }
    Profile profile() const { return profile_; }
    const ScalarField& spatial_field() const {
        if (kind_ != Kind::SpaceVarying)
            throw PreconditionError("not a space-varying model");
        return spatial_;
    }
    double nu0() const { return nu0_; }

    /// Pointwise value of the time profile.
    double value(double t) const {
        switch (profile_) {
            case Profile::Constant: return nu0_;
            case Profile::Sinusoidal: return nu0_ * (1.0 + eps_ * std::sin(omega_ * t));
            case Profile::PiecewiseConstant: {
                size_t i = 0;
                while (i + 1 < knots_.size() && t >= knots_[i + 1]) ++i;
                return values_[i];
            }
            case Profile::DecayToFloor:
                return floor_ + (nu0_ - floor_) * std::exp(-rate_ * t);
        }
        return nu0_;
    }

    /// Certified (nu_lower, nu_upper) over a time window.
    std::pair<double, double> bounds(double t0, double t1) const {
        if (kind_ == Kind::SpaceVarying) return {spatial_lo_, spatial_hi_};
        if (t1 <= t0) throw PreconditionError("bounds: empty window");
        double lo, hi;
        switch (profile_) {
            case Profile::Constant:
                lo = hi = nu0_;
                break;
            case Profile::Sinusoidal: {
                // Endpoints plus any interior extrema of sin.
                lo = std::min(value(t0), value(t1));
                hi = std::max(value(t0), value(t1));
                const double period = 2.0 * kPi / omega_;
                if (t1 - t0 >= period) {
                    lo = nu0_ * (1.0 - std::abs(eps_));
                    hi = nu0_ * (1.0 + std::abs(eps_));
                } else {
                    for (double phase : {0.25, 0.75}) {
                        double te = (std::ceil(t0 / period - phase) + phase) * period;
                        for (; te < t1; te += period) {
                            lo = std::min(lo, value(te));
                            hi = std::max(hi, value(te));
                        }
                    }
                }
                break;
            }
            case Profile::PiecewiseConstant: {
                lo = hi = value(t0);
                for (size_t i = 0; i < knots_.size(); ++i) {
                    const double seg_start = knots_[i];
                    const double seg_end =
                        i + 1 < knots_.size() ? knots_[i + 1] : t1;
                    if (seg_end <= t0 || seg_start >= t1) continue;
                    lo = std::min(lo, values_[i]);
                    hi = std::max(hi, values_[i]);
                }
                break;
            }
            case Profile::DecayToFloor:
                lo = std::min(value(t0), value(t1));
                hi = std::max(value(t0), value(t1));
                break;
        }
        if (lo <= 0.0) throw ConfigError("viscosity profile dips to zero or below");
        return {lo, hi};
    }

    double nu_lower(double t0, double t1) const { return bounds(t0, t1).first; }

    /// phi_s(t) = int_s^t nu(z) dz, closed form per profile.
    double phi(double s, double t) const {
        if (kind_ == Kind::SpaceVarying)
            throw PreconditionError("phi is a time-varying construct");
        if (s > t) throw PreconditionError("phi: requires s <= t");
        switch (profile_) {
            case Profile::Constant:
                return nu0_ * (t - s);
            case Profile::Sinusoidal:
                return nu0_ * ((t - s) +
                               eps_ / omega_ * (std::cos(omega_ * s) - std::cos(omega_ * t)));
            case Profile::PiecewiseConstant: {
                double acc = 0.0;
                for (size_t i = 0; i < knots_.size(); ++i) {
                    const double a = std::max(s, knots_[i]);
                    const double b =
                        i + 1 < knots_.size() ? std::min(t, knots_[i + 1]) : t;
                    if (b > a) acc += values_[i] * (b - a);
                }
                return acc;
            }
            case Profile::DecayToFloor:
                return floor_ * (t - s) +
                       (nu0_ - floor_) / rate_ *
                           (std::exp(-rate_ * s) - std::exp(-rate_ * t));
        }
        return 0.0;
    }

    /// Trailing-window estimate of
    ///   Kbar = limsup_{t->inf} int_0^t e^{-phi_s(t)/c_rho^2} ds.
    /// The maximum is taken over t in the trailing tail_fraction of the
    /// horizon; requires the horizon to be long enough that the initial
    /// layer has decayed below 1e-12.
    double kbar(double c_rho, double horizon, double tail_fraction = 0.25) const {
        if (kind_ == Kind::SpaceVarying)
            throw PreconditionError("kbar is a time-varying construct");
        if (tail_fraction <= 0.0 || tail_fraction >= 1.0)
            throw PreconditionError("kbar: tail_fraction must be in (0,1)");
        const double c2 = c_rho * c_rho;
        if (std::exp(-phi(0.0, horizon) / c2) >= 1e-12)
            throw InsufficientHorizonError(
                "kbar: horizon too short for the decay criterion");
        const double numin = bounds(0.0, horizon).first;
        auto eval = [&](double t) {
            // The integrand e^{-phi_s(t)/c2} decays moving s away from t;
            // cut where it is below 1e-18.
            const double reach = c2 * 42.0 / numin;
            const double s0 = std::max(0.0, t - reach);
            return detail::adaptive_simpson(
                [&](double s) { return std::exp(-phi(s, t) / c2); }, s0, t, 1e-12);
        };
        const int nt = 65;
        const double t_lo = horizon * (1.0 - tail_fraction);
        const double dt = horizon * tail_fraction / (nt - 1);
        double best = 0.0, t_best = t_lo;
        for (int it = 0; it < nt; ++it) {
            const double t = t_lo + dt * it;
            const double val = eval(t);
            if (val > best) {
                best = val;
                t_best = t;
            }
        }
        // refine the coarse-grid peak by ternary search
        double a = std::max(t_lo, t_best - dt), b = std::min(horizon, t_best + dt);
        for (int it = 0; it < 60 && b - a > 1e-12 * horizon; ++it) {
            const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
            if (eval(m1) < eval(m2)) a = m1;
            else b = m2;
        }
        return std::max(best, eval(0.5 * (a + b)));
    }

    /// Canonical one-line description for config echoes.
    std::string describe() const {
        char buf[160];
        switch (profile_) {
            case Profile::Constant:
                if (kind_ == Kind::SpaceVarying) {
                    std::snprintf(buf, sizeof buf, "space(lo=%.17g,hi=%.17g)",
                                  spatial_lo_, spatial_hi_);
                } else {
                    std::snprintf(buf, sizeof buf, "constant(nu0=%.17g)", nu0_);
                }
                break;
            case Profile::Sinusoidal:
                std::snprintf(buf, sizeof buf,
                              "sinusoidal(nu0=%.17g,eps=%.17g,omega=%.17g)", nu0_,
                              eps_, omega_);
                break;
            case Profile::PiecewiseConstant: {
                std::string s = "piecewise(";
                for (size_t i = 0; i < knots_.size(); ++i) {
                    std::snprintf(buf, sizeof buf, "%s%.17g:%.17g", i ? ";" : "",
                                  knots_[i], values_[i]);
                    s += buf;
                }
                return s + ")";
            }
            case Profile::DecayToFloor:
                std::snprintf(buf, sizeof buf,
                              "decay(nu0=%.17g,floor=%.17g,rate=%.17g)", nu0_,
                              floor_, rate_);
                break;
        }
        return buf;
    }

private:
    void validate_positive(double lo) const {
        if (!(lo > 0.0)) throw ConfigError("viscosity must stay strictly positive");
    }

    Kind kind_ = Kind::Constant;
    Profile profile_ = Profile::Constant;
    double nu0_ = 1.0, eps_ = 0.0, omega_ = 1.0, floor_ = 1.0, rate_ = 1.0;
    std::vector<double> knots_, values_;
    ScalarField spatial_;
    double spatial_lo_ = 1.0, spatial_hi_ = 1.0;
};

}  // namespace detflow
