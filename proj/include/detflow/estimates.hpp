#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "detflow/operators.hpp"
#include "detflow/solver.hpp"
#include "detflow/viscosity.hpp"

namespace detflow {

// ---------------------------------------------------------------------------
// window helpers

/// Max of a sampled series over the trailing half of its time span.
inline double trailing_max(const std::vector<double>& t,
                           const std::vector<double>& x) {
    if (t.empty() || t.size() != x.size())
        throw PreconditionError("trailing_max: empty or mismatched series");
    const double tmid = 0.5 * (t.front() + t.back());
    double m = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < t.size(); ++i)
        if (t[i] >= tmid) m = std::max(m, x[i]);
    return m;
}

/// Trapezoid average of x over [t0, t1] along the sample grid.
inline double window_average(const std::vector<double>& t,
                             const std::vector<double>& x, double t0,
                             double t1) {
    if (!(t1 > t0)) throw PreconditionError("window_average: empty window");
    double s = 0.0;
    for (size_t i = 1; i < t.size(); ++i) {
        const double a = std::max(t[i - 1], t0), b = std::min(t[i], t1);
        if (b <= a) continue;
        // linear interpolation of x at the clipped endpoints
        const double dt = t[i] - t[i - 1];
        const double xa = x[i - 1] + (x[i] - x[i - 1]) * (a - t[i - 1]) / dt;
        const double xb = x[i - 1] + (x[i] - x[i - 1]) * (b - t[i - 1]) / dt;
        s += 0.5 * (xa + xb) * (b - a);
    }
    return s / (t1 - t0);
}

/// Max over sliding windows of length T whose right end lies in the trailing
/// half of the record.
inline double max_window_average(const std::vector<double>& t,
                                 const std::vector<double>& x, double T) {
    if (t.size() < 2) throw PreconditionError("max_window_average: short series");
    if (T > t.back() - t.front())
        throw PreconditionError("max_window_average: window exceeds record span");
    const double tmid = 0.5 * (t.front() + t.back());
    double m = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < t.size(); ++i) {
        const double end = t[i];
        if (end < tmid || end - T < t.front()) continue;
        m = std::max(m, window_average(t, x, end - T, end));
    }
    if (!std::isfinite(m))
        throw PreconditionError("max_window_average: no admissible window");
    return m;
}

// ---------------------------------------------------------------------------
// Grashof number and the projection-size bound

/// Gr = F / (lambda_1 nu_lower^2) with F the trailing-window max of the dual
/// norm of the forcing.
inline double grashof(const TrajectoryRecord& rec, double nu_lower) {
    const double F = trailing_max(rec.t, rec.f_vdual) *
                     std::sqrt(stokes_lambda1());
    return F / (stokes_lambda1() * nu_lower * nu_lower);
}

/// Smallest N whose 2*gamma power exceeds (4 C1^2 / nu_lower^2) times the
/// relevant time-averaged enstrophy bound. For constant viscosity this is
/// N^{2 gamma} > 8 C1^2 (F / nu^2)^2.
inline long long n_bound(const TrajectoryRecord& rec, const ViscosityModel& model,
                         double c1, double gamma) {
    if (!(c1 > 0.0) || !(gamma > 0.0))
        throw PreconditionError("n_bound: need certified positive C1 and gamma");
    const double F = trailing_max(rec.t, rec.f_vdual);
    const double nu_lo = rec.nu_lower;
    const double c2 = poincare_constant() * poincare_constant();
    double b_h1 = 0.0;  // bound on the averaged squared V norm
    switch (model.kind()) {
        case ViscosityModel::Kind::Constant:
            b_h1 = 2.0 / (nu_lo * nu_lo) * F * F;
            break;
        case ViscosityModel::Kind::TimeVarying: {
            const double kbar = model.kbar(poincare_constant(), rec.span());
            b_h1 = (kbar * nu_lo + c2) / (nu_lo * nu_lo * c2) * F * F;
            break;
        }
        case ViscosityModel::Kind::SpaceVarying: {
            const double G = trailing_max(rec.t, rec.gradnu_vdual);
            b_h1 = 1.0 / (nu_lo * nu_lo) * (F * F + G * G);
            break;
        }
    }
    const double x = 4.0 * c1 * c1 / (nu_lo * nu_lo) * b_h1;
    const double nreal = std::pow(x, 1.0 / (2.0 * gamma));
    if (nreal > 9e17) throw PreconditionError("n_bound: bound overflows");
    return static_cast<long long>(std::floor(nreal)) + 1;
}

// ---------------------------------------------------------------------------
// a priori estimate verification

enum class EstimateId {
    Energy1,       ///< limsup |u|_H^2, constant viscosity
    Energy2,       ///< averaged |u|_V^2, constant viscosity
    TimeEnergy1,   ///< limsup |u|_H^2, time-varying
    TimeEnergy3,   ///< averaged |u|_V^2, time-varying
    Energy2Time,   ///< nu-weighted averaged |u|_V^2, time-varying
    Energy1Space,  ///< limsup |u|_H^2, space-varying
    Energy2Space,  ///< averaged |u|_V^2, space-varying
};

inline const char* estimate_name(EstimateId id) {
    switch (id) {
        case EstimateId::Energy1: return "energy1";
        case EstimateId::Energy2: return "energy2";
        case EstimateId::TimeEnergy1: return "time-energy1";
        case EstimateId::TimeEnergy3: return "time-energy3";
        case EstimateId::Energy2Time: return "energy2-time";
        case EstimateId::Energy1Space: return "energy1-space";
        case EstimateId::Energy2Space: return "energy2-space";
    }
    return "?";
}

inline EstimateId estimate_from_name(const std::string& s) {
    for (EstimateId id :
         {EstimateId::Energy1, EstimateId::Energy2, EstimateId::TimeEnergy1,
          EstimateId::TimeEnergy3, EstimateId::Energy2Time,
          EstimateId::Energy1Space, EstimateId::Energy2Space})
        if (s == estimate_name(id)) return id;
    throw ConfigError("unknown estimate id: " + s);
}

struct EstimateReport {
    std::string id;
    double measured = 0.0;
    double bound = 0.0;
    double margin = 0.0;  ///< bound - measured
    double window_start = 0.0, window_end = 0.0;
    double tolerance = 0.0;
    bool satisfied = false;
    std::string note;

    std::string to_json() const {
        char buf[512];
        std::snprintf(buf, sizeof buf,
                      "{\"id\":\"%s\",\"measured\":%.17g,\"bound\":%.17g,"
                      "\"margin\":%.17g,\"window\":[%.17g,%.17g],"
                      "\"tolerance\":%.17g,\"satisfied\":%s,\"note\":\"%s\"}",
                      id.c_str(), measured, bound, margin, window_start,
                      window_end, tolerance, satisfied ? "true" : "false",
                      note.c_str());
        return buf;
    }
};

namespace detail {

inline bool wants_space(EstimateId id) {
    return id == EstimateId::Energy1Space || id == EstimateId::Energy2Space;
}
inline bool wants_constant(EstimateId id) {
    return id == EstimateId::Energy1 || id == EstimateId::Energy2;
}

}  // namespace detail

/// Verify one a priori bound against a trajectory. T is the averaging window
/// length for the time-averaged estimates (ignored by the limsup ones).
inline EstimateReport verify_apriori(const TrajectoryRecord& rec,
                                     const ViscosityModel& model,
                                     EstimateId which, double T) {
    const double nu_lo = rec.nu_lower;
    const double c2 = poincare_constant() * poincare_constant();
    const double diss_time = c2 / nu_lo;
    if (rec.span() < 10.0 * diss_time)
        throw InsufficientHorizonError(
            "verify_apriori: record shorter than 10 dissipation times");

    const bool space_model = model.kind() == ViscosityModel::Kind::SpaceVarying;
    if (detail::wants_space(which) != space_model)
        throw PreconditionError(std::string("verify_apriori: estimate '") +
                                estimate_name(which) +
                                "' does not apply to this viscosity kind");
    if (detail::wants_constant(which) &&
        model.kind() != ViscosityModel::Kind::Constant)
        throw PreconditionError(std::string("verify_apriori: estimate '") +
                                estimate_name(which) +
                                "' requires constant viscosity");

    const bool averaged =
        which == EstimateId::Energy2 || which == EstimateId::TimeEnergy3 ||
        which == EstimateId::Energy2Time || which == EstimateId::Energy2Space;
    if (averaged && T < diss_time)
        throw PreconditionError("verify_apriori: window T below the threshold "
                                "of one dissipation time");

    const double F = trailing_max(rec.t, rec.f_vdual);
    const double F2 = F * F;
    double kbar = 0.0;
    if (which == EstimateId::TimeEnergy1 || which == EstimateId::TimeEnergy3 ||
        which == EstimateId::Energy2Time)
        kbar = model.kbar(poincare_constant(), rec.span());

    std::vector<double> h2(rec.h_norm.size()), v2(rec.v_norm.size());
    for (size_t i = 0; i < h2.size(); ++i) {
        h2[i] = rec.h_norm[i] * rec.h_norm[i];
        v2[i] = rec.v_norm[i] * rec.v_norm[i];
    }

    EstimateReport rep;
    rep.id = estimate_name(which);
    rep.window_start = 0.5 * (rec.t.front() + rec.t.back());
    rep.window_end = rec.t.back();

    switch (which) {
        case EstimateId::Energy1:
            rep.measured = trailing_max(rec.t, h2);
            rep.bound = c2 / (nu_lo * nu_lo) * F2;
            break;
        case EstimateId::Energy2:
            rep.measured = max_window_average(rec.t, v2, T);
            rep.bound = 2.0 / (nu_lo * nu_lo) * F2;
            break;
        case EstimateId::TimeEnergy1:
            rep.measured = trailing_max(rec.t, h2);
            rep.bound = kbar / nu_lo * F2;
            break;
        case EstimateId::TimeEnergy3:
            rep.measured = max_window_average(rec.t, v2, T);
            rep.bound = (kbar * nu_lo + c2) / (nu_lo * nu_lo * c2) * F2;
            break;
        case EstimateId::Energy2Time: {
            std::vector<double> nv2(v2.size());
            for (size_t i = 0; i < v2.size(); ++i) nv2[i] = rec.nu[i] * v2[i];
            rep.measured = max_window_average(rec.t, nv2, T);
            rep.bound = (kbar * nu_lo + c2) / (nu_lo * c2) * F2;
            break;
        }
        case EstimateId::Energy1Space: {
            const double G = trailing_max(rec.t, rec.gradnu_vdual);
            rep.measured = trailing_max(rec.t, h2);
            rep.bound = c2 / (2.0 * nu_lo * nu_lo) * (F2 + G * G);
            rep.note = "conditional on the coercivity predicate";
            break;
        }
        case EstimateId::Energy2Space: {
            const double G = trailing_max(rec.t, rec.gradnu_vdual);
            rep.measured = max_window_average(rec.t, v2, T);
            rep.bound = 1.0 / (nu_lo * nu_lo) * (F2 + G * G);
            rep.note = "conditional on the coercivity predicate";
            break;
        }
    }

    const double tol = std::max(1e-8, 5.0 * rec.residual_scale());
    rep.tolerance = tol;
    rep.margin = rep.bound - rep.measured;
    rep.satisfied = rep.margin >= -tol * std::max(1.0, std::abs(rep.bound));
    return rep;
}

/// Measured coercivity of the variable-viscosity form: reports whether
/// a(nu u, u) >= nu_lower |u|_V^2 held for this pair. Measures, never asserts.
struct CoercivityReport {
    double form_value = 0.0;
    double lower_bound = 0.0;
    double margin = 0.0;
    bool satisfied = false;
};

inline CoercivityReport coercivity_check(const ScalarField& nu,
                                         const SpectralField& u) {
    CoercivityReport rep;
    rep.form_value = a_nu(nu, u, u).value;
    const double v = compute_norms(u).v_norm;
    double nu_lo = nu.min_value();
    rep.lower_bound = nu_lo * v * v;
    rep.margin = rep.form_value - rep.lower_bound;
    rep.satisfied = rep.margin >= -1e-12 * std::max(1.0, rep.form_value);
    return rep;
}

// ---------------------------------------------------------------------------
// Gronwall machinery

/// Bound series y0 e^{-int alpha} + int beta e^{-int alpha}; alpha and beta
/// are piecewise linear on the grid, the exponential integrating factor is
/// advanced by a stable one-step recurrence with Simpson quadrature for the
/// source term.
inline std::vector<double> gronwall_classical(double y0,
                                              const std::vector<double>& alpha,
                                              const std::vector<double>& beta,
                                              const std::vector<double>& grid) {
    const size_t n = grid.size();
    if (n < 2 || alpha.size() != n || beta.size() != n)
        throw PreconditionError("gronwall_classical: mismatched series");
    for (size_t i = 0; i < n; ++i)
        if (alpha[i] < 0.0 || beta[i] < 0.0)
            throw PreconditionError("gronwall_classical: alpha, beta must be >= 0");
    std::vector<double> out(n);
    out[0] = y0;
    for (size_t i = 1; i < n; ++i) {
        const double dt = grid[i] - grid[i - 1];
        if (!(dt > 0.0))
            throw PreconditionError("gronwall_classical: grid must increase");
        const double a0 = alpha[i - 1], a1 = alpha[i];
        const double b0 = beta[i - 1], b1 = beta[i];
        const double A = 0.5 * (a0 + a1) * dt;  // exact for linear alpha
        // int_0^dt beta(s) exp(-int_s^dt alpha) ds by Simpson; the midpoint
        // exponent for linear alpha is (dt/2)(a_mid + a1)/2 with
        // a_mid = (a0 + a1)/2.
        const double amid = 0.5 * (a0 + a1), bmid = 0.5 * (b0 + b1);
        const double Amid = 0.25 * (amid + a1) * dt;
        const double I = dt / 6.0 *
                         (b0 * std::exp(-A) + 4.0 * bmid * std::exp(-Amid) + b1);
        out[i] = out[i - 1] * std::exp(-A) + I;
    }
    return out;
}

struct GronwallVerdict {
    double m = 0.0;                ///< min window average of alpha
    double M = 0.0;                ///< max window average of alpha^-
    double beta_plus_limit = 0.0;  ///< trailing window average of beta^+
    double y_limit_estimate = 0.0; ///< trailing max of y
    std::string verdict;           ///< consistent | hypotheses-not-met | inconclusive

    std::string to_json() const {
        char buf[384];
        std::snprintf(buf, sizeof buf,
                      "{\"m\":%.17g,\"M\":%.17g,\"beta_plus_limit\":%.17g,"
                      "\"y_limit_estimate\":%.17g,\"verdict\":\"%s\"}",
                      m, M, beta_plus_limit, y_limit_estimate, verdict.c_str());
        return buf;
    }
};

/// Classify a (alpha, beta, y) triple against the asymptotic decay hypotheses:
/// window averages of alpha bounded below by m > 0, its negative part
/// bounded, beta^+ averages tending to zero imply y tends to zero. Never
/// claims a counterexample.
inline GronwallVerdict gronwall_generalized_check(
    const std::vector<double>& alpha, const std::vector<double>& beta,
    const std::vector<double>& y, const std::vector<double>& grid, double T,
    double y_threshold = 1e-6, double beta_threshold = 1e-6) {
    const size_t n = grid.size();
    if (n < 3 || alpha.size() != n || beta.size() != n || y.size() != n)
        throw PreconditionError("gronwall_generalized_check: mismatched series");
    if (T > grid.back() - grid.front())
        throw PreconditionError("gronwall_generalized_check: T exceeds span");

    std::vector<double> aneg(n), bplus(n);
    for (size_t i = 0; i < n; ++i) {
        aneg[i] = std::max(-alpha[i], 0.0);
        bplus[i] = std::max(beta[i], 0.0);
    }

    GronwallVerdict v;
    v.m = std::numeric_limits<double>::infinity();
    v.M = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double end = grid[i];
        if (end - T < grid.front()) continue;
        v.m = std::min(v.m, window_average(grid, alpha, end - T, end));
        v.M = std::max(v.M, window_average(grid, aneg, end - T, end));
    }
    v.beta_plus_limit = window_average(grid, bplus, grid.back() - T, grid.back());
    v.y_limit_estimate = 0.0;
    const double tail = grid.back() - 0.1 * (grid.back() - grid.front());
    for (size_t i = 0; i < n; ++i)
        if (grid[i] >= tail)
            v.y_limit_estimate = std::max(v.y_limit_estimate, y[i]);

    const bool hypotheses =
        v.m > 0.0 && std::isfinite(v.M) && v.beta_plus_limit <= beta_threshold;
    if (!hypotheses)
        v.verdict = "hypotheses-not-met";
    else if (v.y_limit_estimate <= y_threshold)
        v.verdict = "consistent";
    else
        v.verdict = "inconclusive";
    return v;
}

/// ab <= a^p/p + b^q/q with 1/p + 1/q = 1; used as a self-test utility.
inline bool young_holds(double a, double b, double p) {
    if (a < 0.0 || b < 0.0 || p <= 1.0)
        throw PreconditionError("young_holds: need a,b >= 0 and p > 1");
    const double q = p / (p - 1.0);
    const double rhs = std::pow(a, p) / p + std::pow(b, q) / q;
    return a * b <= rhs + 1e-12 * std::max(1.0, rhs);
}

}  // namespace detflow
