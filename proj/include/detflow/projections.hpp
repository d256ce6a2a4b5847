#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "detflow/field.hpp"

namespace detflow {

/// Finite-dimensional projection onto determining data. Modal keeps the
/// Fourier modes with |k| <= k_cut; volume replaces the field by its
/// cell averages on an m x m partition of the box.
class ProjectionOperator {
public:
    enum class Kind { Modal, Volume };

    static ProjectionOperator modal(int k_cut) {
        if (k_cut < 1) throw PreconditionError("modal projection needs k_cut >= 1");
        return ProjectionOperator(Kind::Modal, k_cut);
    }
    static ProjectionOperator volume(int m) {
        if (m < 1) throw PreconditionError("volume projection needs m >= 1");
        return ProjectionOperator(Kind::Volume, m);
    }

    Kind kind() const { return kind_; }
    int parameter() const { return param_; }

    /// Number of determining functionals N.
    int dimension(int n) const {
        if (kind_ == Kind::Volume) return param_ * param_;
        int count = 0;
        for (int i = 0; i < n; ++i) {
            const double kx = wavenumber(i, n);
            for (int j = 0; j < n; ++j) {
                const double ky = wavenumber(j, n);
                const double k2 = kx * kx + ky * ky;
                if (k2 > 0.0 && k2 <= double(param_) * param_) ++count;
            }
        }
        return count;
    }

    SpectralField apply(const SpectralField& u) const {
        const int n = u.resolution();
        if (kind_ == Kind::Modal) {
            if (2 * param_ >= n)
                throw PreconditionError("modal projection: k_cut must be < n/2");
            SpectralField out = u;
            for (int c = 0; c < 2; ++c)
                for (int i = 0; i < n; ++i) {
                    const double kx = wavenumber(i, n);
                    for (int j = 0; j < n; ++j) {
                        const double ky = wavenumber(j, n);
                        if (kx * kx + ky * ky > double(param_) * param_)
                            out.at(c, i, j) = {0.0, 0.0};
                    }
                }
            return out;
        }
        if (n % param_ != 0)
            throw PreconditionError("volume projection: m must divide the resolution");
        const int cell = n / param_;
        SpectralField out(n);
        for (int c = 0; c < 2; ++c) {
            std::vector<std::complex<double>> buf = u.component(c);
            Fft2d::get(n).backward(buf.data());
            for (int ci = 0; ci < param_; ++ci)
                for (int cj = 0; cj < param_; ++cj) {
                    double s = 0.0;
                    for (int i = ci * cell; i < (ci + 1) * cell; ++i)
                        for (int j = cj * cell; j < (cj + 1) * cell; ++j)
                            s += buf[ScalarField::idx(i, j, n)].real();
                    s /= double(cell) * cell;
                    for (int i = ci * cell; i < (ci + 1) * cell; ++i)
                        for (int j = cj * cell; j < (cj + 1) * cell; ++j)
                            buf[ScalarField::idx(i, j, n)] = {s, 0.0};
                }
            Fft2d::get(n).forward(buf.data());
            out.component(c) = std::move(buf);
        }
        return out;
    }

    SpectralField remainder(const SpectralField& u) const {
        SpectralField r = u;
        r -= apply(u);
        return r;
    }

    /// H norm of the part the functionals miss.
    double error_norm(const SpectralField& u) const {
        const SpectralField r = remainder(u);
        double s = 0.0;
        for (int c = 0; c < 2; ++c)
            for (const auto& z : r.component(c)) s += std::norm(z);
        return std::sqrt(s);
    }

    /// Constant of the a priori tail bound ||u - P u|| <= C1 N^{-1/2} ||u||_V.
    double analytic_c1(int n) const {
        if (kind_ == Kind::Modal) {
            // tail of the spectrum: ||R u|| <= k_cut^{-1} ||u||_V, N modes kept
            return std::sqrt(double(dimension(n))) / param_;
        }
        // per-cell mean-value deviation bound with the cell diameter over pi
        return 2.0 * std::sqrt(2.0);
    }

    std::string describe() const {
        return (kind_ == Kind::Modal ? "modal k_cut=" : "volume m=") +
               std::to_string(param_);
    }

private:
    ProjectionOperator(Kind k, int p) : kind_(k), param_(p) {}
    Kind kind_;
    int param_;
};

/// Measured and analytic approximation constants for a projection family.
struct ProjectionCertificate {
    ProjectionOperator::Kind kind = ProjectionOperator::Kind::Modal;
    std::vector<int> parameters;   ///< k_cut or m, ascending
    std::vector<int> dimensions;   ///< N per family member
    std::vector<double> max_ratio; ///< max over samples of ||R u|| / ||u||_V
    double fitted_c1 = 0.0;
    double fitted_gamma = 0.0;
    double analytic_c1 = 0.0;
    double c1 = 0.0;     ///< certified: max(fitted, analytic)
    double gamma = 0.5;  ///< certified decay rate
    int samples = 0;
    std::uint64_t seed = 0;
};

/// Measure C1 and gamma by probing the family with random solenoidal fields
/// peaked on log-spaced shells, then fitting log(ratio) against log(N).
inline ProjectionCertificate estimate_constants(
    ProjectionOperator::Kind kind, const std::vector<int>& parameters, int n,
    int samples, std::uint64_t seed) {
    if (parameters.size() < 4)
        throw PreconditionError("estimate_constants: need >= 4 family members");
    if (samples < 4)
        throw PreconditionError("estimate_constants: need >= 4 samples");
    ProjectionCertificate cert;
    cert.kind = kind;
    cert.parameters = parameters;
    cert.samples = samples;
    cert.seed = seed;

    // Shell-peaked samples with log-uniform peaks cover the whole range of
    // ||R u|| / ||u||_V ratios; flat-spectrum samples would not.
    const double kmax_peak = n / 3.0;
    std::vector<SpectralField> probes;
    probes.reserve(samples);
    for (int s = 0; s < samples; ++s) {
        const double frac = (s + 0.5) / samples;
        const double kp = std::exp(std::log(1.5) +
                                   frac * (std::log(kmax_peak) - std::log(1.5)));
        probes.push_back(make_shell_peaked(n, seed + 1000 * (s + 1), kp,
                                           std::max(1.0, kp / 4.0), 1.0));
    }

    for (int p : parameters) {
        ProjectionOperator op = kind == ProjectionOperator::Kind::Modal
                                    ? ProjectionOperator::modal(p)
                                    : ProjectionOperator::volume(p);
        cert.dimensions.push_back(op.dimension(n));
        double worst = 0.0;
        for (const auto& u : probes) {
            const auto norms = compute_norms(u);
            if (norms.v_norm <= 0.0) continue;
            worst = std::max(worst, op.error_norm(u) / norms.v_norm);
        }
        cert.max_ratio.push_back(worst);
        cert.analytic_c1 = std::max(cert.analytic_c1, op.analytic_c1(n));
    }

    // least-squares fit log r = log C1 - gamma log N
    const size_t m = parameters.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < m; ++i) {
        const double x = std::log(double(cert.dimensions[i]));
        const double y = std::log(cert.max_ratio[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / m;
    cert.fitted_gamma = -slope;
    cert.fitted_c1 = std::exp(intercept);
    cert.gamma = std::min(cert.fitted_gamma, 0.5);
    cert.c1 = std::max(cert.fitted_c1, cert.analytic_c1);
    return cert;
}

/// Check the two squared approximation inequalities for one field.
struct ApproxCheck {
    double lhs_upper = 0.0, rhs_upper = 0.0;  ///< ||u||^2 <= rhs
    double lhs_lower = 0.0, rhs_lower = 0.0;  ///< ||u||_V^2 >= rhs
    bool upper_ok = false, lower_ok = false;
    bool ok() const { return upper_ok && lower_ok; }
};

inline ApproxCheck check_approx_inequalities(const ProjectionOperator& op,
                                             const SpectralField& u, double c1,
                                             double gamma) {
    const auto norms = compute_norms(u);
    const double N = double(op.dimension(u.resolution()));
    const SpectralField pu = op.apply(u);
    double r2 = 0.0;  // squared H norm of the projected part
    for (int c = 0; c < 2; ++c)
        for (const auto& z : pu.component(c)) r2 += std::norm(z);
    const double r = std::sqrt(r2);
    const double h2 = norms.h_norm * norms.h_norm;
    const double v2 = norms.v_norm * norms.v_norm + h2;  // full H1 norm squared
    const double n2g = std::pow(N, 2.0 * gamma);
    ApproxCheck chk;
    chk.lhs_upper = h2;
    chk.rhs_upper = 2.0 * c1 * c1 / n2g * v2 + 2.0 * r * r;
    chk.lhs_lower = v2;
    chk.rhs_lower = n2g / (2.0 * c1 * c1) * h2 - n2g / (c1 * c1) * r * r;
    const double tol = 1e-12 * std::max(1.0, v2);
    chk.upper_ok = chk.lhs_upper <= chk.rhs_upper + tol;
    chk.lower_ok = chk.lhs_lower >= chk.rhs_lower - tol;
    return chk;
}

}  // namespace detflow
