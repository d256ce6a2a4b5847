// Independent numerical oracles used by the test suite. Everything here
// avoids the library's spectral identities: fields are evaluated by direct
// trigonometric summation over their nonzero modes, derivatives come from
// high-order periodic finite differences on a refined grid, and integrals
// use adaptive or trapezoid quadrature.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "detflow/field.hpp"

namespace oracles {

using detflow::ScalarField;
using detflow::SpectralField;
using detflow::kPi;
using detflow::wavenumber;

struct Mode {
    double kx, ky;
    std::complex<double> c;
};

inline std::vector<Mode> nonzero_modes(const std::vector<std::complex<double>>& coef,
                                       int n) {
    std::vector<Mode> out;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const auto& z = coef[ScalarField::idx(i, j, n)];
            if (std::abs(z) > 0.0)
                out.push_back({double(wavenumber(i, n)),
                               double(wavenumber(j, n)), z});
        }
    return out;
}

/// Direct evaluation of sum c_k e^{i k.x} on an M x M grid.
inline std::vector<double> eval_grid(const std::vector<Mode>& modes, int M) {
    std::vector<double> out(static_cast<size_t>(M) * M, 0.0);
    const double h = 2.0 * kPi / M;
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) {
            std::complex<double> s = 0.0;
            for (const auto& m : modes)
                s += m.c * std::exp(std::complex<double>(
                         0.0, m.kx * i * h + m.ky * j * h));
            out[static_cast<size_t>(i) * M + j] = s.real();
        }
    return out;
}

inline std::vector<double> eval_component(const SpectralField& u, int c, int M) {
    return eval_grid(nonzero_modes(u.component(c), u.resolution()), M);
}
inline std::vector<double> eval_scalar(const ScalarField& s, int M) {
    return eval_grid(nonzero_modes(s.coefficients(), s.resolution()), M);
}

/// 8th-order centered periodic finite difference along one axis.
inline std::vector<double> fd8(const std::vector<double>& f, int M, int axis) {
    static const double w[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
    const double h = 2.0 * kPi / M;
    std::vector<double> out(f.size(), 0.0);
    auto at = [&](int i, int j) {
        i = ((i % M) + M) % M;
        j = ((j % M) + M) % M;
        return f[static_cast<size_t>(i) * M + j];
    };
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) {
            double s = 0.0;
            for (int o = 1; o <= 4; ++o) {
                const double df = axis == 0 ? at(i + o, j) - at(i - o, j)
                                            : at(i, j + o) - at(i, j - o);
                s += w[o - 1] * df;
            }
            out[static_cast<size_t>(i) * M + j] = s / h;
        }
    return out;
}

inline double grid_mean(const std::vector<double>& f) {
    double s = 0.0;
    for (double x : f) s += x;
    return s / f.size();
}

/// Normalized L2 norm via grid quadrature: sqrt(mean |f|^2).
inline double oracle_h_norm(const SpectralField& u, int M) {
    const auto a = eval_component(u, 0, M), b = eval_component(u, 1, M);
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * a[i] + b[i] * b[i];
    return std::sqrt(s / a.size());
}

/// H1 seminorm via FD8 gradients on the refined grid.
inline double oracle_v_norm(const SpectralField& u, int M) {
    double s = 0.0;
    for (int c = 0; c < 2; ++c) {
        const auto f = eval_component(u, c, M);
        for (int axis = 0; axis < 2; ++axis) {
            const auto g = fd8(f, M, axis);
            for (double x : g) s += x * x;
        }
    }
    return std::sqrt(s / (static_cast<double>(M) * M));
}

/// Trilinear advection form ((u.grad v), w) by grid quadrature; exact for
/// band-limited inputs once M exceeds the total bandwidth.
inline double oracle_trilinear(const SpectralField& u, const SpectralField& v,
                               const SpectralField& w, int M) {
    double s = 0.0;
    const auto u0 = eval_component(u, 0, M), u1 = eval_component(u, 1, M);
    for (int c = 0; c < 2; ++c) {
        const auto vc = eval_component(v, c, M);
        const auto wc = eval_component(w, c, M);
        const auto dvx = fd8(vc, M, 0), dvy = fd8(vc, M, 1);
        for (size_t i = 0; i < vc.size(); ++i)
            s += (u0[i] * dvx[i] + u1[i] * dvy[i]) * wc[i];
    }
    return s / (static_cast<double>(M) * M);
}

/// (grad nu . grad u, w) by grid quadrature.
inline double oracle_gradnu_gradu(const ScalarField& nu, const SpectralField& u,
                                  const SpectralField& w, int M) {
    const auto nv = eval_scalar(nu, M);
    const auto dnx = fd8(nv, M, 0), dny = fd8(nv, M, 1);
    double s = 0.0;
    for (int c = 0; c < 2; ++c) {
        const auto uc = eval_component(u, c, M);
        const auto wc = eval_component(w, c, M);
        const auto dux = fd8(uc, M, 0), duy = fd8(uc, M, 1);
        for (size_t i = 0; i < uc.size(); ++i)
            s += (dnx[i] * dux[i] + dny[i] * duy[i]) * wc[i];
    }
    return s / (static_cast<double>(M) * M);
}

/// (grad(nu u), grad w) by grid quadrature.
inline double oracle_a_nu(const ScalarField& nu, const SpectralField& u,
                          const SpectralField& w, int M) {
    const auto nv = eval_scalar(nu, M);
    double s = 0.0;
    for (int c = 0; c < 2; ++c) {
        auto uc = eval_component(u, c, M);
        for (size_t i = 0; i < uc.size(); ++i) uc[i] *= nv[i];
        const auto wc = eval_component(w, c, M);
        for (int axis = 0; axis < 2; ++axis) {
            const auto a = fd8(uc, M, axis);
            const auto b = fd8(wc, M, axis);
            for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        }
    }
    return s / (static_cast<double>(M) * M);
}

// ---------------------------------------------------------------------------
// quadrature and ODE oracles

inline double adaptive_simpson_rec(const std::function<double(double)>& f,
                                   double a, double b, double fa, double fm,
                                   double fb, double whole, double tol,
                                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol,
                                depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol,
                                depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-12) {
    if (b <= a) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

/// Dense RK4 solution of y' = g(t, y) on a uniform fine grid, sampled at the
/// requested times (which must lie on the fine grid up to round-off).
inline std::vector<double> ode_rk4(const std::function<double(double, double)>& g,
                                   double y0, const std::vector<double>& times,
                                   int refine = 64) {
    std::vector<double> out;
    out.reserve(times.size());
    double y = y0, t = times.front();
    out.push_back(y);
    for (size_t i = 1; i < times.size(); ++i) {
        const double dt = (times[i] - times[i - 1]) / refine;
        for (int s = 0; s < refine; ++s) {
            const double k1 = g(t, y);
            const double k2 = g(t + 0.5 * dt, y + 0.5 * dt * k1);
            const double k3 = g(t + 0.5 * dt, y + 0.5 * dt * k2);
            const double k4 = g(t + dt, y + dt * k3);
            y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += dt;
        }
        t = times[i];
        out.push_back(y);
    }
    return out;
}

}  // namespace oracles
