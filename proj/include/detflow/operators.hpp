#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "detflow/field.hpp"

namespace detflow {

/// Value of a bilinear/trilinear form together with an aliasing indicator
/// (spectral content the 2/3 truncation removed from the last product).
struct FormValue {
    double value = 0.0;
    double residual_estimate = 0.0;
};

namespace detail {

inline int dealias_limit(int n) { return n / 3; }

inline bool in_band(int kx, int ky, int limit) {
    return std::abs(kx) <= limit && std::abs(ky) <= limit;
}

/// Zero all modes outside the 2/3 band; returns the removed L2 content.
inline double truncate_band(std::vector<std::complex<double>>& c, int n) {
    const int lim = dealias_limit(n);
    double removed = 0.0;
    for (int i = 0; i < n; ++i) {
        const int kx = wavenumber(i, n);
        for (int j = 0; j < n; ++j) {
            const int ky = wavenumber(j, n);
            if (in_band(kx, ky, lim)) continue;
            auto& z = c[ScalarField::idx(i, j, n)];
            removed += std::norm(z);
            z = {0.0, 0.0};
        }
    }
    return std::sqrt(removed);
}

inline std::vector<double> to_physical_copy(std::vector<std::complex<double>> c, int n) {
    Fft2d::get(n).backward(c.data());
    std::vector<double> out(c.size());
    for (size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
    return out;
}

/// Spectral partial derivative along axis (0 = x, 1 = y).
inline std::vector<std::complex<double>> derivative(
    const std::vector<std::complex<double>>& c, int n, int axis) {
    std::vector<std::complex<double>> out(c.size());
    for (int i = 0; i < n; ++i) {
        const int kx = wavenumber(i, n);
        for (int j = 0; j < n; ++j) {
            const int ky = wavenumber(j, n);
            const double k = axis == 0 ? kx : ky;
            out[ScalarField::idx(i, j, n)] =
                std::complex<double>(0.0, k) * c[ScalarField::idx(i, j, n)];
        }
    }
    return out;
}

/// Dealiased pointwise product of two spectral scalars, back in spectral
/// space. Both inputs are truncated to the 2/3 band first, so the retained
/// band of the result is alias-free. Records removed content in *residual.
inline std::vector<std::complex<double>> dealiased_product(
    std::vector<std::complex<double>> a, std::vector<std::complex<double>> b,
    int n, double* residual = nullptr) {
    truncate_band(a, n);
    truncate_band(b, n);
    const auto& fft = Fft2d::get(n);
    fft.backward(a.data());
    fft.backward(b.data());
    for (size_t i = 0; i < a.size(); ++i)
        a[i] = {a[i].real() * b[i].real(), 0.0};
    fft.forward(a.data());
    const double removed = truncate_band(a, n);
    if (residual) *residual += removed;
    return a;
}

inline void require_solenoidal(const SpectralField& u, const char* who) {
    const double h = compute_norms(u).h_norm;
    if (u.divergence_norm() > 1e-9 * std::max(h, 1e-300) + 1e-14)
        throw PreconditionError(std::string(who) + ": input is not solenoidal");
}

/// (u.grad)v, one velocity component at a time, dealiased.
inline std::vector<std::complex<double>> advect_component(
    const SpectralField& u, const SpectralField& v, int comp, int n,
    double* residual) {
    auto t1 = dealiased_product(u.component(0), derivative(v.component(comp), n, 0),
                                n, residual);
    auto t2 = dealiased_product(u.component(1), derivative(v.component(comp), n, 1),
                                n, residual);
    for (size_t i = 0; i < t1.size(); ++i) t1[i] += t2[i];
    return t1;
}

/// Truncated spectral derivative written into a preallocated buffer.
inline void derivative_truncated(const std::vector<std::complex<double>>& c,
                                 int n, int axis,
                                 std::vector<std::complex<double>>& out) {
    const int lim = dealias_limit(n);
    for (int i = 0; i < n; ++i) {
        const int kx = wavenumber(i, n);
        for (int j = 0; j < n; ++j) {
            const int ky = wavenumber(j, n);
            const size_t id = ScalarField::idx(i, j, n);
            if (!in_band(kx, ky, lim)) {
                out[id] = {0.0, 0.0};
                continue;
            }
            const double k = axis == 0 ? kx : ky;
            const auto& z = c[id];
            out[id] = {-k * z.imag(), k * z.real()};
        }
    }
}

/// Reusable buffers for the fused advection evaluation.
struct AdvectionWorkspace {
    std::vector<std::complex<double>> u0p, u1p, d;
    void resize(size_t m) {
        u0p.resize(m);
        u1p.resize(m);
        d.resize(m);
    }
};

/// B(u,u) = P[(u.grad)u] written into `out`, sharing the physical-space
/// transforms of u across both components (8 transforms per call, no
/// allocations after the workspace warms up). Assumes u is solenoidal;
/// the checked public wrapper is nonlinear_B.
inline void nonlinear_into(const SpectralField& u, SpectralField& out,
                           AdvectionWorkspace& ws) {
    const int n = u.resolution();
    const size_t m = static_cast<size_t>(n) * n;
    ws.resize(m);
    const auto& fft = Fft2d::get(n);
    ws.u0p = u.component(0);
    truncate_band(ws.u0p, n);
    fft.backward(ws.u0p.data());
    ws.u1p = u.component(1);
    truncate_band(ws.u1p, n);
    fft.backward(ws.u1p.data());
    for (int c = 0; c < 2; ++c) {
        auto& acc = out.component(c);
        derivative_truncated(u.component(c), n, 0, ws.d);
        fft.backward(ws.d.data());
        for (size_t i = 0; i < m; ++i)
            acc[i] = {ws.u0p[i].real() * ws.d[i].real(), 0.0};
        derivative_truncated(u.component(c), n, 1, ws.d);
        fft.backward(ws.d.data());
        for (size_t i = 0; i < m; ++i)
            acc[i] += ws.u1p[i].real() * ws.d[i].real();
        fft.forward(acc.data());
        truncate_band(acc, n);
    }
    // Divergence-free projection plus mean-mode pin, in place.
    auto& a0 = out.component(0);
    auto& a1 = out.component(1);
    for (int i = 0; i < n; ++i) {
        const double kx = wavenumber(i, n);
        for (int j = 0; j < n; ++j) {
            const double ky = wavenumber(j, n);
            const size_t id = ScalarField::idx(i, j, n);
            const double k2 = kx * kx + ky * ky;
            if (k2 == 0.0) {
                a0[id] = {0.0, 0.0};
                a1[id] = {0.0, 0.0};
                continue;
            }
            const std::complex<double> div = (kx * a0[id] + ky * a1[id]) / k2;
            a0[id] -= kx * div;
            a1[id] -= ky * div;
        }
    }
}

}  // namespace detail

/// a(u,v) = (grad u, grad v)_H = sum_k |k|^2 u_hat . conj(v_hat).
inline FormValue bilinear_a(const SpectralField& u, const SpectralField& v) {
    u.check_same_resolution(v);
    const int n = u.resolution();
    double s = 0.0;
    for (int c = 0; c < 2; ++c)
        for (int i = 0; i < n; ++i) {
            const double kx = wavenumber(i, n);
            for (int j = 0; j < n; ++j) {
                const double ky = wavenumber(j, n);
                const auto& a = u.at(c, i, j);
                const auto& b = v.at(c, i, j);
                s += (kx * kx + ky * ky) *
                     (a.real() * b.real() + a.imag() * b.imag());
            }
        }
    return {s, 0.0};
}

/// b(u,v,w) = ((u.grad)v, w)_H with 2/3-rule dealiasing.
inline FormValue trilinear_b(const SpectralField& u, const SpectralField& v,
                             const SpectralField& w) {
    u.check_same_resolution(v);
    u.check_same_resolution(w);
    detail::require_solenoidal(u, "trilinear_b");
    detail::require_solenoidal(v, "trilinear_b");
    detail::require_solenoidal(w, "trilinear_b");
    const int n = u.resolution();
    double residual = 0.0, s = 0.0;
    for (int c = 0; c < 2; ++c) {
        const auto adv = detail::advect_component(u, v, c, n, &residual);
        const auto& wc = w.component(c);
        for (size_t i = 0; i < adv.size(); ++i)
            s += adv[i].real() * wc[i].real() + adv[i].imag() * wc[i].imag();
    }
    return {s, residual};
}

/// B(u,u) = P[(u.grad)u], dealiased, zero-mean, solenoidal.
inline SpectralField nonlinear_B(const SpectralField& u) {
    detail::require_solenoidal(u, "nonlinear_B");
    SpectralField out(u.resolution());
    thread_local detail::AdvectionWorkspace ws;
    detail::nonlinear_into(u, out, ws);
    return out;
}

/// Viscosity-velocity divergence term: P[grad nu . grad u_i], dealiased.
inline SpectralField gradnu_gradu(const ScalarField& nu, const SpectralField& u) {
    const int n = u.resolution();
    if (nu.resolution() != n) throw StructuralError("resolution mismatch nu vs u");
    detail::require_solenoidal(u, "gradnu_gradu");
    if (nu.min_value() <= 0.0)
        throw PreconditionError("gradnu_gradu: viscosity field must stay positive");
    const auto dnx = detail::derivative(nu.coefficients(), n, 0);
    const auto dny = detail::derivative(nu.coefficients(), n, 1);
    SpectralField out(n);
    for (int c = 0; c < 2; ++c) {
        auto t1 = detail::dealiased_product(dnx, detail::derivative(u.component(c), n, 0), n);
        auto t2 = detail::dealiased_product(dny, detail::derivative(u.component(c), n, 1), n);
        for (size_t i = 0; i < t1.size(); ++i) t1[i] += t2[i];
        out.component(c) = std::move(t1);
    }
    out = leray_project(out);
    out.pin_mean();
    return out;
}

/// a_nu(nu,u,v) = (grad[nu u], grad v)_H via dealiased products.
inline FormValue a_nu(const ScalarField& nu, const SpectralField& u,
                      const SpectralField& v) {
    const int n = u.resolution();
    u.check_same_resolution(v);
    if (nu.resolution() != n) throw StructuralError("resolution mismatch nu vs u");
    if (nu.min_value() <= 0.0)
        throw PreconditionError("a_nu: viscosity field must stay positive");
    double residual = 0.0, s = 0.0;
    for (int c = 0; c < 2; ++c) {
        const auto nuu = detail::dealiased_product(nu.coefficients(), u.component(c),
                                                   n, &residual);
        const auto& vc = v.component(c);
        for (int i = 0; i < n; ++i) {
            const double kx = wavenumber(i, n);
            for (int j = 0; j < n; ++j) {
                const double ky = wavenumber(j, n);
                const auto& a = nuu[ScalarField::idx(i, j, n)];
                const auto& b = vc[ScalarField::idx(i, j, n)];
                s += (kx * kx + ky * ky) *
                     (a.real() * b.real() + a.imag() * b.imag());
            }
        }
    }
    return {s, residual};
}

}  // namespace detflow
