#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <iostream>
#include <random>
#include <vector>

#include "detflow/errors.hpp"
#include "detflow/fft.hpp"

namespace detflow {

inline constexpr double kPi = 3.14159265358979323846;

/// Smallest Stokes eigenvalue on the 2pi-periodic zero-mean box.
inline double stokes_lambda1() { return 1.0; }

/// Best Poincare constant c_rho = lambda_1^{-1/2}.
inline double poincare_constant() { return 1.0; }

/// Signed wavenumber for FFT index i on an n-grid.
inline int wavenumber(int i, int n) { return i <= n / 2 ? i : i - n; }

/// Deterministic standard normal draws, independent of the standard
/// library's distribution implementation.
class NormalDraw {
public:
    explicit NormalDraw(std::uint64_t seed) : eng_(seed) {}
    double operator()() {
        if (have_) {
            have_ = false;
            return cached_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        cached_ = r * std::sin(2.0 * kPi * u2);
        have_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }
    double uniform() { return std::ldexp(static_cast<double>(eng_() >> 11), -53); }

private:
    std::mt19937_64 eng_;
    bool have_ = false;
    double cached_ = 0.0;
};

/// L2, H1-seminorm and dual norms of a zero-mean field.
struct NormReport {
    double h_norm = 0.0;      ///< Parseval L2 norm
    double v_norm = 0.0;      ///< H1 semi-norm
    double vdual_norm = 0.0;  ///< dual norm ||A^{-1/2} . ||
};

/// Real scalar field on the periodic box, stored spectrally.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(int n) : n_(n), coef_(static_cast<size_t>(n) * n) {}

    static ScalarField from_function(int n, const std::function<double(double, double)>& f) {
        ScalarField s(n);
        const double h = 2.0 * kPi / n;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                s.coef_[idx(i, j, n)] = f(i * h, j * h);
        Fft2d::get(n).forward(s.coef_.data());
        return s;
    }

    int resolution() const { return n_; }
    std::complex<double>& at(int i, int j) { return coef_[idx(i, j, n_)]; }
    const std::complex<double>& at(int i, int j) const { return coef_[idx(i, j, n_)]; }
    const std::vector<std::complex<double>>& coefficients() const { return coef_; }
    std::vector<std::complex<double>>& coefficients() { return coef_; }

    std::vector<double> to_physical() const {
        std::vector<std::complex<double>> buf = coef_;
        Fft2d::get(n_).backward(buf.data());
        std::vector<double> out(buf.size());
        for (size_t i = 0; i < buf.size(); ++i) out[i] = buf[i].real();
        return out;
    }

    double min_value() const {
        auto v = to_physical();
        return *std::min_element(v.begin(), v.end());
    }
    double max_value() const {
        auto v = to_physical();
        return *std::max_element(v.begin(), v.end());
    }
    double mean() const { return coef_.empty() ? 0.0 : coef_[0].real(); }

    static size_t idx(int i, int j, int n) { return static_cast<size_t>(i) * n + j; }

private:
    int n_ = 0;
    std::vector<std::complex<double>> coef_;
};

/// Two-component divergence-free-capable velocity field in Fourier space on
/// the 2pi-periodic box. Coefficients follow the FFT index order with signed
/// wavenumbers |k_j| <= n/2; the mean mode is kept pinned to zero.
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(int n) : n_(n) {
        if (n < 8 || n % 2 != 0)
            throw StructuralError("resolution must be even and >= 8");
        for (auto& c : coef_) c.assign(static_cast<size_t>(n) * n, {0.0, 0.0});
    }

    int resolution() const { return n_; }

    std::complex<double>& at(int comp, int i, int j) {
        return coef_[comp][ScalarField::idx(i, j, n_)];
    }
    const std::complex<double>& at(int comp, int i, int j) const {
        return coef_[comp][ScalarField::idx(i, j, n_)];
    }
    /// Coefficient addressed by signed wavenumbers.
    std::complex<double>& mode(int comp, int kx, int ky) {
        return at(comp, (kx + n_) % n_, (ky + n_) % n_);
    }
    const std::complex<double>& mode(int comp, int kx, int ky) const {
        return at(comp, (kx + n_) % n_, (ky + n_) % n_);
    }

    const std::vector<std::complex<double>>& component(int c) const { return coef_[c]; }
    std::vector<std::complex<double>>& component(int c) { return coef_[c]; }

    void pin_mean() {
        for (auto& c : coef_) c[0] = {0.0, 0.0};
    }

    /// Symmetrize so the physical field is exactly real, and drop the
    /// un-paired Nyquist lines.
    void enforce_conjugate_symmetry() {
        for (auto& c : coef_) {
            for (int i = 0; i < n_; ++i) {
                for (int j = 0; j < n_; ++j) {
                    const int i2 = (n_ - i) % n_, j2 = (n_ - j) % n_;
                    if (std::make_pair(i, j) > std::make_pair(i2, j2)) continue;
                    auto a = c[ScalarField::idx(i, j, n_)];
                    auto b = c[ScalarField::idx(i2, j2, n_)];
                    auto avg = 0.5 * (a + std::conj(b));
                    c[ScalarField::idx(i, j, n_)] = avg;
                    c[ScalarField::idx(i2, j2, n_)] = std::conj(avg);
                }
            }
            for (int i = 0; i < n_; ++i) {
                c[ScalarField::idx(n_ / 2, i, n_)] = {0.0, 0.0};
                c[ScalarField::idx(i, n_ / 2, n_)] = {0.0, 0.0};
            }
        }
    }

    std::vector<double> to_physical(int comp) const {
        std::vector<std::complex<double>> buf = coef_[comp];
        Fft2d::get(n_).backward(buf.data());
        std::vector<double> out(buf.size());
        for (size_t i = 0; i < buf.size(); ++i) out[i] = buf[i].real();
        return out;
    }

    static SpectralField from_physical(int n, const std::vector<double>& u1,
                                       const std::vector<double>& u2) {
        SpectralField f(n);
        const std::vector<double>* src[2] = {&u1, &u2};
        for (int c = 0; c < 2; ++c) {
            auto& dst = f.coef_[c];
            for (size_t i = 0; i < dst.size(); ++i) dst[i] = {(*src[c])[i], 0.0};
            Fft2d::get(n).forward(dst.data());
        }
        f.enforce_conjugate_symmetry();
        f.pin_mean();
        return f;
    }

    static SpectralField from_function(
        int n, const std::function<double(double, double)>& u1,
        const std::function<double(double, double)>& u2) {
        const double h = 2.0 * kPi / n;
        std::vector<double> a(static_cast<size_t>(n) * n), b(a.size());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                a[ScalarField::idx(i, j, n)] = u1(i * h, j * h);
                b[ScalarField::idx(i, j, n)] = u2(i * h, j * h);
            }
        return from_physical(n, a, b);
    }

    double max_speed() const {
        auto u = to_physical(0);
        auto v = to_physical(1);
        double m = 0.0;
        for (size_t i = 0; i < u.size(); ++i)
            m = std::max(m, std::sqrt(u[i] * u[i] + v[i] * v[i]));
        return m;
    }

    /// sqrt(sum_k |k . u_hat(k)|^2), the spectral divergence norm.
    double divergence_norm() const {
        double s = 0.0;
        for (int i = 0; i < n_; ++i) {
            const int kx = wavenumber(i, n_);
            for (int j = 0; j < n_; ++j) {
                const int ky = wavenumber(j, n_);
                const auto d = static_cast<double>(kx) * at(0, i, j) +
                               static_cast<double>(ky) * at(1, i, j);
                s += std::norm(d);
            }
        }
        return std::sqrt(s);
    }

    bool is_finite() const {
        for (const auto& c : coef_)
            for (const auto& z : c)
                if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        return true;
    }

    SpectralField& operator+=(const SpectralField& o) {
        check_same_resolution(o);
        for (int c = 0; c < 2; ++c)
            for (size_t i = 0; i < coef_[c].size(); ++i) coef_[c][i] += o.coef_[c][i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        check_same_resolution(o);
        for (int c = 0; c < 2; ++c)
            for (size_t i = 0; i < coef_[c].size(); ++i) coef_[c][i] -= o.coef_[c][i];
        return *this;
    }
    SpectralField& operator*=(double s) {
        for (auto& c : coef_)
            for (auto& z : c) z *= s;
        return *this;
    }
    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

    void check_same_resolution(const SpectralField& o) const {
        if (n_ != o.n_) throw StructuralError("resolution mismatch between fields");
    }

private:
    int n_ = 0;
    std::array<std::vector<std::complex<double>>, 2> coef_;
};

/// H inner product (u, v)_H = Re sum_k u_hat(k) . conj(v_hat(k)).
inline double inner_h(const SpectralField& u, const SpectralField& v) {
    u.check_same_resolution(v);
    double s = 0.0;
    for (int c = 0; c < 2; ++c) {
        const auto& a = u.component(c);
        const auto& b = v.component(c);
        for (size_t i = 0; i < a.size(); ++i)
            s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    }
    return s;
}

/// Leray projection onto the divergence-free part; pins the mean mode.
inline SpectralField leray_project(const SpectralField& f) {
    const int n = f.resolution();
    SpectralField out = f;
    for (int i = 0; i < n; ++i) {
        const double kx = wavenumber(i, n);
        for (int j = 0; j < n; ++j) {
            const double ky = wavenumber(j, n);
            const double k2 = kx * kx + ky * ky;
            if (k2 == 0.0) continue;
            const auto dot = (kx * out.at(0, i, j) + ky * out.at(1, i, j)) / k2;
            out.at(0, i, j) -= kx * dot;
            out.at(1, i, j) -= ky * dot;
        }
    }
    out.pin_mean();
    return out;
}

/// H, V and V' norms. The dual norm needs a zero-mean field.
inline NormReport compute_norms(const SpectralField& f) {
    const int n = f.resolution();
    double h2 = 0.0, v2 = 0.0, d2 = 0.0, mean2 = 0.0, peak = 0.0;
    for (int c = 0; c < 2; ++c) {
        mean2 += std::norm(f.at(c, 0, 0));
        for (int i = 0; i < n; ++i) {
            const double kx = wavenumber(i, n);
            for (int j = 0; j < n; ++j) {
                const double ky = wavenumber(j, n);
                const double k2 = kx * kx + ky * ky;
                const double a2 = std::norm(f.at(c, i, j));
                peak = std::max(peak, a2);
                if (k2 == 0.0) continue;
                h2 += a2;
                v2 += k2 * a2;
                d2 += a2 / k2;
            }
        }
    }
    if (mean2 > 1e-24 * std::max(peak, 1e-300))
        throw PreconditionError("nonzero mean mode; V' norm undefined here");
    return {std::sqrt(h2), std::sqrt(v2), std::sqrt(d2)};
}

/// Seeded random solenoidal field with a given spectral band and H norm.
inline SpectralField make_random_solenoidal(int n, std::uint64_t seed, int kmin,
                                            int kmax, double target_h,
                                            double spectral_slope = 1.0) {
    SpectralField f(n);
    NormalDraw rng(seed);
    for (int i = 0; i < n; ++i) {
        const int kx = wavenumber(i, n);
        for (int j = 0; j < n; ++j) {
            const int ky = wavenumber(j, n);
            const double kk = std::sqrt(double(kx) * kx + double(ky) * ky);
            if (kk < kmin || kk > kmax) continue;
            // One solenoidal complex amplitude per mode along k-perp.
            const std::complex<double> amp(rng(), rng());
            const double scale = std::pow(kk, -spectral_slope);
            f.at(0, i, j) = amp * (-ky / kk) * scale;
            f.at(1, i, j) = amp * (kx / kk) * scale;
        }
    }
    f.enforce_conjugate_symmetry();
    f.pin_mean();
    f = leray_project(f);
    const double h = compute_norms(f).h_norm;
    if (h > 0.0 && target_h > 0.0) f *= target_h / h;
    return f;
}

/// Random field concentrated on a single spectral shell around k_peak.
inline SpectralField make_shell_peaked(int n, std::uint64_t seed, double k_peak,
                                       double width, double target_h = 1.0) {
    SpectralField f(n);
    NormalDraw rng(seed);
    const int kcap = n / 2 - 1;
    for (int i = 0; i < n; ++i) {
        const int kx = wavenumber(i, n);
        for (int j = 0; j < n; ++j) {
            const int ky = wavenumber(j, n);
            const double kk = std::sqrt(double(kx) * kx + double(ky) * ky);
            if (kk < 1.0 || kk > kcap) continue;
            const double env = std::exp(-0.5 * std::pow((kk - k_peak) / width, 2));
            if (env < 1e-14) continue;
            const std::complex<double> amp(rng(), rng());
            f.at(0, i, j) = amp * (-ky / kk) * env;
            f.at(1, i, j) = amp * (kx / kk) * env;
        }
    }
    f.enforce_conjugate_symmetry();
    f.pin_mean();
    f = leray_project(f);
    const double h = compute_norms(f).h_norm;
    if (h > 0.0) f *= target_h / h;
    return f;
}

/// u = A (sin x cos y, -cos x sin y), the steady-decay test vortex.
inline SpectralField taylor_green(int n, double amplitude = 1.0) {
    return SpectralField::from_function(
        n, [=](double x, double y) { return amplitude * std::sin(x) * std::cos(y); },
        [=](double x, double y) { return -amplitude * std::cos(x) * std::sin(y); });
}

/// Single solenoidal mode pair at +-k with a real physical profile:
/// u = amplitude * k_perp/|k| * cos(k.x).
inline SpectralField single_mode(int n, int kx, int ky, double amplitude = 1.0) {
    SpectralField f(n);
    const double kk = std::sqrt(double(kx) * kx + double(ky) * ky);
    if (kk == 0.0) throw PreconditionError("single_mode needs k != 0");
    const std::complex<double> half(0.5 * amplitude, 0.0);
    f.mode(0, kx, ky) += half * (-ky / kk);
    f.mode(1, kx, ky) += half * (kx / kk);
    f.mode(0, -kx, -ky) += std::conj(half * (-ky / kk));
    f.mode(1, -kx, -ky) += std::conj(half * (kx / kk));
    return f;
}

/// Snapshot format: CSV rows (k_x, k_y, Re u1, Im u1, Re u2, Im u2),
/// one row per retained wavevector, ASCII, little-endian-free.
inline void write_snapshot(std::ostream& os, const SpectralField& f) {
    const int n = f.resolution();
    os << "# detflow spectral snapshot, n=" << n << "\n";
    os << "kx,ky,re_u1,im_u1,re_u2,im_u2\n";
    os.precision(17);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const auto& a = f.at(0, i, j);
            const auto& b = f.at(1, i, j);
            if (std::norm(a) == 0.0 && std::norm(b) == 0.0) continue;
            os << wavenumber(i, n) << ',' << wavenumber(j, n) << ',' << a.real()
               << ',' << a.imag() << ',' << b.real() << ',' << b.imag() << '\n';
        }
}

inline SpectralField read_snapshot(std::istream& is) {
    std::string line;
    int n = 0;
    while (std::getline(is, line)) {
        if (line.rfind("# detflow spectral snapshot", 0) == 0) {
            n = std::stoi(line.substr(line.find("n=") + 2));
            break;
        }
    }
    if (n == 0) throw StructuralError("not a detflow snapshot");
    std::getline(is, line);  // column header
    SpectralField f(n);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        int kx, ky;
        double ra, ia, rb, ib;
        if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf,%lf", &kx, &ky, &ra, &ia,
                        &rb, &ib) != 6)
            throw StructuralError("malformed snapshot row: " + line);
        f.mode(0, kx, ky) = {ra, ia};
        f.mode(1, kx, ky) = {rb, ib};
    }
    return f;
}

}  // namespace detflow
