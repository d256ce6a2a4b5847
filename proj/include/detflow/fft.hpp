#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace detflow {

/// Cached complex-to-complex 2D transforms for one square grid size.
///
/// Plans are created once per size with FFTW_MEASURE on internally aligned
/// scratch; callers pass ordinary buffers which are staged through the
/// scratch, so alignment never matters on the caller side. The forward
/// direction includes the 1/n^2 factor, i.e. it maps collocation values
/// u(x_j) to coefficients u_hat(k) in the convention
///   u(x_j) = sum_k u_hat(k) e^{i k.x_j}.
class Fft2d {
public:
    explicit Fft2d(int n) : n_(n) {
        const size_t m = static_cast<size_t>(n) * n;
        scratch_ = static_cast<fftw_complex*>(
            fftw_malloc(sizeof(fftw_complex) * m));
        fwd_ = fftw_plan_dft_2d(n, n, scratch_, scratch_, FFTW_FORWARD,
                                FFTW_MEASURE);
        bwd_ = fftw_plan_dft_2d(n, n, scratch_, scratch_, FFTW_BACKWARD,
                                FFTW_MEASURE);
    }
    ~Fft2d() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(scratch_);
    }
    Fft2d(const Fft2d&) = delete;
    Fft2d& operator=(const Fft2d&) = delete;

    /// Physical values -> spectral coefficients (in place, normalized).
    void forward(std::complex<double>* data) const {
        const size_t m = static_cast<size_t>(n_) * n_;
        std::lock_guard<std::mutex> lock(mu_);
        std::memcpy(scratch_, data, sizeof(fftw_complex) * m);
        fftw_execute(fwd_);
        const double s = 1.0 / static_cast<double>(m);
        auto* out = reinterpret_cast<std::complex<double>*>(scratch_);
        for (size_t i = 0; i < m; ++i) data[i] = out[i] * s;
    }

    /// Spectral coefficients -> physical values (in place).
    void backward(std::complex<double>* data) const {
        const size_t m = static_cast<size_t>(n_) * n_;
        std::lock_guard<std::mutex> lock(mu_);
        std::memcpy(scratch_, data, sizeof(fftw_complex) * m);
        fftw_execute(bwd_);
        std::memcpy(data, scratch_, sizeof(fftw_complex) * m);
    }

    static const Fft2d& get(int n) {
        static std::mutex mu;
        static std::map<int, std::unique_ptr<Fft2d>> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto& slot = cache[n];
        if (!slot) slot = std::make_unique<Fft2d>(n);
        return *slot;
    }

private:
    int n_;
    fftw_complex* scratch_;
    fftw_plan fwd_;
    fftw_plan bwd_;
    mutable std::mutex mu_;
};

}  // namespace detflow
