#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "bopert/errors.hpp"

namespace bopert {

using Complex = std::complex<double>;

inline constexpr double two_pi = 6.283185307179586476925286766559;

namespace detail {

inline int next_pow2(int n) {
    int p = 1;
    while (p < n) p *= 2;
    return p;
}

/// Fixed-size DFT pair with explicit, unnormalized conventions:
///   forward:  X_k = sum_j x_j exp(-2*pi*i*j*k/P)
///   inverse:  x_j = sum_k X_k exp(+2*pi*i*j*k/P)
/// Not thread-safe; use one instance per thread.
class Dft {
public:
    explicit Dft(int size) : size_(size) {}

    void forward(const std::vector<Complex>& in, std::vector<Complex>& out) {
        fft_.fwd(out, in);
    }

    void inverse(const std::vector<Complex>& in, std::vector<Complex>& out) {
        fft_.inv(out, in);
        const double scale = static_cast<double>(size_);
        for (auto& v : out) v *= scale;
    }

    int size() const noexcept { return size_; }

private:
    int size_;
    Eigen::FFT<double> fft_;
};

} // namespace detail

/// Real-valued function on the torus stored as Fourier coefficients
/// c_n = f^(n), 0 <= n <= N, under the analysis convention
/// f^(n) = (1/2pi) int_0^{2pi} exp(-i n x) f(x) dx.  Negative modes are
/// implied by f^(-n) = conj(f^(n)); keeping only n >= 0 enforces realness
/// structurally.  The mean coefficient c_0 is kept exactly real.
class TorusField {
public:
    explicit TorusField(int modes)
        : modes_(checked_modes(modes)),
          coeffs_(static_cast<std::size_t>(modes) + 1, Complex{0.0, 0.0}) {}

    TorusField(int modes, std::vector<Complex> coeffs)
        : modes_(checked_modes(modes)), coeffs_(std::move(coeffs)) {
        if (coeffs_.size() != static_cast<std::size_t>(modes_) + 1)
            throw Error("TorusField: coefficient count must equal modes + 1");
        coeffs_[0] = Complex(checked_real_mean(coeffs_[0]), 0.0);
    }

    int modes() const noexcept { return modes_; }

    /// Coefficient at any n in Z: Hermitian extension for n < 0, zero outside the band.
    Complex coeff(int n) const noexcept {
        const int a = n < 0 ? -n : n;
        if (a > modes_) return {0.0, 0.0};
        return n < 0 ? std::conj(coeffs_[a]) : coeffs_[a];
    }

    void set_coeff(int n, Complex value) {
        if (n < 0 || n > modes_) throw Error("TorusField::set_coeff: mode index out of range");
        if (n == 0)
            coeffs_[0] = Complex(checked_real_mean(value), 0.0);
        else
            coeffs_[static_cast<std::size_t>(n)] = value;
    }

    std::span<const Complex> coeffs() const noexcept { return coeffs_; }

    double mean() const noexcept { return coeffs_[0].real(); }

private:
    static int checked_modes(int modes) {
        if (modes < 1) throw Error("TorusField: modes must be >= 1");
        return modes;
    }

    static double checked_real_mean(Complex c0) {
        if (std::abs(c0.imag()) > 1e-12 * (1.0 + std::abs(c0)))
            throw RealnessViolation("TorusField: mean coefficient must be real");
        return c0.real();
    }

    int modes_;
    std::vector<Complex> coeffs_;
};

/// Element of the (truncated) Hardy space: modes 0..N with no symmetry constraint.
class AnalyticField {
public:
    explicit AnalyticField(int modes)
        : modes_(checked_modes(modes)),
          coeffs_(static_cast<std::size_t>(modes) + 1, Complex{0.0, 0.0}) {}

    AnalyticField(int modes, std::vector<Complex> coeffs)
        : modes_(checked_modes(modes)), coeffs_(std::move(coeffs)) {
        if (coeffs_.size() != static_cast<std::size_t>(modes_) + 1)
            throw Error("AnalyticField: coefficient count must equal modes + 1");
    }

    int modes() const noexcept { return modes_; }

    Complex coeff(int n) const noexcept {
        if (n < 0 || n > modes_) return {0.0, 0.0};
        return coeffs_[static_cast<std::size_t>(n)];
    }

    void set_coeff(int n, Complex value) {
        if (n < 0 || n > modes_) throw Error("AnalyticField::set_coeff: mode index out of range");
        coeffs_[static_cast<std::size_t>(n)] = value;
    }

    std::span<const Complex> coeffs() const noexcept { return coeffs_; }

private:
    static int checked_modes(int modes) {
        if (modes < 0) throw Error("AnalyticField: modes must be >= 0");
        return modes;
    }

    int modes_;
    std::vector<Complex> coeffs_;
};

/// Regularity exponent s in (-1/2, 0) with its margin eps = (1/2)(1/2 - |s|).
struct SobolevRegularity {
    double s;

    explicit SobolevRegularity(double s_value) : s(s_value) {
        if (!(s > -0.5 && s < 0.0))
            throw Error("SobolevRegularity: exponent must lie in (-1/2, 0)");
    }

    double eps() const noexcept { return 0.5 * (0.5 - std::abs(s)); }
};

// --- transforms -----------------------------------------------------------

/// Fourier analysis of uniform samples on [0, 2pi).  Requires at least
/// 2*modes + 1 samples so that the requested band is alias-free.
inline TorusField analyze(std::span<const double> samples, int modes) {
    const int count = static_cast<int>(samples.size());
    if (modes < 1) throw Error("analyze: modes must be >= 1");
    if (count < 2 * modes + 1)
        throw SampleCountTooSmall("analyze: need at least 2N+1 samples for N = " +
                                  std::to_string(modes));
    std::vector<Complex> in(samples.size());
    for (std::size_t j = 0; j < samples.size(); ++j) in[j] = Complex(samples[j], 0.0);
    std::vector<Complex> out;
    detail::Dft dft(count);
    dft.forward(in, out);
    std::vector<Complex> coeffs(static_cast<std::size_t>(modes) + 1);
    const double inv = 1.0 / static_cast<double>(count);
    for (int n = 0; n <= modes; ++n) coeffs[static_cast<std::size_t>(n)] = out[static_cast<std::size_t>(n)] * inv;
    return TorusField(modes, std::move(coeffs));
}

/// Samples of sum_n f^(n) exp(i n x) on the uniform grid with `points` nodes.
/// The Hermitian reconstruction is checked: any imaginary residue above
/// 1e-10 in sup norm raises RealnessViolation; below that it is discarded.
inline std::vector<double> synthesize(const TorusField& f, int points) {
    const int n_modes = f.modes();
    if (points < 2 * n_modes + 1)
        throw SampleCountTooSmall("synthesize: need at least 2N+1 points");
    std::vector<Complex> spec(static_cast<std::size_t>(points), Complex{0.0, 0.0});
    spec[0] = f.coeff(0);
    for (int n = 1; n <= n_modes; ++n) {
        spec[static_cast<std::size_t>(n)] = f.coeff(n);
        spec[static_cast<std::size_t>(points - n)] = std::conj(f.coeff(n));
    }
    std::vector<Complex> out;
    detail::Dft dft(points);
    dft.inverse(spec, out);
    double worst_imag = 0.0;
    for (const auto& v : out) worst_imag = std::max(worst_imag, std::abs(v.imag()));
    if (worst_imag > 1e-10)
        throw RealnessViolation("synthesize: imaginary residue " + std::to_string(worst_imag));
    std::vector<double> samples(out.size());
    for (std::size_t j = 0; j < out.size(); ++j) samples[j] = out[j].real();
    return samples;
}

// --- pointwise spectral operators -----------------------------------------

/// Hilbert transform: f^(n) -> -i sgn(n) f^(n); the mean mode maps to zero.
inline TorusField hilbert(const TorusField& f) {
    TorusField out(f.modes());
    for (int n = 1; n <= f.modes(); ++n)
        out.set_coeff(n, Complex(0.0, -1.0) * f.coeff(n));
    return out;
}

/// Spectral derivative: f^(n) -> i n f^(n).
inline TorusField derivative(const TorusField& f) {
    TorusField out(f.modes());
    for (int n = 1; n <= f.modes(); ++n)
        out.set_coeff(n, Complex(0.0, static_cast<double>(n)) * f.coeff(n));
    return out;
}

/// Szego projection onto nonnegative modes.
inline AnalyticField szego_project(const TorusField& f) {
    std::vector<Complex> coeffs(f.coeffs().begin(), f.coeffs().end());
    return AnalyticField(f.modes(), std::move(coeffs));
}

/// Idempotence overload: projecting an analytic field is the identity.
inline AnalyticField szego_project(const AnalyticField& f) { return f; }

// --- norms ------------------------------------------------------------------

/// Weighted Sobolev norm (sum over all modes, negatives via symmetry):
///   ||f||_{H^r_kappa} = ( sum_n |f^(n)|^2 (|n| + kappa)^{2r} )^{1/2},  kappa >= 1.
inline double sobolev_norm(const TorusField& f, double r, double kappa) {
    if (!(kappa >= 1.0)) throw KappaOutOfRange("sobolev_norm: kappa must be >= 1");
    double sum = std::norm(f.coeff(0)) * std::pow(kappa, 2.0 * r);
    for (int n = 1; n <= f.modes(); ++n)
        sum += 2.0 * std::norm(f.coeff(n)) * std::pow(static_cast<double>(n) + kappa, 2.0 * r);
    return std::sqrt(sum);
}

/// H^r norm restricted to |n| >= cutoff, with kappa = 1 weights.
inline double tail_norm(const TorusField& f, double r, int cutoff) {
    if (cutoff < 1) throw Error("tail_norm: cutoff must be >= 1");
    double sum = 0.0;
    for (int n = cutoff; n <= f.modes(); ++n)
        sum += 2.0 * std::norm(f.coeff(n)) * std::pow(static_cast<double>(n) + 1.0, 2.0 * r);
    return std::sqrt(sum);
}

inline double l2_norm(const TorusField& f) {
    double sum = std::norm(f.coeff(0));
    for (int n = 1; n <= f.modes(); ++n) sum += 2.0 * std::norm(f.coeff(n));
    return std::sqrt(sum);
}

inline double l2_norm(const AnalyticField& f) {
    double sum = 0.0;
    for (const auto& c : f.coeffs()) sum += std::norm(c);
    return std::sqrt(sum);
}

/// Coefficient inner product on the Hardy space: sum_n conj(a_n) b_n.
inline Complex hardy_inner(const AnalyticField& a, const AnalyticField& b) {
    Complex sum{0.0, 0.0};
    const int top = std::min(a.modes(), b.modes());
    for (int n = 0; n <= top; ++n) sum += std::conj(a.coeff(n)) * b.coeff(n);
    return sum;
}

// --- field arithmetic --------------------------------------------------------

inline TorusField resized(const TorusField& f, int modes) {
    TorusField out(modes);
    const int top = std::min(modes, f.modes());
    out.set_coeff(0, f.coeff(0));
    for (int n = 1; n <= top; ++n) out.set_coeff(n, f.coeff(n));
    return out;
}

inline TorusField with_zero_mean(const TorusField& f) {
    TorusField out = f;
    out.set_coeff(0, Complex{0.0, 0.0});
    return out;
}

inline TorusField operator+(const TorusField& a, const TorusField& b) {
    TorusField out(std::max(a.modes(), b.modes()));
    out.set_coeff(0, a.coeff(0) + b.coeff(0));
    for (int n = 1; n <= out.modes(); ++n) out.set_coeff(n, a.coeff(n) + b.coeff(n));
    return out;
}

inline TorusField operator-(const TorusField& a, const TorusField& b) {
    TorusField out(std::max(a.modes(), b.modes()));
    out.set_coeff(0, a.coeff(0) - b.coeff(0));
    for (int n = 1; n <= out.modes(); ++n) out.set_coeff(n, a.coeff(n) - b.coeff(n));
    return out;
}

inline TorusField operator*(double scale, const TorusField& f) {
    TorusField out(f.modes());
    out.set_coeff(0, scale * f.coeff(0));
    for (int n = 1; n <= f.modes(); ++n) out.set_coeff(n, scale * f.coeff(n));
    return out;
}

// --- grid sizing for nonlinear evaluation -----------------------------------

inline int dealias_keep(int modes, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw Error("dealias fraction must lie in (0, 1]");
    const int keep = static_cast<int>(std::floor(fraction * modes + 1e-9));
    return std::min(keep, modes);
}

/// Grid length for pointwise products: 2N+1 plus enough headroom that no
/// aliased image of the quadratic product lands inside the kept band,
/// rounded up to a power of two.
inline int padded_grid_size(int modes, double fraction) {
    const int keep = dealias_keep(modes, fraction);
    return detail::next_pow2(2 * modes + keep + 1);
}

} // namespace bopert
