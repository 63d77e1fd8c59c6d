#pragma once

#include <cmath>
#include <string>

#include "bopert/errors.hpp"
#include "bopert/fourier.hpp"

namespace bopert {

/// Mean-value bookkeeping for flows whose symbol value a(0) may be nonzero.
/// With c0 = -mean(u(0)), the pair c(t), d(t) solves c' = a0 c, d' = c,
/// c(0) = c0, d(0) = 0, so that v(t,x) = u(t, x - 2 d(t)) + c(t) has zero mean.
struct GaugeParams {
    double a0 = 0.0;
    double c0 = 0.0;

    double c(double t) const { return c0 * std::exp(a0 * t); }

    double d(double t) const {
        const double x = a0 * t;
        if (std::abs(x) < 1e-8) {
            // Taylor form of (e^x - 1)/x; covers the Galilei branch a0 = 0 exactly
            return c0 * t * (1.0 + x / 2.0 + x * x / 6.0);
        }
        return c0 / a0 * std::expm1(x);
    }
};

inline double mean(const TorusField& f) { return f.mean(); }

inline GaugeParams gauge_params(double a0, const TorusField& u0) {
    return GaugeParams{a0, -u0.mean()};
}

/// v(t,x) = u(t, x - 2 d(t)) + c(t).  Spatial shifts are applied as exact
/// Fourier phases, never by resampling.
inline TorusField to_zero_mean(const TorusField& u_t, double t, const GaugeParams& gp) {
    const double shift = 2.0 * gp.d(t);
    TorusField v(u_t.modes());
    const double mean_v = u_t.mean() + gp.c(t);
    if (std::abs(mean_v) > 1e-10)
        throw MeanResidual("to_zero_mean: residual mean " + std::to_string(mean_v) +
                           " signals inconsistent gauge parameters");
    v.set_coeff(0, Complex(mean_v, 0.0));
    for (int n = 1; n <= u_t.modes(); ++n)
        v.set_coeff(n, u_t.coeff(n) * std::polar(1.0, -static_cast<double>(n) * shift));
    return v;
}

/// Exact inverse of to_zero_mean.
inline TorusField from_zero_mean(const TorusField& v_t, double t, const GaugeParams& gp) {
    const double shift = 2.0 * gp.d(t);
    TorusField u(v_t.modes());
    u.set_coeff(0, Complex(v_t.mean() - gp.c(t), 0.0));
    for (int n = 1; n <= v_t.modes(); ++n)
        u.set_coeff(n, v_t.coeff(n) * std::polar(1.0, static_cast<double>(n) * shift));
    return u;
}

/// Frame moving with the drift: v(t,x) = u(t, x + t/delta), i.e. the phase
/// e^{i n t/delta} on each coefficient.
inline TorusField boost_frame(const TorusField& u_t, double t, double delta) {
    if (!(delta > 0.0)) throw NonpositiveDepth("boost_frame: depth must be positive");
    TorusField v(u_t.modes());
    v.set_coeff(0, u_t.coeff(0));
    for (int n = 1; n <= u_t.modes(); ++n)
        v.set_coeff(n, u_t.coeff(n) * std::polar(1.0, static_cast<double>(n) * t / delta));
    return v;
}

} // namespace bopert
