#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bopert/errors.hpp"
#include "bopert/evolve.hpp"
#include "bopert/fourier.hpp"

namespace bopert {

/// M x M Hermitian truncation of the Lax operator -i d/dx - T_u acting on
/// nonnegative modes: L[n][m] = n delta_{nm} - u^(n-m).  Hermiticity is exact
/// by construction because the coefficients satisfy u^(-k) = conj(u^(k)).
class LaxMatrix {
public:
    explicit LaxMatrix(Eigen::MatrixXcd entries) : entries_(std::move(entries)) {}

    int dim() const noexcept { return static_cast<int>(entries_.rows()); }
    const Eigen::MatrixXcd& matrix() const noexcept { return entries_; }

private:
    Eigen::MatrixXcd entries_;
};

inline LaxMatrix build_lax(const TorusField& u, int dim) {
    if (dim < 2) throw Error("build_lax: dimension must be >= 2");
    Eigen::MatrixXcd entries(dim, dim);
    for (int n = 0; n < dim; ++n)
        for (int m = 0; m < dim; ++m) {
            const Complex diag = n == m ? Complex(static_cast<double>(n), 0.0) : Complex(0.0, 0.0);
            entries(n, m) = diag - u.coeff(n - m);
        }
    return LaxMatrix(std::move(entries));
}

/// Solution of (L + kappa) m = rhs together with the solve residual.
struct ResolventVector {
    std::vector<Complex> coeffs;
    double kappa = 0.0;
    double residual = 0.0;
};

namespace detail {

inline Eigen::VectorXcd hardy_rhs(const AnalyticField& rhs, int dim) {
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(dim);
    const int top = std::min(dim - 1, rhs.modes());
    for (int n = 0; n <= top; ++n) b(n) = rhs.coeff(n);
    return b;
}

struct LaxSpectrum {
    Eigen::VectorXd values;    // ascending
    Eigen::MatrixXcd vectors;  // empty when computed values-only
};

inline LaxSpectrum lax_spectrum(const LaxMatrix& lax, bool with_vectors) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
        lax.matrix(), with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw Error("lax_spectrum: eigensolver failed to converge");
    LaxSpectrum spec;
    spec.values = solver.eigenvalues();
    if (with_vectors) spec.vectors = solver.eigenvectors();
    return spec;
}

} // namespace detail

/// Dense Hermitian positive-definite solve of (L + kappa) m = rhs.
inline ResolventVector resolvent_solve(const LaxMatrix& lax, double kappa,
                                       const AnalyticField& rhs) {
    Eigen::MatrixXcd shifted = lax.matrix();
    shifted.diagonal().array() += kappa;
    Eigen::LLT<Eigen::MatrixXcd> llt(shifted);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("resolvent_solve: L + kappa is not positive definite (kappa = " +
                                  std::to_string(kappa) + ")");
    const Eigen::VectorXcd b = detail::hardy_rhs(rhs, lax.dim());
    const Eigen::VectorXcd m = llt.solve(b);
    ResolventVector out;
    out.coeffs.assign(m.data(), m.data() + m.size());
    out.kappa = kappa;
    out.residual = (shifted * m - b).norm();
    return out;
}

/// Smallest kappa in the doubling search {1, 2, 4, ...} for which the
/// smallest eigenvalue of L + kappa clears the margin 0.5, guaranteeing the
/// resolvent regime at this truncation.  The regularity exponent is accepted
/// for interface parity with the analytic threshold rule but plays no role
/// in the positive-definiteness search.
inline double kappa_threshold(const TorusField& u, double s, int dim) {
    SobolevRegularity reg(s);
    (void)reg;
    const TorusField v = with_zero_mean(u);
    const detail::LaxSpectrum spec = detail::lax_spectrum(build_lax(v, dim), false);
    const double lambda_min = spec.values(0);
    for (double kappa = 1.0; kappa <= 1073741824.0; kappa *= 2.0)
        if (lambda_min + kappa > 0.5) return kappa;
    throw ThresholdNotFound("kappa_threshold: no kappa below 2^30 reaches the margin");
}

/// beta(kappa; u) = <Pi u, (L_u + kappa)^{-1} Pi u> on the zero-mean
/// representative of u, with the coefficient inner product.  The result is
/// real for Hermitian L + kappa; the imaginary residue is asserted below
/// 1e-10 relative before it is dropped.
inline double beta(const TorusField& u, double kappa, int dim) {
    const TorusField v = with_zero_mean(u);
    const AnalyticField rhs = szego_project(v);
    if (l2_norm(rhs) == 0.0) return 0.0;
    const LaxMatrix lax = build_lax(v, dim);
    const ResolventVector m = resolvent_solve(lax, kappa, rhs);
    Complex value{0.0, 0.0};
    const int top = std::min(dim - 1, rhs.modes());
    for (int n = 0; n <= top; ++n)
        value += std::conj(rhs.coeff(n)) * m.coeffs[static_cast<std::size_t>(n)];
    if (std::abs(value.imag()) > 1e-10 * std::max(std::abs(value), 1e-300))
        throw RealnessViolation("beta: imaginary residue above 1e-10 relative");
    return value.real();
}

/// beta sampled on a doubling kappa grid together with the weighted tail
/// integral beta_s = int_kappa^inf beta(x; u) x^{2s} dx.
struct BetaProfile {
    std::vector<double> kappa_grid;
    std::vector<double> beta_values;
    double s = -0.25;
    double beta_s_value = 0.0;
    double quad_error = 0.0;
};

namespace detail {

// 8-point Gauss-Legendre rule on [-1, 1]
inline constexpr double gl8_x[4] = {0.18343464249564980494, 0.52553240991632898582,
                                    0.79666647741362673959, 0.96028985649753623168};
inline constexpr double gl8_w[4] = {0.36268378337836198297, 0.31370664587788728734,
                                    0.22238103445337447054, 0.10122853629037625915};

template <typename F>
double gl8_panel(const F& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < 4; ++i)
        sum += gl8_w[i] * (f(mid + half * gl8_x[i]) + f(mid - half * gl8_x[i]));
    return half * sum;
}

/// Composite rule over [kappa, kappa*2^octaves] with log-spaced panels,
/// `panels_per_octave` of them per doubling.
template <typename F>
double gl8_log_spaced(const F& f, double kappa, int octaves, int panels_per_octave) {
    const double ratio = std::pow(2.0, 1.0 / panels_per_octave);
    double total = 0.0;
    double left = kappa;
    for (int p = 0; p < octaves * panels_per_octave; ++p) {
        const double right = kappa * std::pow(ratio, p + 1);
        total += gl8_panel(f, left, right);
        left = right;
    }
    return total;
}

} // namespace detail

/// Batch evaluation of beta along the kappa half-line from one Hermitian
/// eigendecomposition: with L = Q diag(lambda) Q* and w = Q* Pi u,
/// beta(x) = sum_i |w_i|^2 / (lambda_i + x) for every x at O(M) cost.
/// The tail beyond the quadrature window is added analytically from
/// beta(x) = ||Pi u||^2 / x - <Pi u, L Pi u> / x^2 + O(x^{-3}).
inline BetaProfile beta_profile(const TorusField& u, double s, double kappa, int dim,
                                double rtol = 1e-8) {
    SobolevRegularity reg(s);
    if (!(kappa > 0.0)) throw KappaOutOfRange("beta_profile: kappa must be positive");
    const TorusField v = with_zero_mean(u);

    BetaProfile profile;
    profile.s = reg.s;

    const AnalyticField rhs_field = szego_project(v);
    if (l2_norm(rhs_field) == 0.0) {
        profile.kappa_grid = {kappa};
        profile.beta_values = {0.0};
        return profile;
    }

    const detail::LaxSpectrum spec = detail::lax_spectrum(build_lax(v, dim), true);
    const Eigen::VectorXcd b = detail::hardy_rhs(rhs_field, dim);
    const Eigen::VectorXcd w = spec.vectors.adjoint() * b;
    const Eigen::VectorXd w2 = w.cwiseAbs2();
    const double b_norm2 = w2.sum();
    const double s1 = (spec.values.array() * w2.array()).sum();
    const double s2 = (spec.values.array().square() * w2.array()).sum();

    if (spec.values(0) + kappa <= 0.0)
        throw NotPositiveDefinite("beta_profile: L + kappa is not positive definite");

    const auto& lambda = spec.values;
    auto beta_at = [&](double x) -> double {
        double sum = 0.0;
        for (int i = 0; i < lambda.size(); ++i) sum += w2(i) / (lambda(i) + x);
        return sum;
    };
    auto integrand = [&](double x) -> double { return beta_at(x) * std::pow(x, 2.0 * s); };

    profile.kappa_grid.push_back(kappa);
    profile.beta_values.push_back(beta_at(kappa));

    // extend the window until the analytic tail is negligible relative to the integral
    const int max_octaves = 500;
    double integral = 0.0;
    double kappa_max = kappa;
    double tail = 0.0;
    int octaves = 0;
    bool window_ok = false;
    for (; octaves < max_octaves;) {
        integral += detail::gl8_panel(integrand, kappa_max, 2.0 * kappa_max);
        kappa_max *= 2.0;
        ++octaves;
        profile.kappa_grid.push_back(kappa_max);
        profile.beta_values.push_back(beta_at(kappa_max));
        tail = b_norm2 * std::pow(kappa_max, 2.0 * s) / (2.0 * std::abs(s)) -
               s1 * std::pow(kappa_max, 2.0 * s - 1.0) / (1.0 - 2.0 * s);
        if (std::abs(tail) <= rtol * std::max(integral, 1e-300)) {
            window_ok = true;
            break;
        }
    }
    if (!window_ok)
        throw QuadratureNotConverged("beta_profile: tail did not fall below rtol within " +
                                     std::to_string(max_octaves) + " octaves");

    // refine the panel count until the composite rule is stable
    double previous = integral;
    double change = std::numeric_limits<double>::infinity();
    bool quad_ok = false;
    for (int ppo = 2; ppo <= 16; ppo *= 2) {
        const double current = detail::gl8_log_spaced(integrand, kappa, octaves, ppo);
        change = std::abs(current - previous);
        previous = current;
        if (change <= rtol * std::max(std::abs(current), 1e-300)) {
            quad_ok = true;
            break;
        }
    }
    if (!quad_ok)
        throw QuadratureNotConverged("beta_profile: panel refinement stalled");

    const double tail_error = s2 * std::pow(kappa_max, 2.0 * s - 2.0) / (2.0 - 2.0 * s);
    profile.beta_s_value = previous + tail;
    profile.quad_error = change + std::abs(tail_error);
    return profile;
}

/// Weighted conserved quantity beta_s(kappa; u).
inline double beta_s(const TorusField& u, double s, double kappa, int dim) {
    return beta_profile(u, s, kappa, dim).beta_s_value;
}

/// Functional derivative of beta within the zero-mean gauge:
///   d beta[f] = (1/2pi) int (|m|^2 + m + conj(m)) f dx
/// evaluated spectrally from the resolvent coefficients.  Both u and the
/// direction f are reduced to their zero-mean representatives, which makes
/// the result the exact derivative of beta as computed here.
inline double dbeta(const TorusField& u, double kappa, const TorusField& f, int dim) {
    const TorusField v = with_zero_mean(u);
    const TorusField fz = with_zero_mean(f);
    const AnalyticField rhs = szego_project(v);
    const LaxMatrix lax = build_lax(v, dim);
    const ResolventVector res = resolvent_solve(lax, kappa, rhs);
    const auto& m = res.coeffs;

    const int top = std::min(dim - 1, fz.modes());
    double value = 0.0;
    for (int k = 1; k <= top; ++k) {
        Complex g{0.0, 0.0};
        for (int j = k; j < dim; ++j)
            g += m[static_cast<std::size_t>(j)] * std::conj(m[static_cast<std::size_t>(j - k)]);
        g += m[static_cast<std::size_t>(k)];
        value += 2.0 * std::real(g * std::conj(fz.coeff(k)));
    }
    return value;
}

/// |d beta[ H u'' - 2 u u' ]| normalized by the cubic scale ||u||_{H^1}^3.
/// Exactly zero for the untruncated operator; at finite truncation the
/// residual shrinks as the dimension grows.
inline double bo_direction_check(const TorusField& u, double kappa, int dim) {
    if (l2_norm(u) == 0.0) return 0.0;
    const TorusField v = with_zero_mean(u);
    const TorusField lin = hilbert(derivative(derivative(v)));
    // exact quadratic flux through twice the band: no dealiasing here
    const TorusField wide = resized(v, 2 * v.modes());
    const TorusField direction = lin + nonlinear_term(wide, 1.0);
    const double value = std::abs(dbeta(v, kappa, direction, dim));
    const double h1 = sobolev_norm(v, 1.0, 1.0);
    return value / std::max(h1 * h1 * h1, 1e-300);
}

/// Gaps of the sorted spectrum against the free spacing:
/// gamma_n = lambda_n - lambda_{n-1} - 1 for 1 <= n <= count.
inline std::vector<double> eigen_gaps(const LaxMatrix& lax, int count) {
    if (count < 1) throw Error("eigen_gaps: count must be >= 1");
    if (count >= lax.dim())
        throw CountExceedsDim("eigen_gaps: count " + std::to_string(count) +
                              " requires dimension > " + std::to_string(count));
    const detail::LaxSpectrum spec = detail::lax_spectrum(lax, false);
    std::vector<double> gaps(static_cast<std::size_t>(count));
    for (int n = 1; n <= count; ++n)
        gaps[static_cast<std::size_t>(n - 1)] = spec.values(n) - spec.values(n - 1) - 1.0;
    return gaps;
}

/// beta and beta_s tabulated along a trajectory, with the drift summaries
/// used by the conservation and exponential-bound experiments.
struct BetaDriftReport {
    double kappa = 0.0;
    double s = -0.25;
    int lax_dim = 0;
    std::vector<double> times;
    std::vector<double> beta_values;
    std::vector<double> beta_s_values;
    double max_rel_beta_drift = 0.0;  // max_t |beta(t)/beta(0) - 1|
    double k_fit = 0.0;               // max_{t>0} log(beta_s(t)/beta_s(0)) / t
    double max_quad_error = 0.0;      // worst quadrature error estimate over the samples
};

inline BetaDriftReport beta_drift_report(const Trajectory& traj, double kappa, double s, int dim) {
    BetaDriftReport report;
    report.kappa = kappa;
    report.s = s;
    report.lax_dim = dim;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const BetaProfile profile = beta_profile(traj.states[i], s, kappa, dim);
        report.times.push_back(traj.times[i]);
        report.beta_values.push_back(profile.beta_values.front());
        report.beta_s_values.push_back(profile.beta_s_value);
        report.max_quad_error = std::max(report.max_quad_error, profile.quad_error);
    }
    if (report.times.empty()) return report;

    const double beta0 = report.beta_values.front();
    const double beta_s0 = report.beta_s_values.front();
    const double inf = std::numeric_limits<double>::infinity();
    double k_fit = -inf;
    for (std::size_t i = 1; i < report.times.size(); ++i) {
        const double bt = report.beta_values[i];
        report.max_rel_beta_drift =
            std::max(report.max_rel_beta_drift,
                     beta0 != 0.0 ? std::abs(bt / beta0 - 1.0) : (bt == 0.0 ? 0.0 : inf));
        const double bs = report.beta_s_values[i];
        const double t = report.times[i];
        if (beta_s0 > 0.0 && bs > 0.0)
            k_fit = std::max(k_fit, std::log(bs / beta_s0) / t);
        else if (bs != beta_s0)
            k_fit = inf;
    }
    report.k_fit = std::isinf(k_fit) && k_fit < 0.0 ? 0.0 : k_fit;
    return report;
}

} // namespace bopert
