#pragma once

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "bopert/errors.hpp"
#include "bopert/fourier.hpp"

namespace bopert {

/// Nonnegative actions (gamma_k)_{k>=1} with finite support.
class ActionSequence {
public:
    ActionSequence() = default;

    explicit ActionSequence(std::vector<double> gamma) : gamma_(std::move(gamma)) {
        for (double g : gamma_)
            if (!(g >= 0.0)) throw Error("ActionSequence: actions must be nonnegative");
    }

    int support() const noexcept { return static_cast<int>(gamma_.size()); }

    /// gamma_k for k >= 1; zero beyond the support.
    double gamma(int k) const noexcept {
        if (k < 1 || k > support()) return 0.0;
        return gamma_[static_cast<std::size_t>(k - 1)];
    }

    const std::vector<double>& values() const noexcept { return gamma_; }

private:
    std::vector<double> gamma_;
};

/// Complex coordinates (zeta_n)_{n>=1} with finite support.
class BirkhoffState {
public:
    BirkhoffState() = default;

    explicit BirkhoffState(std::vector<Complex> zeta) : zeta_(std::move(zeta)) {}

    int support() const noexcept { return static_cast<int>(zeta_.size()); }

    Complex zeta(int n) const noexcept {
        if (n < 1 || n > support()) return {0.0, 0.0};
        return zeta_[static_cast<std::size_t>(n - 1)];
    }

    const std::vector<Complex>& values() const noexcept { return zeta_; }

private:
    std::vector<Complex> zeta_;
};

/// omega_n = n^2 - 2 sum_{k>=1} min{k,n} gamma_k.  (The k=0 summand of the
/// frequency formula vanishes identically, so actions are indexed from 1.)
inline double omega(const ActionSequence& actions, int n) {
    if (n < 1) throw Error("omega: index must be >= 1");
    double sum = 0.0;
    for (int k = 1; k <= actions.support(); ++k)
        sum += static_cast<double>(std::min(k, n)) * actions.gamma(k);
    return static_cast<double>(n) * static_cast<double>(n) - 2.0 * sum;
}

/// Frequencies and accumulated phases Omega_n(t) = t omega_n for the
/// autonomous case, where the frequencies are constants of the motion.
struct PhaseSchedule {
    std::vector<double> omegas;  // omegas[n-1] = omega_n

    double omega_at(int n) const {
        if (n < 1 || n > static_cast<int>(omegas.size()))
            throw Error("PhaseSchedule: index out of range");
        return omegas[static_cast<std::size_t>(n - 1)];
    }

    double phase(int n, double t) const { return t * omega_at(n); }
};

inline PhaseSchedule phase_schedule(const ActionSequence& actions, int n_max) {
    PhaseSchedule sched;
    sched.omegas.reserve(static_cast<std::size_t>(n_max));
    for (int n = 1; n <= n_max; ++n) sched.omegas.push_back(omega(actions, n));
    return sched;
}

/// zeta_n(t) = e^{i t omega_n} zeta_n(0).
inline BirkhoffState linear_flow(const BirkhoffState& z0, const ActionSequence& actions, double t) {
    std::vector<Complex> zeta(z0.values());
    for (int n = 1; n <= z0.support(); ++n)
        zeta[static_cast<std::size_t>(n - 1)] = std::polar(1.0, t * omega(actions, n)) * z0.zeta(n);
    return BirkhoffState(std::move(zeta));
}

/// Weighted sequence norm ( sum_{n>=1} n^{2s+1} |zeta_n|^2 )^{1/2}.
inline double h_norm(const BirkhoffState& z, double s) {
    double sum = 0.0;
    for (int n = 1; n <= z.support(); ++n)
        sum += std::pow(static_cast<double>(n), 2.0 * s + 1.0) * std::norm(z.zeta(n));
    return std::sqrt(sum);
}

/// Same sum restricted to n >= cutoff.
inline double h_tail_norm(const BirkhoffState& z, double s, int cutoff) {
    if (cutoff < 1) throw Error("h_tail_norm: cutoff must be >= 1");
    double sum = 0.0;
    for (int n = cutoff; n <= z.support(); ++n)
        sum += std::pow(static_cast<double>(n), 2.0 * s + 1.0) * std::norm(z.zeta(n));
    return std::sqrt(sum);
}

/// Actions of a state: gamma_n = |zeta_n|^2.
inline ActionSequence actions_of(const BirkhoffState& z) {
    std::vector<double> gamma;
    gamma.reserve(static_cast<std::size_t>(z.support()));
    for (int n = 1; n <= z.support(); ++n) gamma.push_back(std::norm(z.zeta(n)));
    return ActionSequence(std::move(gamma));
}

/// Interpret spectral gaps as actions, clamping rounding-level negatives.
inline ActionSequence actions_from_gaps(const std::vector<double>& gaps, double clamp_tol = 1e-8) {
    std::vector<double> gamma;
    gamma.reserve(gaps.size());
    for (double g : gaps) {
        if (g < -clamp_tol) throw Error("actions_from_gaps: gap significantly negative");
        gamma.push_back(std::max(g, 0.0));
    }
    return ActionSequence(std::move(gamma));
}

/// Phase-free state with the prescribed actions: zeta_n = sqrt(gamma_n).
inline BirkhoffState state_from_actions(const ActionSequence& actions) {
    std::vector<Complex> zeta;
    zeta.reserve(static_cast<std::size_t>(actions.support()));
    for (int k = 1; k <= actions.support(); ++k)
        zeta.emplace_back(std::sqrt(actions.gamma(k)), 0.0);
    return BirkhoffState(std::move(zeta));
}

} // namespace bopert
