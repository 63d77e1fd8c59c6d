#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>

#include "bopert/errors.hpp"
#include "bopert/fourier.hpp"

namespace bopert {

/// Order-zero Fourier multiplier symbol n -> a(n).  Symbols that map real
/// fields to real fields satisfy a(-n) = conj(a(n)); `claims_bounded` marks
/// whether sup_n |a(n)| is asserted finite.
class MultiplierSymbol {
public:
    using TableEntries = std::unordered_map<std::int64_t, Complex>;

    MultiplierSymbol(std::string name, std::map<std::string, double> params,
                     bool claims_bounded, std::function<Complex(std::int64_t)> eval)
        : name_(std::move(name)),
          params_(std::move(params)),
          claims_bounded_(claims_bounded),
          eval_(std::move(eval)) {}

    Complex operator()(std::int64_t n) const { return eval_(n); }

    const std::string& name() const noexcept { return name_; }
    const std::map<std::string, double>& params() const noexcept { return params_; }
    bool claims_bounded() const noexcept { return claims_bounded_; }

    /// Nonnull only for table-backed symbols; used by serialization.
    const std::shared_ptr<const TableEntries>& table() const noexcept { return table_; }
    void attach_table(std::shared_ptr<const TableEntries> table) { table_ = std::move(table); }

private:
    std::string name_;
    std::map<std::string, double> params_;
    bool claims_bounded_;
    std::function<Complex(std::int64_t)> eval_;
    std::shared_ptr<const TableEntries> table_;
};

/// Full finite-depth symbol a(n) = -i n/delta + 2 i n |n| / (e^{2 delta |n|} - 1).
/// Unbounded: the drift part grows linearly; remove it with a moving frame
/// or use ilw_boosted_symbol.
inline MultiplierSymbol ilw_full_symbol(double delta) {
    if (!(delta > 0.0)) throw NonpositiveDepth("ilw_full_symbol: depth must be positive");
    auto eval = [delta](std::int64_t n) -> Complex {
        if (n == 0) return {0.0, 0.0};
        const double nn = static_cast<double>(n);
        const double an = std::abs(nn);
        const double x = 2.0 * delta * an;
        // beyond x ~ 700 the correction underflows; exact zero avoids overflow in expm1
        const double corr = x > 700.0 ? 0.0 : 2.0 * nn * an / std::expm1(x);
        return Complex(0.0, -nn / delta + corr);
    };
    return MultiplierSymbol("ilw-full", {{"delta", delta}}, false, eval);
}

/// Finite-depth symbol in the frame moving with the drift:
/// a(n) = 2 i n |n| / (e^{2 delta |n|} - 1).  Bounded, sup decaying in delta.
inline MultiplierSymbol ilw_boosted_symbol(double delta) {
    if (!(delta > 0.0)) throw NonpositiveDepth("ilw_boosted_symbol: depth must be positive");
    auto eval = [delta](std::int64_t n) -> Complex {
        if (n == 0) return {0.0, 0.0};
        const double nn = static_cast<double>(n);
        const double an = std::abs(nn);
        const double x = 2.0 * delta * an;
        const double corr = x > 700.0 ? 0.0 : 2.0 * nn * an / std::expm1(x);
        return Complex(0.0, corr);
    };
    return MultiplierSymbol("ilw-boosted", {{"delta", delta}}, true, eval);
}

/// Continental-shelf dispersion correction a(n) = i n sqrt(1+n^2) - i sgn(n) n^2,
/// evaluated in the cancellation-safe form i sgn(n) |n| / (sqrt(1+n^2) + |n|).
inline MultiplierSymbol smith_symbol() {
    auto eval = [](std::int64_t n) -> Complex {
        if (n == 0) return {0.0, 0.0};
        const double an = std::abs(static_cast<double>(n));
        const double sgn = n > 0 ? 1.0 : -1.0;
        return Complex(0.0, sgn * an / (std::hypot(1.0, an) + an));
    };
    return MultiplierSymbol("smith", {}, true, eval);
}

/// Constant symbol a(n) = gamma: gamma = -1 is Rayleigh damping, gamma = +1
/// the anti-dissipative counterpart.
inline MultiplierSymbol rayleigh_symbol(double gamma) {
    auto eval = [gamma](std::int64_t) -> Complex { return {gamma, 0.0}; };
    return MultiplierSymbol("rayleigh", {{"gamma", gamma}}, true, eval);
}

/// a == 0: the unperturbed flow.
inline MultiplierSymbol zero_symbol() {
    auto eval = [](std::int64_t) -> Complex { return {0.0, 0.0}; };
    return MultiplierSymbol("zero", {}, true, eval);
}

/// Symbol backed by an explicit table of modes.  Modes absent from the table
/// evaluate to zero; the first such lookup emits a warning on stderr.
inline MultiplierSymbol table_symbol(MultiplierSymbol::TableEntries entries,
                                     std::string name = "table") {
    auto table = std::make_shared<const MultiplierSymbol::TableEntries>(std::move(entries));
    auto warned = std::make_shared<std::atomic<bool>>(false);
    auto eval = [table, warned](std::int64_t n) -> Complex {
        auto it = table->find(n);
        if (it != table->end()) return it->second;
        if (!warned->exchange(true))
            std::fprintf(stderr, "warning: symbol table has no entry for mode %lld; defaulting to 0\n",
                         static_cast<long long>(n));
        return {0.0, 0.0};
    };
    MultiplierSymbol sym(std::move(name), {}, true, eval);
    sym.attach_table(table);
    return sym;
}

/// True iff |a(-n) - conj(a(n))| <= 1e-14 (1 + |a(n)|) for all 1 <= n <= n_max.
inline bool check_real_symmetry(const MultiplierSymbol& sym, int n_max) {
    for (std::int64_t n = 1; n <= n_max; ++n) {
        const Complex an = sym(n);
        if (std::abs(sym(-n) - std::conj(an)) > 1e-14 * (1.0 + std::abs(an))) return false;
    }
    return true;
}

/// max |a(n)| over |n| <= n_max.
inline double sup_norm(const MultiplierSymbol& sym, int n_max) {
    double sup = std::abs(sym(0));
    for (std::int64_t n = 1; n <= n_max; ++n)
        sup = std::max({sup, std::abs(sym(n)), std::abs(sym(-n))});
    return sup;
}

} // namespace bopert
