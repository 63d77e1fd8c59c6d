#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "bopert/multiplier.hpp"

using namespace bopert;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("full finite-depth symbol") {
    const MultiplierSymbol a = ilw_full_symbol(1.0);
    SECTION("vanishes at the mean mode") { REQUIRE(a(0) == Complex(0.0, 0.0)); }
    SECTION("closed form at n = 1, delta = 1") {
        // -i + 2i/(e^2 - 1)
        const double expected = 2.0 / (std::exp(2.0) - 1.0) - 1.0;
        REQUIRE_THAT(a(1).imag(), WithinRel(expected, 1e-12));
        REQUIRE_THAT(a(1).imag(), WithinAbs(-0.686965, 1e-6));
        REQUIRE_THAT(a(1).real(), WithinAbs(0.0, 1e-15));
    }
    SECTION("reality symmetry on the band") { REQUIRE(check_real_symmetry(a, 64)); }
    SECTION("depth must be positive") {
        REQUIRE_THROWS_AS(ilw_full_symbol(0.0), NonpositiveDepth);
        REQUIRE_THROWS_AS(ilw_full_symbol(-2.0), NonpositiveDepth);
    }
    SECTION("unbounded: not claimed bounded") { REQUIRE_FALSE(a.claims_bounded()); }
}

TEST_CASE("boosted finite-depth symbol") {
    SECTION("closed form at n = 1, delta = 1") {
        const MultiplierSymbol a = ilw_boosted_symbol(1.0);
        REQUIRE(a(0) == Complex(0.0, 0.0));
        REQUIRE_THAT(a(1).imag(), WithinRel(2.0 / (std::exp(2.0) - 1.0), 1e-12));
        REQUIRE_THAT(a(1).imag(), WithinAbs(0.313035, 1e-6));
    }
    SECTION("sup over the band is below 3 delta^-2") {
        for (double delta : {1.0, 2.0, 4.0, 8.0, 16.0}) {
            const MultiplierSymbol a = ilw_boosted_symbol(delta);
            double sup = 0.0;
            for (int n = 1; n <= 256; ++n) sup = std::max(sup, std::abs(a(n)));
            REQUIRE(sup <= 3.0 / (delta * delta));
        }
    }
    SECTION("sup-norm decay order is at least 1.9 on the ladder") {
        // log-log least-squares fit over delta in {2,4,8,16}
        std::vector<double> lx, ly;
        for (double delta : {2.0, 4.0, 8.0, 16.0}) {
            lx.push_back(std::log(delta));
            ly.push_back(std::log(sup_norm(ilw_boosted_symbol(delta), 256)));
        }
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        const double slope = (4 * sxy - sx * sy) / (4 * sxx - sx * sx);
        REQUIRE(-slope >= 1.9);
    }
    SECTION("guarded exponential never overflows") {
        const MultiplierSymbol a = ilw_boosted_symbol(16.0);
        REQUIRE(std::abs(a(100000)) == 0.0);
    }
    SECTION("reality symmetry") { REQUIRE(check_real_symmetry(ilw_boosted_symbol(2.0), 64)); }
}

TEST_CASE("smith symbol") {
    const MultiplierSymbol a = smith_symbol();
    SECTION("small modes") {
        REQUIRE(a(0) == Complex(0.0, 0.0));
        REQUIRE_THAT(a(1).imag(), WithinRel(std::sqrt(2.0) - 1.0, 1e-14));
        REQUIRE_THAT(a(10).imag(), WithinAbs(0.498756, 1e-6));
    }
    SECTION("matches the naive formula where it is stable") {
        for (int n = 1; n <= 64; ++n) {
            const double nn = n;
            const double naive = nn * std::sqrt(1.0 + nn * nn) - nn * nn;
            REQUIRE_THAT(a(n).imag(), WithinRel(naive, 1e-9));
        }
    }
    SECTION("approaches i/2 at the quadratic rate") {
        for (int n = 2; n <= 512; ++n)
            REQUIRE(std::abs(a(n) - Complex(0.0, 0.5)) <= 1.0 / (4.0 * n * n));
    }
    SECTION("reality symmetry") { REQUIRE(check_real_symmetry(a, 512)); }
}

TEST_CASE("constant and zero symbols") {
    REQUIRE(rayleigh_symbol(-1.0)(5) == Complex(-1.0, 0.0));
    REQUIRE(rayleigh_symbol(-1.0)(-17) == Complex(-1.0, 0.0));
    REQUIRE(rayleigh_symbol(0.0)(3) == Complex(0.0, 0.0));
    REQUIRE(check_real_symmetry(rayleigh_symbol(-1.0), 32));
    REQUIRE(sup_norm(zero_symbol(), 512) == 0.0);
    REQUIRE(zero_symbol()(123) == Complex(0.0, 0.0));
}

TEST_CASE("reality symmetry detects violations") {
    const MultiplierSymbol bad("bad", {}, true, [](std::int64_t) { return Complex(0.0, 1.0); });
    REQUIRE_FALSE(check_real_symmetry(bad, 8));
}

TEST_CASE("sup norm behavior") {
    SECTION("smith approaches 1/2 from below") {
        const double sup = sup_norm(smith_symbol(), 512);
        REQUIRE(sup >= 0.414213);
        REQUIRE(sup <= 0.5);
    }
    SECTION("boosted depth-2 stays below 3/4") {
        REQUIRE(sup_norm(ilw_boosted_symbol(2.0), 256) <= 0.75);
    }
    SECTION("stable once the band saturates") {
        // boosted and constant symbols attain their sup inside the band
        for (const MultiplierSymbol& sym : {ilw_boosted_symbol(1.0), rayleigh_symbol(-1.0)}) {
            const double lo = sup_norm(sym, 256);
            const double hi = sup_norm(sym, 512);
            REQUIRE(std::abs(hi - lo) <= 1e-12 * std::max(lo, 1e-300));
        }
        // smith approaches its sup at the documented 1/(4n^2) rate, so band
        // doubling can move the sup by at most the tail bound at n = 256
        const double lo = sup_norm(smith_symbol(), 256);
        const double hi = sup_norm(smith_symbol(), 512);
        REQUIRE(hi >= lo);
        REQUIRE(hi - lo <= 1.0 / (4.0 * 256.0 * 256.0));
    }
}

TEST_CASE("table symbols default unspecified modes to zero") {
    MultiplierSymbol::TableEntries entries;
    entries[1] = Complex(0.0, 0.25);
    entries[-1] = Complex(0.0, -0.25);
    const MultiplierSymbol sym = table_symbol(std::move(entries));
    REQUIRE(sym(1) == Complex(0.0, 0.25));
    REQUIRE(sym(7) == Complex(0.0, 0.0));  // warns once on stderr
    REQUIRE(check_real_symmetry(sym, 4));
    REQUIRE(sym.table() != nullptr);
}
