/// @file test_gronwall.cpp
/// Unit tests for the series kernel, resolvent identity, bound tables, and vanishing check.

#include "doctest.h"

#include <cmath>
#include <vector>

#include "sheetlab/field.hpp"
#include "sheetlab/gronwall.hpp"
#include "sheetlab/solver.hpp"

using namespace sheetlab;

namespace {
// Independent series oracle: 30 terms, summed smallest-first in long double.
long double i0_series_oracle(long double z) {
    long double terms[30];
    long double fact = 1.0L;
    for (int k = 0; k < 30; ++k) {
        if (k > 0) fact *= k;
        const long double half = std::pow(z / 2.0L, k);
        terms[k] = (half / fact) * (half / fact);
    }
    long double sum = 0.0L;
    for (int k = 29; k >= 0; --k) sum += terms[k];
    return sum;
}
}  // namespace

TEST_CASE("gronwall: series kernel matches the 30-term oracle") {
    CHECK(bessel_i0(0.0) == 1.0);
    for (double z : {0.5, 1.0, 2.0, 5.0}) {
        const double oracle = static_cast<double>(i0_series_oracle(z));
        CHECK(std::abs(bessel_i0(z) - oracle) <= 1e-12 * oracle);
    }
    CHECK_THROWS_AS((void)bessel_i0(701.0), std::overflow_error);
    CHECK_THROWS_AS((void)bessel_i0(-1.0), std::invalid_argument);
}

TEST_CASE("gronwall: resolvent kernel is one on the diagonal and grows off it") {
    CHECK(resolvent_h(1.0, 0.3, 0.7, 0.3, 0.7) == 1.0);
    const double near = resolvent_h(1.0, 0.2, 0.2, 0.5, 0.5);
    const double far = resolvent_h(1.0, 0.2, 0.2, 1.0, 1.0);
    CHECK(near > 1.0);
    CHECK(far > near);
}

TEST_CASE("gronwall: resolvent identity residual decays quadratically") {
    const double r64 = verify_resolvent(1.0, 64);
    const double r128 = verify_resolvent(1.0, 128);
    CHECK(r64 <= 5e-3);
    CHECK(r64 / r128 == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("gronwall: continuous bound dominates the marching solution") {
    const GridSpec g{64, 1};
    const double m = 1.0;
    const Drift b = Drift::linear(1, m);
    for (std::uint64_t seed : {101ULL, 102ULL, 103ULL}) {
        const SheetField w = generate_sheet(g, seed);
        const SolutionField x = solve_explicit(b, w, BoundaryTrace::zero(g));
        // |X| <= F + m Quad(|X|) with F = |W| + m s t, so the resolvent
        // majorant of F bounds |X| node-wise.
        SheetField f(g);
        for (int i = 0; i <= 64; ++i)
            for (int j = 0; j <= 64; ++j)
                f.value(i, j) = std::abs(w.value(i, j)) + m * (i / 64.0) * (j / 64.0);
        const SheetField bound = continuous_bound(f, m);
        for (int i = 0; i <= 64; ++i)
            for (int j = 0; j <= 64; ++j)
                CHECK(std::abs(x.field.value(i, j)) <= bound.value(i, j) * (1.0 + 1e-12) + 1e-300);
    }
}

TEST_CASE("gronwall: block table entries reproduce the closed form") {
    const GronwallTable t = discrete_bound_table(3, 2, 1.25, -20.0);
    REQUIRE(t.side() == 8);
    REQUIRE(t.entries_log2.size() == 64);
    const double factor = std::log2(1.0 + 1.25 * std::sqrt(2.0 * 3.0) * std::ldexp(1.0, -3));
    const double base = std::log2(3.0 * std::sqrt(2.0));
    for (int k = 1; k <= 8; ++k)
        for (int kp = 1; kp <= 8; ++kp)
            CHECK(t.at(k, kp) == (k + kp - 1) * base + (k + kp) * factor + (-20.0));
}

TEST_CASE("gronwall: vanishing magnitudes match exact integer arithmetic") {
    const VanishingReport rep = vanishing_check(16, 1, 1.0);
    REQUIRE(rep.n_min == 1);
    REQUIRE(static_cast<int>(rep.l_values.size()) == 16);
    const auto l = [&](int n) { return rep.l_values[static_cast<std::size_t>(n - rep.n_min)]; };
    CHECK(l(3) == 16.0);
    CHECK(l(5) == 27.0);
    CHECK(l(6) == 0.0);
    CHECK(l(9) == -2048.0);
    CHECK(l(12) == 16384.0 - 65536.0);

    CHECK(rep.decreasing_from == 5);
    CHECK(rep.crosses_minus_1000);
    CHECK(rep.verdict);

    // Smallness bookkeeping: sqrt(n) 2^-n <= 1/3 first holds at n = 3.
    CHECK_FALSE(rep.smallness_ok[0]);
    CHECK_FALSE(rep.smallness_ok[1]);
    CHECK(rep.smallness_ok[2]);
    CHECK(rep.smallness_ok[15]);
}

TEST_CASE("gronwall: vanishing check handles the largest supported level") {
    const VanishingReport rep = vanishing_check(31, 1, 1.0);
    // At n = 30 the subtracted term is exactly 4^20.
    const double l30 = rep.l_values[29];
    CHECK(l30 == std::ldexp(1.0, 32) - std::ldexp(1.0, 40));
    CHECK_THROWS_AS((void)vanishing_check(32, 1, 1.0), std::invalid_argument);
}
