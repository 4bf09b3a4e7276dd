/// @file test_drift.cpp
/// Unit tests for drift construction, parsing, bounds, Jacobians, and hypothesis checks.

#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sheetlab/drift.hpp"

using namespace sheetlab;

namespace {
std::vector<double> eval_at(const Drift& b, std::vector<double> x, double s = 0.0, double t = 0.0) {
    std::vector<double> out(x.size(), 0.0);
    b.eval(s, t, x, out);
    return out;
}
}  // namespace

TEST_CASE("drift: componentwise sign with the zero convention") {
    const Drift b = Drift::componentwise_sign(3);
    const auto v = eval_at(b, {-2.5, 0.0, 7.0});
    CHECK(v[0] == -1.0);
    CHECK(v[1] == 0.0);
    CHECK(v[2] == 1.0);
    CHECK(b.bound() == doctest::Approx(std::sqrt(3.0)));
    CHECK(b.monotone());
    CHECK_FALSE(b.has_gradient());
}

TEST_CASE("drift: tanh slope, bound, and Jacobian") {
    const Drift b = Drift::componentwise_tanh(2, 1.5);
    const auto v = eval_at(b, {0.3, -2.0});
    CHECK(v[0] == doctest::Approx(std::tanh(1.5 * 0.3)).epsilon(1e-15));
    CHECK(v[1] == doctest::Approx(std::tanh(-3.0)).epsilon(1e-15));
    CHECK(b.bound() == doctest::Approx(std::sqrt(2.0)));
    CHECK(b.monotone());
    REQUIRE(b.has_gradient());

    std::vector<double> jac(4, 0.0);
    const std::vector<double> x{0.3, -2.0};
    b.eval_jacobian(0.0, 0.0, x, jac);
    for (int c = 0; c < 2; ++c) {
        const double th = std::tanh(1.5 * x[c]);
        CHECK(jac[c * 2 + c] == doctest::Approx(1.5 * (1.0 - th * th)).epsilon(1e-14));
    }
    CHECK(jac[1] == 0.0);
    CHECK(jac[2] == 0.0);

    // Finite-difference audit of one diagonal entry.
    const double h = 1e-6;
    const auto up = eval_at(b, {0.3 + h, -2.0});
    const auto dn = eval_at(b, {0.3 - h, -2.0});
    CHECK(jac[0] == doctest::Approx((up[0] - dn[0]) / (2.0 * h)).epsilon(1e-7));
}

TEST_CASE("drift: constant broadcasts and linear scales") {
    const Drift c = Drift::parse("const:0.5", 3);
    const auto vc = eval_at(c, {9.0, -9.0, 0.0});
    CHECK(vc[0] == 0.5);
    CHECK(vc[1] == 0.5);
    CHECK(vc[2] == 0.5);

    const Drift lin = Drift::linear(2, 2.0);
    const auto vl = eval_at(lin, {0.25, -1.0});
    CHECK(vl[0] == 0.5);
    CHECK(vl[1] == -2.0);
    CHECK(lin.growth() == doctest::Approx(2.0));
}

TEST_CASE("drift: spec strings round-trip through parse") {
    const char* specs[] = {"zero", "identity", "sign", "tanh:1.5", "linear:2", "const:0.5,-1",
                           "sign|clamp:0.25"};
    for (const char* s : specs) {
        const Drift b = Drift::parse(s, 2);
        const Drift again = Drift::parse(b.spec_string(), 2);
        CHECK(b.spec_string() == again.spec_string());
        const auto v1 = eval_at(b, {0.7, -0.1});
        const auto v2 = eval_at(again, {0.7, -0.1});
        CHECK(v1[0] == v2[0]);
        CHECK(v1[1] == v2[1]);
    }
    CHECK_THROWS_AS((void)Drift::parse("warp:1", 1), std::invalid_argument);
    CHECK_THROWS_AS((void)Drift::parse("const:1,2,3", 2), std::invalid_argument);
}

TEST_CASE("drift: truncation clamps componentwise and is idempotent") {
    const Drift b = Drift::identity(2).truncated(0.5);
    const auto v = eval_at(b, {3.0, -0.2});
    CHECK(v[0] == 0.5);
    CHECK(v[1] == -0.2);
    CHECK(b.bound() == doctest::Approx(0.5 * std::sqrt(2.0)));

    const Drift twice = b.truncated(0.75);  // looser second clamp keeps the first
    const auto v2 = eval_at(twice, {3.0, -0.2});
    CHECK(v2[0] == 0.5);
    CHECK(twice.clamp_level() == 0.5);
}

TEST_CASE("drift: monotonicity audit accepts monotone drifts and flags a decreasing one") {
    const HypothesisReport ok = check_monotone(Drift::componentwise_tanh(2, 1.0), 500, 21);
    CHECK(ok.verdict);
    CHECK(ok.violations == 0);
    CHECK(ok.worst_margin <= 0.0);

    const Drift dec = Drift::custom(
        1,
        [](double, double, std::span<const double> x, std::span<double> out) { out[0] = -x[0]; },
        std::nullopt, 1.0, false, nullptr);
    const HypothesisReport bad = check_monotone(dec, 500, 22);
    CHECK_FALSE(bad.verdict);
    CHECK(bad.violations > 0);
    CHECK(bad.worst_margin > 0.0);
}

TEST_CASE("drift: growth audit separates true and false constants") {
    const HypothesisReport ok = check_growth(Drift::identity(2), 1.0, 500, 31);
    CHECK(ok.verdict);
    const HypothesisReport bad = check_growth(Drift::identity(2), 0.5, 500, 32);
    CHECK_FALSE(bad.verdict);
    CHECK(bad.worst_margin > 0.0);
}
