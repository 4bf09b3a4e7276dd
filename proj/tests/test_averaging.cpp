/// @file test_averaging.cpp
/// Unit tests for block averages of drift differences along the sheet and
/// the derived tail / modulus / exponential-moment estimators.

#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sheetlab/averaging.hpp"
#include "sheetlab/drift.hpp"
#include "sheetlab/field.hpp"

using namespace sheetlab;

namespace {

std::vector<double> vec1(double v) { return {v}; }

}  // namespace

TEST_CASE("rho is antisymmetric in its two shift arguments, bitwise") {
    const SheetField w = generate_sheet(GridSpec{32, 2}, 901);
    const Drift b = Drift::parse("tanh:1.0", 2);
    const DyadicBlock blk{2, 1, 3};
    const std::vector<double> x = {0.3, -0.2};
    const std::vector<double> y = {-0.1, 0.7};
    const std::vector<double> fwd = rho(w, b, blk, x, y);
    const std::vector<double> bwd = rho(w, b, blk, y, x);
    REQUIRE(fwd.size() == 2);
    for (std::size_t c = 0; c < fwd.size(); ++c) CHECK(fwd[c] == -bwd[c]);
}

TEST_CASE("rho chains through an intermediate point") {
    const SheetField w = generate_sheet(GridSpec{32, 1}, 902);
    const Drift b = Drift::parse("tanh:1.0", 1);
    const DyadicBlock blk{1, 0, 1};
    const auto xy = rho(w, b, blk, vec1(0.4), vec1(-0.6));
    const auto xz = rho(w, b, blk, vec1(0.4), vec1(0.1));
    const auto zy = rho(w, b, blk, vec1(0.1), vec1(-0.6));
    CHECK(std::abs(xy[0] - (xz[0] + zy[0])) <= 1e-12);
}

TEST_CASE("rho vanishes exactly for zero drift and for equal shifts") {
    const SheetField w = generate_sheet(GridSpec{16, 2}, 903);
    const DyadicBlock blk{0, 0, 0};
    const std::vector<double> x = {0.9, -0.4};
    const std::vector<double> y = {-1.1, 0.2};
    const auto rz = rho(w, Drift::zero(2), blk, x, y);
    for (double rc : rz) CHECK(rc == 0.0);
    const auto rxx = rho(w, Drift::parse("sign", 2), blk, x, x);
    for (double rc : rxx) CHECK(rc == 0.0);
}

TEST_CASE("rho is bounded by twice the drift ceiling times the block area") {
    const SheetField w = generate_sheet(GridSpec{64, 1}, 904);
    const Drift b = Drift::parse("sign", 1);
    for (int level : {0, 1, 2, 3}) {
        const double cap = 2.0 * std::ldexp(1.0, -2 * level) * (1.0 + 1e-12);
        const int side = 1 << level;
        for (int k = 0; k < side; ++k)
            for (int kp = 0; kp < side; ++kp) {
                const auto r = rho(w, b, DyadicBlock{level, k, kp}, vec1(0.8), vec1(-0.8));
                CHECK(std::abs(r[0]) <= cap);
            }
    }
}

TEST_CASE("rho of a componentwise-nondecreasing drift has a definite sign") {
    // x <= y componentwise forces b(W+x) <= b(W+y), hence rho(x, y) <= 0.
    const SheetField w = generate_sheet(GridSpec{32, 2}, 905);
    for (const char* spec : {"sign", "tanh:2.0"}) {
        const Drift b = Drift::parse(spec, 2);
        const std::vector<double> x = {-0.3, 0.0};
        const std::vector<double> y = {0.2, 0.5};
        const auto r = rho(w, b, DyadicBlock{1, 1, 0}, x, y);
        for (double rc : r) CHECK(rc <= 0.0);
    }
}

TEST_CASE("a block average equals the sum over its four children") {
    const SheetField w = generate_sheet(GridSpec{64, 1}, 906);
    const std::vector<double> x = vec1(0.05);
    const std::vector<double> y = vec1(-0.35);

    // Sign drift: every quadrature term is an integer multiple of the cell
    // area, so parent and child sums agree bit for bit.
    const Drift bs = Drift::parse("sign", 1);
    // Smooth drift: agreement up to rounding in the summation tree.
    const Drift bt = Drift::parse("tanh:1.0", 1);

    for (int level : {1, 2}) {
        const int side = 1 << level;
        for (int k = 0; k < side; ++k)
            for (int kp = 0; kp < side; ++kp) {
                const auto parent_s = rho(w, bs, DyadicBlock{level, k, kp}, x, y);
                const auto parent_t = rho(w, bt, DyadicBlock{level, k, kp}, x, y);
                double child_s = 0.0, child_t = 0.0;
                for (int a = 0; a < 2; ++a)
                    for (int bb = 0; bb < 2; ++bb) {
                        const DyadicBlock c{level + 1, 2 * k + a, 2 * kp + bb};
                        child_s += rho(w, bs, c, x, y)[0];
                        child_t += rho(w, bt, c, x, y)[0];
                    }
                CHECK(parent_s[0] == child_s);
                CHECK(std::abs(parent_t[0] - child_t) <= 1e-14);
            }
    }
}

TEST_CASE("rho rejects malformed blocks and mismatched dimensions") {
    const SheetField w = generate_sheet(GridSpec{16, 1}, 907);
    const Drift b = Drift::parse("sign", 1);
    CHECK_THROWS_AS(rho(w, b, DyadicBlock{-1, 0, 0}, vec1(0.0), vec1(1.0)), std::invalid_argument);
    CHECK_THROWS_AS(rho(w, b, DyadicBlock{5, 0, 0}, vec1(0.0), vec1(1.0)),
                    std::invalid_argument);  // 2^5 does not divide 16
    CHECK_THROWS_AS(rho(w, b, DyadicBlock{1, 2, 0}, vec1(0.0), vec1(1.0)), std::invalid_argument);
    const std::vector<double> bad = {0.0, 1.0};
    CHECK_THROWS_AS(rho(w, b, DyadicBlock{0, 0, 0}, bad, bad), std::invalid_argument);
}

TEST_CASE("window spec validates side lengths and containment") {
    WindowSpec ok{0.25, 0.5, 0.25, 0.25};
    CHECK_NOTHROW(ok.validate());
    WindowSpec degenerate{0.25, 0.5, 0.0, 0.25};
    CHECK_THROWS_AS(degenerate.validate(), std::invalid_argument);
    WindowSpec outside{0.75, 0.5, 0.5, 0.25};
    CHECK_THROWS_AS(outside.validate(), std::invalid_argument);
}

TEST_CASE("tail estimate is inconclusive for zero drift") {
    const std::vector<double> eta = {0.5, 1.0, 1.5, 2.0};
    const TailReport rep = tail_estimate(Drift::zero(1), WindowSpec{0.25, 0.25, 0.5, 0.5},
                                         vec1(0.0), vec1(0.5), 200, eta, GridSpec{16, 1}, 11);
    // |rho| == 0 for every sample, so no eta level retains mass.
    CHECK(rep.inconclusive);
    CHECK_FALSE(rep.verdict);
}

TEST_CASE("tail probabilities are nonincreasing and the fit finds decay") {
    // The normalized statistic is capped at eps*eps'*|x-y| / unit = 0.25 for
    // this window (the drift difference never exceeds |x-y| for a unit-slope
    // drift), so the informative eta range sits inside (0.1, 0.25).
    std::vector<double> eta;
    for (int i = 0; i < 7; ++i) eta.push_back(0.10 + 0.02 * i);
    const TailReport rep =
        tail_estimate(Drift::parse("tanh:1.0", 1), WindowSpec{0.5, 0.5, 0.25, 0.25}, vec1(0.0),
                      vec1(0.5), 4000, eta, GridSpec{32, 1}, 77);
    REQUIRE(rep.tail_prob.size() == eta.size());
    for (std::size_t i = 1; i < rep.tail_prob.size(); ++i)
        CHECK(rep.tail_prob[i] <= rep.tail_prob[i - 1]);
    CHECK_FALSE(rep.inconclusive);
    CHECK(rep.alpha_hat > 0.0);
    for (double p : rep.tail_prob) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("tail estimate is deterministic in the seed") {
    const std::vector<double> eta = {0.5, 1.0, 1.5};
    const WindowSpec win{0.5, 0.5, 0.25, 0.25};
    const GridSpec grid{16, 1};
    const Drift b = Drift::parse("tanh:1.0", 1);
    const TailReport a = tail_estimate(b, win, vec1(0.0), vec1(0.4), 500, eta, grid, 5);
    const TailReport c = tail_estimate(b, win, vec1(0.0), vec1(0.4), 500, eta, grid, 5);
    for (std::size_t i = 0; i < eta.size(); ++i) CHECK(a.tail_prob[i] == c.tail_prob[i]);
    CHECK(a.alpha_hat == c.alpha_hat);
}

TEST_CASE("modulus scan: zero drift gives zero, sign drift a positive constant") {
    const SheetField w = generate_sheet(GridSpec{32, 1}, 908);
    const ScanReport zr = modulus_scan(w, Drift::zero(1), 2, 2);
    CHECK(zr.constant == 0.0);
    const ScanReport sr = modulus_scan(w, Drift::parse("sign", 1), 2, 2);
    CHECK(sr.constant > 0.0);
    const ScanReport sr2 = modulus_scan(w, Drift::parse("sign", 1), 2, 2);
    CHECK(sr.constant == sr2.constant);
    CHECK(sr.arg_x.size() == 1);
    CHECK(sr.arg_y.size() == 1);
}

TEST_CASE("zero-anchored scan agrees between plain and log-space normalization") {
    const SheetField w = generate_sheet(GridSpec{32, 1}, 909);
    const Drift b = Drift::parse("tanh:1.5", 1);
    std::vector<std::vector<double>> pts;
    for (double v : {-0.75, -0.25, 0.125, 0.5, 1.0}) pts.push_back(vec1(v));
    for (int level : {1, 2, 4}) {
        const ScanReport p = zero_anchor_scan(w, b, level, pts, AnchorMode::plain);
        const ScanReport q = zero_anchor_scan(w, b, level, pts, AnchorMode::extended_log);
        CHECK(p.constant == doctest::Approx(q.constant).epsilon(1e-12));
    }
}

TEST_CASE("zero-anchored scan refuses plain mode once the offset underflows") {
    const SheetField w = generate_sheet(GridSpec{32, 1}, 910);
    const Drift b = Drift::parse("sign", 1);
    std::vector<std::vector<double>> pts = {vec1(0.5)};
    CHECK_THROWS_AS(zero_anchor_scan(w, b, 5, pts, AnchorMode::plain), std::invalid_argument);
    CHECK_NOTHROW(zero_anchor_scan(w, b, 5, pts, AnchorMode::extended_log));
}

TEST_CASE("exponential moment of a zero drift is exactly one") {
    const ExpMomentReport rep =
        exp_moment(Drift::zero(2), WindowSpec{0.0, 0.0, 1.0, 1.0}, 0.5, 64, GridSpec{16, 2}, 31);
    CHECK(rep.estimate == 1.0);
    CHECK(rep.se == 0.0);
    CHECK_FALSE(rep.unstable);
}

TEST_CASE("exponential moment of a bounded smooth drift is finite and >= 1") {
    const ExpMomentReport rep = exp_moment(Drift::parse("tanh:1.0", 1),
                                           WindowSpec{0.25, 0.25, 0.25, 0.25}, 0.05, 400,
                                           GridSpec{32, 1}, 32);
    CHECK(std::isfinite(rep.estimate));
    CHECK(rep.estimate >= 1.0);
    CHECK(rep.se >= 0.0);
}

TEST_CASE("exponential moment requires an evaluable drift gradient") {
    CHECK_THROWS(exp_moment(Drift::parse("sign", 1), WindowSpec{0.0, 0.0, 0.5, 0.5}, 0.1, 10,
                            GridSpec{16, 1}, 33));
}
