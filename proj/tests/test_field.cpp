/// @file test_field.cpp
/// Unit tests for driving-field generation, restriction, reversal, and CSV persistence.

#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "sheetlab/field.hpp"
#include "sheetlab/rng.hpp"

using namespace sheetlab;

TEST_CASE("field: samples vanish on both axes") {
    const GridSpec g{16, 2};
    const SheetField w = generate_sheet(g, 42);
    for (int i = 0; i <= 16; ++i)
        for (int c = 0; c < 2; ++c) {
            CHECK(w.value(i, 0, c) == 0.0);
            CHECK(w.value(0, i, c) == 0.0);
        }
}

TEST_CASE("field: generation is a pure function of the seed") {
    const GridSpec g{32, 1};
    const SheetField a = generate_sheet(g, 7);
    const SheetField b = generate_sheet(g, 7);
    const SheetField c = generate_sheet(g, 8);
    REQUIRE(a.raw().size() == b.raw().size());
    for (std::size_t k = 0; k < a.raw().size(); ++k) CHECK(a.raw()[k] == b.raw()[k]);
    bool any_diff = false;
    for (std::size_t k = 0; k < a.raw().size(); ++k) any_diff = any_diff || a.raw()[k] != c.raw()[k];
    CHECK(any_diff);
    CHECK(a.seed == std::optional<std::uint64_t>{7});
}

TEST_CASE("field: restriction keeps shared nodes bit-identically") {
    const GridSpec g{32, 2};
    const SheetField w = generate_sheet(g, 3);
    const SheetField r = restrict_field(w, 4);
    REQUIRE(r.n_cells() == 8);
    for (int i = 0; i <= 8; ++i)
        for (int j = 0; j <= 8; ++j)
            for (int c = 0; c < 2; ++c) CHECK(r.value(i, j, c) == w.value(4 * i, 4 * j, c));
}

TEST_CASE("field: rectangle increments match their definition and add up") {
    const GridSpec g{16, 1};
    const SheetField w = generate_sheet(g, 11);
    const auto inc = [&](int i0, int j0, int i1, int j1) {
        return w.value(i1, j1) - w.value(i0, j1) - w.value(i1, j0) + w.value(i0, j0);
    };
    const std::vector<double> full = rectangle_increment(w, 2, 3, 10, 12);
    REQUIRE(full.size() == 1);
    CHECK(full[0] == doctest::Approx(inc(2, 3, 10, 12)).epsilon(1e-15));

    // Split along s: [2,6] + [6,10] over the same t-range.
    const std::vector<double> a = rectangle_increment(w, 2, 3, 6, 12);
    const std::vector<double> b = rectangle_increment(w, 6, 3, 10, 12);
    CHECK(a[0] + b[0] == doctest::Approx(full[0]).epsilon(1e-13));

    // Anchored at the origin the increment is the node value itself.
    const std::vector<double> anchored = rectangle_increment(w, 0, 0, 5, 7);
    CHECK(anchored[0] == w.value(5, 7));
}

TEST_CASE("field: cell increment variance tracks cell area") {
    // Mean square of i.i.d. increments over all cells of many sheets.
    const GridSpec g{8, 1};
    const int sheets = 400;
    double sum_sq = 0.0;
    long long count = 0;
    for (int s = 0; s < sheets; ++s) {
        const SheetField w = generate_sheet(g, derive_seed(1000, s));
        for (int i = 1; i <= 8; ++i)
            for (int j = 1; j <= 8; ++j) {
                const double d = w.value(i, j) - w.value(i - 1, j) - w.value(i, j - 1) +
                                 w.value(i - 1, j - 1);
                sum_sq += d * d;
                ++count;
            }
    }
    const double mean_sq = sum_sq / static_cast<double>(count);
    const double cell_area = 1.0 / 64.0;
    // Relative tolerance ~4 standard errors of a chi-square mean.
    CHECK(mean_sq == doctest::Approx(cell_area).epsilon(4.0 * std::sqrt(2.0 / count)));
}

TEST_CASE("field: csv round-trip is bit-exact") {
    const GridSpec g{8, 2};
    const SheetField w = generate_sheet(g, 99);
    const auto path = std::filesystem::temp_directory_path() / "sheetlab_test_field.csv";
    write_csv(w, path);
    const SheetField r = read_csv(path);
    REQUIRE(r.n_cells() == w.n_cells());
    REQUIRE(r.dim() == w.dim());
    for (std::size_t k = 0; k < w.raw().size(); ++k) CHECK(r.raw()[k] == w.raw()[k]);
    std::filesystem::remove(path);
}

TEST_CASE("field: time reversal permutes nodes and is an involution") {
    const GridSpec g{8, 1};
    const SheetField w = generate_sheet(g, 5);
    const SheetField r = time_reverse(w);
    for (int i = 0; i <= 8; ++i)
        for (int j = 0; j <= 8; ++j) CHECK(r.value(i, j) == w.value(i, 8 - j));
    const SheetField rr = time_reverse(r);
    for (std::size_t k = 0; k < w.raw().size(); ++k) CHECK(rr.raw()[k] == w.raw()[k]);
}

TEST_CASE("field: pairwise accumulation agrees with exact integer sums") {
    std::vector<double> data(1000);
    for (int k = 0; k < 1000; ++k) data[k] = k + 1;
    CHECK(pairwise_sum(data.data(), data.size()) == 500500.0);

    std::vector<double> pref(17);
    for (int k = 0; k < 17; ++k) pref[k] = k % 5;
    std::vector<double> expect(pref);
    for (std::size_t k = 1; k < expect.size(); ++k) expect[k] += expect[k - 1];
    pairwise_prefix(pref.data(), pref.size(), 1);
    for (std::size_t k = 0; k < pref.size(); ++k) CHECK(pref[k] == expect[k]);
}

TEST_CASE("field: sup norm is the largest node Euclidean norm") {
    const GridSpec g{4, 2};
    SheetField f(g);
    CHECK(sup_norm(f) == 0.0);
    f.value(2, 3, 0) = 3.0;
    f.value(2, 3, 1) = -4.0;
    CHECK(sup_norm(f) == doctest::Approx(5.0).epsilon(1e-15));
}
