#include "sheetlab/gronwall.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace sheetlab {

double bessel_i0(double z) {
    if (!(z >= 0.0)) throw std::invalid_argument("bessel_i0: z must be >= 0");
    if (z > 700.0) throw std::overflow_error("bessel_i0: z > 700 overflows double range");
    const double w = 0.25 * z * z;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 10000; ++k) {
        term *= w / (static_cast<double>(k) * k);
        sum += term;
        if (term < 1e-16 * sum) break;
    }
    return sum;
}

double resolvent_h(double m, double xi, double zeta, double s, double t) {
    if (m < 0.0) throw std::invalid_argument("resolvent_h: m must be >= 0");
    if (xi > s || zeta > t) throw std::invalid_argument("resolvent_h: requires xi <= s and zeta <= t");
    return bessel_i0(2.0 * std::sqrt(m * (s - xi) * (t - zeta)));
}

double verify_resolvent(double m, int n) {
    if (n < 1) throw std::invalid_argument("verify_resolvent: n must be >= 1");
    if (m < 0.0) throw std::invalid_argument("verify_resolvent: m must be >= 0");
    const double h = 1.0 / n;

    // Midpoint samples of the kernel at (s,t) = (1,1), then a suffix prefix
    // sum turns all grid quadratures into O(1) lookups.
    std::vector<double> acc(static_cast<std::size_t>(n + 1) * (n + 1), 0.0);
    const auto at = [&](int p, int q) -> double& {
        return acc[static_cast<std::size_t>(p) * (n + 1) + q];
    };
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
            at(p, q) = resolvent_h(m, (p + 0.5) * h, (q + 0.5) * h, 1.0, 1.0);
    for (int p = n - 1; p >= 0; --p)
        for (int q = n - 1; q >= 0; --q)
            at(p, q) += at(p + 1, q) + at(p, q + 1) - at(p + 1, q + 1);

    double worst = 0.0;
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            const double quad = at(i, j) * h * h;  // integral over [i/n,1]x[j/n,1]
            const double lhs = resolvent_h(m, i * h, j * h, 1.0, 1.0);
            worst = std::max(worst, std::abs(lhs - 1.0 - m * quad));
        }
    }
    return worst;
}

SheetField continuous_bound(const SheetField& f, double m) {
    if (m < 0.0) throw std::invalid_argument("continuous_bound: m must be >= 0");
    if (f.dim() != 1) throw std::invalid_argument("continuous_bound: scalar fields only");
    const int n = f.n_cells();
    const double h = f.grid().spacing();
    const double h2 = h * h;

    // Kernel depends only on index differences: K[di][dj] = h(0,0, di*h, dj*h).
    std::vector<double> kernel(static_cast<std::size_t>(n + 1) * (n + 1));
    for (int di = 0; di <= n; ++di)
        for (int dj = 0; dj <= n; ++dj)
            kernel[static_cast<std::size_t>(di) * (n + 1) + dj] =
                bessel_i0(2.0 * std::sqrt(m * (di * h) * (dj * h)));

    SheetField g(f.grid());
    for (int a = 0; a <= n; ++a) {
        for (int bidx = 0; bidx <= n; ++bidx) {
            double quad = 0.0;
            for (int p = 0; p < a; ++p) {
                const double* krow = kernel.data() + static_cast<std::size_t>(a - p) * (n + 1);
                for (int q = 0; q < bidx; ++q) quad += f.value(p, q) * krow[bidx - q];
            }
            g.value(a, bidx) = f.value(a, bidx) + m * quad * h2;
        }
    }
    return g;
}

GronwallTable discrete_bound_table(int level, int dim, double c1, double beta_log2) {
    if (level < 1 || level > 20) throw std::invalid_argument("discrete_bound_table: level out of range");
    if (dim < 1) throw std::invalid_argument("discrete_bound_table: dim must be >= 1");
    if (c1 < 0.0) throw std::invalid_argument("discrete_bound_table: c1 must be >= 0");
    GronwallTable tbl;
    tbl.level = level;
    tbl.dim = dim;
    tbl.c1 = c1;
    tbl.beta_log2 = beta_log2;
    const int side = tbl.side();
    const double sd = std::sqrt(static_cast<double>(dim));
    const double log2_3sd = std::log2(3.0 * sd);
    const double growth = 1.0 + c1 * std::sqrt(static_cast<double>(dim) * level) * std::ldexp(1.0, -level);
    const double log2_growth = std::log2(growth);
    tbl.entries_log2.resize(static_cast<std::size_t>(side) * side);
    for (int k = 1; k <= side; ++k)
        for (int kp = 1; kp <= side; ++kp)
            tbl.entries_log2[static_cast<std::size_t>(k - 1) * side + (kp - 1)] =
                (k + kp - 1) * log2_3sd + (k + kp) * log2_growth + beta_log2;
    return tbl;
}

namespace {

// floor(2^(4n/3)) in exact integer arithmetic: the integer cube root of
// 2^(4n), found by binary search over unsigned 128-bit values.
unsigned long long floor_pow2_4n_over_3(int n) {
    if (n < 0 || n > 31) throw std::invalid_argument("vanishing_check: n out of exact range [0,31]");
    const unsigned __int128 target = static_cast<unsigned __int128>(1) << (4 * n);
    // 2^(4n/3) < 2^(4n/3 + 1), and cubes of this bound still fit in 128 bits.
    unsigned long long lo = 1, hi = 1ULL << (4 * n / 3 + 1);
    while (lo < hi) {
        const unsigned long long mid = lo + (hi - lo + 1) / 2;
        const unsigned __int128 cube =
            static_cast<unsigned __int128>(mid) * mid * static_cast<unsigned __int128>(mid);
        if (cube <= target)
            lo = mid;
        else
            hi = mid - 1;
    }
    return lo;
}

}  // namespace

VanishingReport vanishing_check(int n_max, int dim, double c1, int n_min) {
    if (n_min < 1 || n_max < n_min) throw std::invalid_argument("vanishing_check: need 1 <= n_min <= n_max");
    if (n_max > 31) throw std::invalid_argument("vanishing_check: n_max must be <= 31 for exact arithmetic");
    if (dim < 1) throw std::invalid_argument("vanishing_check: dim must be >= 1");
    VanishingReport rep;
    rep.n_min = n_min;
    rep.n_max = n_max;
    rep.dim = dim;
    rep.c1 = c1;
    const double log2_4sd = std::log2(4.0 * std::sqrt(static_cast<double>(dim)));
    for (int n = n_min; n <= n_max; ++n) {
        // 2^(n+1) * log2(4 sqrt(d)) is exact for d = 1 (the log is the
        // integer 2); the beta exponent is floored outward exactly.
        const double lead = std::ldexp(log2_4sd, n + 1);
        const double l = lead - static_cast<double>(floor_pow2_4n_over_3(n));
        rep.l_values.push_back(l);
        const double small = c1 * std::sqrt(static_cast<double>(dim) * n) * std::ldexp(1.0, -n);
        rep.smallness_ok.push_back(small <= 1.0 / 3.0);
        if (l < -1000.0) rep.crosses_minus_1000 = true;
    }
    // Find the smallest n0 such that L is strictly decreasing on [n0, n_max].
    int n0 = n_max;
    for (int n = n_max - 1; n >= n_min; --n) {
        if (rep.l_values[n - n_min] > rep.l_values[n + 1 - n_min])
            n0 = n;
        else
            break;
    }
    rep.decreasing_from = n0;
    rep.verdict = rep.crosses_minus_1000 && n0 < n_max;
    return rep;
}

}  // namespace sheetlab
