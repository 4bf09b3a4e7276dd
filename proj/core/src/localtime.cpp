#include "sheetlab/localtime.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "sheetlab/parallel.hpp"

namespace sheetlab {

namespace {

// Number of grid cells [j/N, (j+1)/N) strictly below the horizon t.
int cells_below(double t, int n) {
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("horizon outside [0, 1]");
    const int k = static_cast<int>(std::ceil(t * n - 1e-9));
    return std::clamp(k, 0, n);
}

void require_scalar(const SheetField& w, const char* what) {
    if (w.dim() != 1) throw std::invalid_argument(std::string(what) + ": scalar fields only");
    if (w.n_cells() < 1) throw std::invalid_argument(std::string(what) + ": empty field");
}

// Occupation counts of one row: how many of the first jt nodes lie within
// +-bw of each level.
void add_row_counts(const SheetField& w, int i, int jt, std::span<const double> x_grid,
                    double bw, std::span<std::int64_t> counts) {
    for (std::size_t k = 0; k < x_grid.size(); ++k) {
        const double lo = x_grid[k] - bw;
        const double hi = x_grid[k] + bw;
        std::int64_t c = 0;
        for (int j = 0; j < jt; ++j) {
            const double v = w.value(i, j);
            c += (v >= lo && v <= hi) ? 1 : 0;
        }
        counts[k] += c;
    }
}

}  // namespace

OccupationEstimate row_local_time(const SheetField& w, int i, double t,
                                  std::span<const double> x_grid, double bandwidth) {
    require_scalar(w, "row_local_time");
    const int n = w.n_cells();
    if (i < 0 || i > n) throw std::invalid_argument("row_local_time: row index out of range");
    if (bandwidth <= 0.0) throw std::invalid_argument("row_local_time: bandwidth must be positive");
    if (x_grid.empty()) throw std::invalid_argument("row_local_time: empty level grid");
    const int jt = cells_below(t, n);

    OccupationEstimate est;
    est.x_grid.assign(x_grid.begin(), x_grid.end());
    est.density.assign(x_grid.size(), 0.0);
    est.bandwidth = bandwidth;
    est.s_horizon = static_cast<double>(i) / n;
    est.t_horizon = t;
    est.row_index = i;

    std::vector<std::int64_t> counts(x_grid.size(), 0);
    add_row_counts(w, i, jt, x_grid, bandwidth, counts);
    const double scale = 1.0 / (2.0 * bandwidth * n);
    for (std::size_t k = 0; k < counts.size(); ++k)
        est.density[k] = static_cast<double>(counts[k]) * scale;
    return est;
}

double row_local_time_at(const SheetField& w, int i, double t, double x, double bandwidth) {
    const double level[1] = {x};
    return row_local_time(w, i, t, std::span<const double>(level, 1), bandwidth).density[0];
}

OccupationEstimate plane_local_time(const SheetField& w, double s, double t,
                                    std::span<const double> x_grid, double bandwidth) {
    require_scalar(w, "plane_local_time");
    const int n = w.n_cells();
    if (bandwidth <= 0.0) throw std::invalid_argument("plane_local_time: bandwidth must be positive");
    if (x_grid.empty()) throw std::invalid_argument("plane_local_time: empty level grid");
    const int it = cells_below(s, n);
    const int jt = cells_below(t, n);

    OccupationEstimate est;
    est.x_grid.assign(x_grid.begin(), x_grid.end());
    est.density.assign(x_grid.size(), 0.0);
    est.bandwidth = bandwidth;
    est.s_horizon = s;
    est.t_horizon = t;
    est.row_index = -1;

    // Integer counts per row, pooled and scaled once: the result is exact in
    // the counts, so restricting the row range splits the sum exactly.
    std::vector<std::vector<std::int64_t>> row_counts(
        static_cast<std::size_t>(std::max(it, 0)), std::vector<std::int64_t>(x_grid.size(), 0));
    parallel_for(it, [&](int i) { add_row_counts(w, i, jt, x_grid, bandwidth, row_counts[i]); });

    std::vector<std::int64_t> total(x_grid.size(), 0);
    for (int i = 0; i < it; ++i)
        for (std::size_t k = 0; k < total.size(); ++k) total[k] += row_counts[i][k];

    const double scale = 1.0 / (2.0 * bandwidth * static_cast<double>(n) * static_cast<double>(n));
    for (std::size_t k = 0; k < total.size(); ++k)
        est.density[k] = static_cast<double>(total[k]) * scale;
    return est;
}

double tanaka_residual(const SheetField& w, int i, double t, double x, double bandwidth) {
    require_scalar(w, "tanaka_residual");
    const int n = w.n_cells();
    if (i < 0 || i > n) throw std::invalid_argument("tanaka_residual: row index out of range");
    const int jt = cells_below(t, n);

    std::vector<double> terms(static_cast<std::size_t>(std::max(jt, 1)), 0.0);
    for (int j = 0; j < jt; ++j) {
        const double v = w.value(i, j);
        terms[j] = (v <= x) ? (w.value(i, j + 1) - v) : 0.0;
    }
    const double ito = (jt > 0) ? pairwise_sum(terms.data(), static_cast<std::size_t>(jt)) : 0.0;

    const double s_i = static_cast<double>(i) / n;
    const double lt = row_local_time_at(w, i, t, x, bandwidth);
    const double end = w.value(i, jt);
    const double neg_part = std::max(x - end, 0.0);   // (end - x)^-
    const double pos_part = std::max(x, 0.0);
    return ito - (0.5 * s_i * lt - neg_part + pos_part);
}

LtsResult lts_formula_residual(const SheetField& w, const SpaceTimeFn& f, const SpaceTimeFn& df,
                               int coord, double s, double t, double xi0, double u0) {
    const int n = w.n_cells();
    if (n < 1) throw std::invalid_argument("lts_formula_residual: empty field");
    if (coord < 0 || coord >= w.dim()) throw std::invalid_argument("lts_formula_residual: bad coordinate");
    if (!f || !df) throw std::invalid_argument("lts_formula_residual: missing test function");
    if (!(xi0 > 0.0) || xi0 >= 1.0) throw std::invalid_argument("lts_formula_residual: xi0 outside (0, 1)");
    if (u0 < 0.0 || u0 >= 0.5) throw std::invalid_argument("lts_formula_residual: u0 outside [0, 1/2)");

    const double h = 1.0 / n;
    const int p_hi = cells_below(s, n);
    const int p_lo = std::max(1, static_cast<int>(std::ceil(xi0 * n - 1e-9)));
    if (p_lo >= p_hi) throw std::runtime_error("lts_formula_residual: row cutoff leaves no rows");

    const int q_lo = static_cast<int>(std::ceil(u0 * n - 1e-9));
    const int q_hi = cells_below(std::min(t, 1.0 - u0), n);
    if (q_lo >= q_hi) throw std::runtime_error("lts_formula_residual: time cutoff leaves no cells");

    std::vector<double> row_lhs(static_cast<std::size_t>(p_hi), 0.0);
    std::vector<double> row_rhs(static_cast<std::size_t>(p_hi), 0.0);

    parallel_for(p_hi - p_lo, [&](int off) {
        const int p = p_lo + off;
        const double xi = p * h;
        double lhs = 0.0, t1 = 0.0, t2 = 0.0, t3 = 0.0;

        for (int q = q_lo; q < q_hi; ++q) {
            const double u = q * h;
            const auto xv = w.at(p, q);
            lhs += df(xi, u, xv) * h;
            t1 += f(xi, u, xv) * (w.value(p, q + 1, coord) - w.value(p, q, coord));
        }

        // Reversed-time cells covering the same original region. Node m of the
        // original row plays reversed node r = n - m; the reversed increment
        // picks up a drift What/(1-u) that the third term removes again.
        for (int r = n - q_hi; r < n - q_lo; ++r) {
            const int m = n - r;
            const double one_minus_u = m * h;
            const auto xv = w.at(p, m);
            const double fv = f(xi, one_minus_u, xv);
            const double wc = w.value(p, m, coord);
            const double d_what = w.value(p, m - 1, coord) - wc;
            const double comp = wc / one_minus_u * h;
            t2 += fv * (d_what + comp);
            t3 += fv * comp;
        }

        row_lhs[p] = lhs * h;
        row_rhs[p] = (-t1 / xi - t2 / xi + t3 / xi) * h;
    });

    LtsResult res;
    for (int p = p_lo; p < p_hi; ++p) {
        res.lhs += row_lhs[p];
        res.rhs += row_rhs[p];
    }
    res.residual = res.lhs - res.rhs;
    return res;
}

}  // namespace sheetlab
