#include "sheetlab/girsanov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sheetlab/parallel.hpp"
#include "sheetlab/rng.hpp"
#include "sheetlab/solver.hpp"

namespace sheetlab {

namespace {

int cells_below(double t, int n) {
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("density_trace: horizon outside [0, 1]");
    const int k = static_cast<int>(std::ceil(t * n - 1e-9));
    return std::clamp(k, 0, n);
}

}  // namespace

DensityTrace density_trace(const SheetField& path, const Drift& b, std::span<const double> t_grid) {
    const int n = path.n_cells();
    const int d = path.dim();
    if (n < 1) throw std::invalid_argument("density_trace: empty field");
    if (b.dim() != d) throw std::invalid_argument("density_trace: drift dimension mismatch");
    if (t_grid.empty()) throw std::invalid_argument("density_trace: empty horizon grid");
    if (!std::is_sorted(t_grid.begin(), t_grid.end()))
        throw std::invalid_argument("density_trace: horizons must be nondecreasing");

    DensityTrace trace;
    if (t_grid.front() != 0.0) trace.t_grid.push_back(0.0);
    trace.t_grid.insert(trace.t_grid.end(), t_grid.begin(), t_grid.end());

    // One delta per time cell: pairwise sums over the rows of the column,
    // combined once. Horizon values are running prefixes of these deltas.
    const double inv_n2 = 1.0 / (static_cast<double>(n) * n);
    std::vector<double> delta(static_cast<std::size_t>(n), 0.0);
    std::vector<double> ito_terms(static_cast<std::size_t>(n), 0.0);
    std::vector<double> sq_terms(static_cast<std::size_t>(n), 0.0);
    std::vector<double> bx(static_cast<std::size_t>(d), 0.0);
    const double h = 1.0 / n;
    for (int q = 0; q < n; ++q) {
        const double t = q * h;
        for (int p = 0; p < n; ++p) {
            b.eval(p * h, t, path.at(p, q), bx);
            double ito = 0.0, sq = 0.0;
            for (int c = 0; c < d; ++c) {
                const double dx = path.value(p + 1, q + 1, c) - path.value(p, q + 1, c) -
                                  path.value(p + 1, q, c) + path.value(p, q, c);
                ito += bx[c] * dx;
                sq += bx[c] * bx[c];
            }
            ito_terms[p] = ito;
            sq_terms[p] = sq;
        }
        delta[q] = pairwise_sum(ito_terms.data(), static_cast<std::size_t>(n)) -
                   0.5 * inv_n2 * pairwise_sum(sq_terms.data(), static_cast<std::size_t>(n));
    }

    trace.log_z.resize(trace.t_grid.size(), 0.0);
    trace.z_values.resize(trace.t_grid.size(), 1.0);
    double running = 0.0;
    int q = 0;
    for (std::size_t k = 0; k < trace.t_grid.size(); ++k) {
        const int jt = cells_below(trace.t_grid[k], n);
        for (; q < jt; ++q) running += delta[q];
        if (!std::isfinite(running)) throw std::runtime_error("density_trace: non-finite accumulation");
        trace.log_z[k] = running;
        trace.z_values[k] = std::exp(running);
    }
    return trace;
}

MartingaleReport martingale_check(const Drift& b, long long samples, std::span<const double> t_grid,
                                  const GridSpec& grid, std::uint64_t seed) {
    if (samples < 2) throw std::invalid_argument("martingale_check: needs at least 2 samples");
    grid.validate();
    if (b.dim() != grid.dim) throw std::invalid_argument("martingale_check: drift dimension mismatch");

    // Resolve the horizon layout once so every sample indexes identically.
    std::vector<double> probe(t_grid.begin(), t_grid.end());
    if (probe.empty()) throw std::invalid_argument("martingale_check: empty horizon grid");
    const std::size_t horizons = probe.front() != 0.0 ? probe.size() + 1 : probe.size();

    std::vector<double> z(static_cast<std::size_t>(samples) * horizons, 0.0);
    parallel_for(static_cast<std::size_t>(samples), [&](std::size_t j) {
        const SheetField x = generate_sheet(grid, derive_seed(seed, j));
        const DensityTrace trace = density_trace(x, b, probe);
        for (std::size_t k = 0; k < horizons; ++k) z[j * horizons + k] = trace.z_values[k];
    });

    MartingaleReport rep;
    rep.samples = samples;
    {
        const SheetField x0 = generate_sheet(grid, derive_seed(seed, 0));
        rep.t_grid = density_trace(x0, b, probe).t_grid;
    }
    rep.ez.resize(horizons, 0.0);
    rep.se.resize(horizons, 0.0);
    rep.max_share.resize(horizons, 0.0);

    std::vector<double> column(static_cast<std::size_t>(samples), 0.0);
    bool all_within = true;
    for (std::size_t k = 0; k < horizons; ++k) {
        double zmax = 0.0;
        for (std::size_t j = 0; j < static_cast<std::size_t>(samples); ++j) {
            column[j] = z[j * horizons + k];
            zmax = std::max(zmax, column[j]);
        }
        const double total = pairwise_sum(column.data(), column.size());
        const double mean = total / static_cast<double>(samples);
        for (std::size_t j = 0; j < column.size(); ++j) {
            const double dev = column[j] - mean;
            column[j] = dev * dev;
        }
        const double var =
            pairwise_sum(column.data(), column.size()) / static_cast<double>(samples - 1);
        const double se = std::sqrt(var / static_cast<double>(samples));
        rep.ez[k] = mean;
        rep.se[k] = se;
        rep.max_share[k] = total > 0.0 ? zmax / total : 0.0;
        if (rep.max_share[k] > 0.5) rep.unstable = true;
        if (!std::isfinite(mean) || std::abs(mean - 1.0) > 4.0 * se) all_within = false;
    }
    rep.verdict = all_within;
    return rep;
}

SheetField weak_solution_shift(const SheetField& path, const Drift& b) {
    const int n = path.n_cells();
    const int d = path.dim();
    if (n < 1) throw std::invalid_argument("weak_solution_shift: empty field");
    if (b.dim() != d) throw std::invalid_argument("weak_solution_shift: drift dimension mismatch");

    const SheetField s = drift_quadrature(b, path);
    SheetField w(path.grid());
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
            for (int c = 0; c < d; ++c)
                w.value(i, j, c) = path.value(i, j, c) - path.value(i, 0, c) - path.value(0, j, c) +
                                   path.value(0, 0, c) - s.value(i, j, c);
    return w;
}

}  // namespace sheetlab
