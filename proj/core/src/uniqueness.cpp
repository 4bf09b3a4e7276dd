#include "sheetlab/uniqueness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sheetlab/averaging.hpp"
#include "sheetlab/gronwall.hpp"
#include "sheetlab/rng.hpp"
#include "sheetlab/solver.hpp"

namespace sheetlab {

namespace {

// Quad over [0, s_i) x [0, t_j) of b(., W + u) - b(., W): both evaluations
// share the node, so the integrand is exactly zero wherever u vanishes.
SheetField difference_quadrature(const Drift& b, const SheetField& w, const SheetField& u) {
    const int n = w.n_cells();
    const int d = w.dim();
    const double h = 1.0 / n;
    const double h2 = h * h;

    std::vector<double> terms(static_cast<std::size_t>(n) * n * d, 0.0);
    std::vector<double> shifted(static_cast<std::size_t>(d), 0.0);
    std::vector<double> b_shift(static_cast<std::size_t>(d), 0.0);
    std::vector<double> b_base(static_cast<std::size_t>(d), 0.0);
    for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
            const auto wx = w.at(p, q);
            const auto ux = u.at(p, q);
            for (int c = 0; c < d; ++c) shifted[c] = wx[c] + ux[c];
            b.eval(p * h, q * h, shifted, b_shift);
            b.eval(p * h, q * h, wx, b_base);
            double* out = terms.data() + (static_cast<std::size_t>(p) * n + q) * d;
            for (int c = 0; c < d; ++c) out[c] = (b_shift[c] - b_base[c]) * h2;
        }
    }
    for (int p = 0; p < n; ++p)
        for (int c = 0; c < d; ++c)
            pairwise_prefix(terms.data() + (static_cast<std::size_t>(p) * n) * d + c, n, d);
    for (int q = 0; q < n; ++q)
        for (int c = 0; c < d; ++c)
            pairwise_prefix(terms.data() + static_cast<std::size_t>(q) * d + c, n,
                            static_cast<std::size_t>(n) * d);

    SheetField next(w.grid());
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) {
            const double* cum = terms.data() + (static_cast<std::size_t>(i - 1) * n + (j - 1)) * d;
            for (int c = 0; c < d; ++c) next.value(i, j, c) = cum[c];
        }
    return next;
}

double sup_abs_diff(const SheetField& a, const SheetField& b) {
    double worst = 0.0;
    const auto ra = a.raw();
    const auto rb = b.raw();
    for (std::size_t k = 0; k < ra.size(); ++k) worst = std::max(worst, std::abs(ra[k] - rb[k]));
    return worst;
}

}  // namespace

PicardCollapse picard_collapse(const Drift& b, const SheetField& w, std::uint64_t guess_seed,
                               double amplitude, double tol, int max_iter) {
    const int n = w.n_cells();
    const int d = w.dim();
    if (n < 1) throw std::invalid_argument("picard_collapse: empty field");
    if (b.dim() != d) throw std::invalid_argument("picard_collapse: drift dimension mismatch");
    if (max_iter < 1) throw std::invalid_argument("picard_collapse: max_iter must be positive");

    SheetField u(w.grid());
    CounterStream guess(guess_seed);
    std::uint64_t counter = 0;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            for (int c = 0; c < d; ++c)
                u.value(i, j, c) = amplitude * (2.0 * guess.u01(counter++) - 1.0);

    PicardCollapse result;
    for (int m = 1; m <= max_iter; ++m) {
        SheetField next = difference_quadrature(b, w, u);
        result.last_step = sup_abs_diff(next, u);
        result.iterations = m;
        u = std::move(next);
        if (result.last_step <= tol) {
            result.converged = true;
            break;
        }
    }
    result.fixed_point_gap = sup_norm(u);
    return result;
}

UniquenessReport uniqueness_experiment(const Drift& b, const GridSpec& grid, int level, double beta,
                                       double picard_tol, std::uint64_t seed) {
    grid.validate();
    if (b.dim() != grid.dim) throw std::invalid_argument("uniqueness_experiment: drift dimension mismatch");
    if (level < 1) throw std::invalid_argument("uniqueness_experiment: level must be >= 1");
    const int side = 1 << level;
    if (grid.n_cells % side != 0)
        throw std::invalid_argument("uniqueness_experiment: grid size must be a multiple of 2^level");
    if (!(beta > 0.0)) throw std::invalid_argument("uniqueness_experiment: beta must be positive");

    const int n = grid.n_cells;
    const int d = grid.dim;
    const int m = n / side;

    UniquenessReport rep;
    rep.level = level;
    rep.grid_n = n;
    rep.dim = d;
    rep.beta = beta;
    rep.beta_log2 = std::log2(beta);

    const SheetField w = generate_sheet(grid, seed);

    // (i) Fixed-point collapse of the difference equation along this path.
    const PicardCollapse collapse =
        picard_collapse(b, w, derive_seed(seed, 0x9e3779b9ULL), 1.0, picard_tol, 2 * (n + 1));
    rep.fixed_point_gap = collapse.fixed_point_gap;
    rep.picard_last_step = collapse.last_step;
    rep.picard_iterations = collapse.iterations;
    rep.picard_converged = collapse.converged;

    // (ii) Boundary perturbation: same sheet, boundary lifted by beta.
    const SolutionField base = solve_explicit(b, w, BoundaryTrace::zero(grid));
    const SolutionField lifted = solve_explicit(b, w, BoundaryTrace::constant(grid, beta));

    const std::size_t blocks = static_cast<std::size_t>(side) * side;
    rep.upper_sup.assign(blocks, 0.0);
    rep.lower_sup.assign(blocks, 0.0);

    std::vector<double> ubar(static_cast<std::size_t>(d), 0.0);
    std::vector<double> ulow(static_cast<std::size_t>(d), 0.0);
    std::vector<double> zero(static_cast<std::size_t>(d), 0.0);
    std::vector<double> y(static_cast<std::size_t>(d), 0.0);
    const double denom_scale = std::sqrt(static_cast<double>(d) * level) * std::ldexp(1.0, -level);
    double c2 = 0.0;

    for (int k = 1; k <= side; ++k) {
        for (int kp = 1; kp <= side; ++kp) {
            std::fill(ubar.begin(), ubar.end(), 0.0);
            std::fill(ulow.begin(), ulow.end(), 0.0);
            for (int i = (k - 1) * m + 1; i <= k * m; ++i)
                for (int j = (kp - 1) * m + 1; j <= kp * m; ++j)
                    for (int c = 0; c < d; ++c) {
                        const double diff = lifted.field.value(i, j, c) - base.field.value(i, j, c);
                        ubar[c] = std::max(ubar[c], diff);
                        ulow[c] = std::max(ulow[c], -diff);
                    }
            const std::size_t idx = static_cast<std::size_t>(k - 1) * side + (kp - 1);
            rep.upper_sup[idx] = *std::max_element(ubar.begin(), ubar.end());
            rep.lower_sup[idx] = *std::max_element(ulow.begin(), ulow.end());

            // Fit the averaging smallness constant at the scales the
            // recursion actually invokes on this path.
            const DyadicBlock blk{level, k - 1, kp - 1};
            for (int sign = 0; sign < 2; ++sign) {
                double norm2 = 0.0;
                for (int c = 0; c < d; ++c) {
                    y[c] = sign == 0 ? ubar[c] : -ulow[c];
                    norm2 += y[c] * y[c];
                }
                const double norm = std::sqrt(norm2);
                if (norm == 0.0) continue;
                const std::vector<double> r = rho(w, b, blk, zero, y);
                double rmax = 0.0;
                for (double v : r) rmax = std::max(rmax, std::abs(v));
                c2 = std::max(c2, rmax / (denom_scale * norm));
            }
        }
    }

    rep.c2_hat = c2;
    rep.c1_hat = 2.0 * c2;
    rep.smallness_ok = c2 * denom_scale <= 0.5;

    const GronwallTable table = discrete_bound_table(level, d, rep.c1_hat, rep.beta_log2);
    rep.bound_log2 = table.entries_log2;
    rep.margin_log2.assign(blocks, 0.0);
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= side; ++k)
        for (int kp = 1; kp <= side; ++kp) {
            const std::size_t idx = static_cast<std::size_t>(k - 1) * side + (kp - 1);
            const double observed = std::max({rep.upper_sup[idx], rep.lower_sup[idx], 1e-300});
            rep.margin_log2[idx] = table.at(k, kp) - std::log2(observed);
            rep.min_margin = std::min(rep.min_margin, rep.margin_log2[idx]);
        }

    rep.verdict = rep.picard_converged && rep.smallness_ok && rep.min_margin >= -1e-9;
    return rep;
}

}  // namespace sheetlab
