#include "sheetlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sheetlab/gronwall.hpp"

namespace sheetlab {

namespace {

// One row step of the running quadrature. s_cur/s_prev hold S rows of length
// (N+1)*d; bh2_prev holds b(s_{i-1}, t_q, X[i-1][q]) * h^2 for q = 0..N-1.
// Kept in one place so the solver and drift_quadrature produce bitwise
// identical sums (plain additions only; no fused contractions to vary).
inline void advance_quad_row(const double* s_prev, const double* bh2_prev, double* s_cur, int n,
                             int d) {
    for (int c = 0; c < d; ++c) s_cur[c] = 0.0;  // j = 0 column
    for (int j = 1; j <= n; ++j) {
        const std::size_t cur = static_cast<std::size_t>(j) * d;
        const std::size_t left = cur - d;
        for (int c = 0; c < d; ++c)
            s_cur[cur + c] = s_prev[cur + c] + s_cur[left + c] - s_prev[left + c] + bh2_prev[left + c];
    }
}

inline void eval_bh2_row(const Drift& b, const SheetField& x, int i, double h2,
                         std::vector<double>& bh2) {
    const int n = x.n_cells();
    const int d = x.dim();
    const double s = x.grid().coord(i);
    for (int q = 0; q < n; ++q) {
        b.eval(s, x.grid().coord(q), x.at(i, q), {bh2.data() + static_cast<std::size_t>(q) * d,
                                                  static_cast<std::size_t>(d)});
        for (int c = 0; c < d; ++c) bh2[static_cast<std::size_t>(q) * d + c] *= h2;
    }
}

}  // namespace

SheetField drift_quadrature(const Drift& b, const SheetField& x) {
    if (b.dim() != x.dim()) throw std::invalid_argument("drift_quadrature: dimension mismatch");
    const int n = x.n_cells();
    const int d = x.dim();
    const double h2 = x.grid().spacing() * x.grid().spacing();
    SheetField s(x.grid());

    std::vector<double> s_prev(static_cast<std::size_t>(n + 1) * d, 0.0);
    std::vector<double> s_cur(static_cast<std::size_t>(n + 1) * d, 0.0);
    std::vector<double> bh2(static_cast<std::size_t>(n) * d, 0.0);

    // Row 0 of S is zero (already the case in the fresh field).
    for (int i = 1; i <= n; ++i) {
        eval_bh2_row(b, x, i - 1, h2, bh2);
        advance_quad_row(s_prev.data(), bh2.data(), s_cur.data(), n, d);
        for (int j = 0; j <= n; ++j)
            for (int c = 0; c < d; ++c) s.value(i, j, c) = s_cur[static_cast<std::size_t>(j) * d + c];
        std::swap(s_prev, s_cur);
    }
    return s;
}

SolutionField solve_explicit(const Drift& b, const SheetField& w, const BoundaryTrace& boundary) {
    if (b.dim() != w.dim()) throw std::invalid_argument("solve_explicit: dimension mismatch");
    boundary.validate(w.grid());
    const int n = w.n_cells();
    const int d = w.dim();
    const double h2 = w.grid().spacing() * w.grid().spacing();

    SolutionField sol;
    sol.scheme = Scheme::explicit_march;
    sol.field = SheetField(w.grid());
    SheetField& x = sol.field;

    std::vector<double> s_prev(static_cast<std::size_t>(n + 1) * d, 0.0);
    std::vector<double> s_cur(static_cast<std::size_t>(n + 1) * d, 0.0);
    std::vector<double> bh2(static_cast<std::size_t>(n) * d, 0.0);

    // Row 0: S vanishes, X = closure + W.
    for (int j = 0; j <= n; ++j)
        for (int c = 0; c < d; ++c) {
            const double closure =
                boundary.bottom_at(0, c) + boundary.left_at(j, c) - boundary.left_at(0, c);
            x.value(0, j, c) = closure + w.value(0, j, c);
        }

    for (int i = 1; i <= n; ++i) {
        eval_bh2_row(b, x, i - 1, h2, bh2);
        advance_quad_row(s_prev.data(), bh2.data(), s_cur.data(), n, d);
        for (int j = 0; j <= n; ++j)
            for (int c = 0; c < d; ++c) {
                const double closure =
                    boundary.bottom_at(i, c) + boundary.left_at(j, c) - boundary.left_at(0, c);
                x.value(i, j, c) = closure + w.value(i, j, c) + s_cur[static_cast<std::size_t>(j) * d + c];
            }
        std::swap(s_prev, s_cur);
    }
    return sol;
}

SolutionField solve_picard(const Drift& b, const SheetField& w, const BoundaryTrace& boundary,
                           double tol, int max_iter, const SheetField* initial) {
    if (b.dim() != w.dim()) throw std::invalid_argument("solve_picard: dimension mismatch");
    if (!(tol >= 0.0)) throw std::invalid_argument("solve_picard: tol must be >= 0");
    if (max_iter < 1) throw std::invalid_argument("solve_picard: max_iter must be >= 1");
    boundary.validate(w.grid());
    const int n = w.n_cells();
    const int d = w.dim();

    // Base field closure + W; also the default initial iterate.
    SheetField base(w.grid());
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
            for (int c = 0; c < d; ++c) {
                const double closure =
                    boundary.bottom_at(i, c) + boundary.left_at(j, c) - boundary.left_at(0, c);
                base.value(i, j, c) = closure + w.value(i, j, c);
            }

    if (initial && initial->grid() != w.grid())
        throw std::invalid_argument("solve_picard: initial guess grid mismatch");
    SolutionField sol;
    sol.scheme = Scheme::picard;
    SheetField x = initial ? *initial : base;

    double defect = std::numeric_limits<double>::infinity();
    int iter = 0;
    while (iter < max_iter) {
        ++iter;
        const SheetField s = drift_quadrature(b, x);
        defect = 0.0;
        SheetField next(w.grid());
        for (std::size_t k = 0; k < next.raw().size(); ++k) {
            const double v = base.raw()[k] + s.raw()[k];
            defect = std::max(defect, std::abs(v - x.raw()[k]));
            next.raw()[k] = v;
        }
        x = std::move(next);
        if (defect <= tol) break;
    }
    if (defect > tol) throw PicardError(defect, iter);
    sol.field = std::move(x);
    sol.residual = defect;
    sol.iterations = iter;
    return sol;
}

double apriori_bound(double m, double sheet_sup) {
    if (m < 0.0 || sheet_sup < 0.0) throw std::invalid_argument("apriori_bound: negative argument");
    const double c1 = 1.0 + m * bessel_i0(2.0 * std::sqrt(m));
    return c1 * (m + sheet_sup);
}

long long truncation_level(double m, double sheet_sup) {
    const double c1 = 1.0 + m * bessel_i0(2.0 * std::sqrt(m));
    return static_cast<long long>(std::ceil(c1 * c1 * m * (1.0 + sheet_sup)));
}

SolutionField solve_truncated(const Drift& b, const SheetField& w, const BoundaryTrace& boundary) {
    if (!b.growth()) throw std::invalid_argument("solve_truncated: drift needs a growth constant");
    const double m = *b.growth();
    const long long level = truncation_level(m, sup_norm(w));
    SolutionField sol = solve_explicit(b.truncated(static_cast<double>(level)), w, boundary);
    sol.scheme = Scheme::truncated;
    sol.truncation_n = level;

    // A posteriori: along the computed solution the clamp must never engage,
    // otherwise the clamped equation is not the original one.
    const int n = w.n_cells();
    const int d = w.dim();
    std::vector<double> bx(static_cast<std::size_t>(d));
    double worst = 0.0;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            b.eval(w.grid().coord(i), w.grid().coord(j), sol.field.at(i, j), bx);
            double sq = 0.0;
            for (int c = 0; c < d; ++c) sq += bx[c] * bx[c];
            worst = std::max(worst, std::sqrt(sq));
        }
    if (worst > static_cast<double>(level)) throw TruncationError(worst, level);
    return sol;
}

}  // namespace sheetlab
