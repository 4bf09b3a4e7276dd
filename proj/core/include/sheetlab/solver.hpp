#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "sheetlab/drift.hpp"
#include "sheetlab/field.hpp"

namespace sheetlab {

enum class Scheme { explicit_march, picard, truncated };

// Solution of the two-parameter integral equation
//   X(s,t) = X(s,0) + X(0,t) - X(0,0) + int_0^s int_0^t b(xi,zeta,X) + W(s,t)
// on the grid, with the left-endpoint rectangle rule for the drift integral.
struct SolutionField {
    SheetField field;
    Scheme scheme = Scheme::explicit_march;
    double residual = 0.0;  // final Picard defect; 0 for direct marching
    int iterations = 0;
    std::optional<long long> truncation_n;  // clamp level used by solve_truncated
};

// Thrown when Picard iteration fails to reach tolerance.
struct PicardError : std::runtime_error {
    PicardError(double res, int iters)
        : std::runtime_error("picard: defect " + std::to_string(res) + " above tolerance after " +
                             std::to_string(iters) + " iterations"),
          residual(res),
          iterations(iters) {}
    double residual;
    int iterations;
};

// Thrown when the a-posteriori check of solve_truncated finds the clamp active.
struct TruncationError : std::runtime_error {
    TruncationError(double worst, long long level)
        : std::runtime_error("truncated solve: |b(X)| reaches " + std::to_string(worst) +
                             " with clamp level " + std::to_string(level)),
          worst_norm(worst),
          level(level) {}
    double worst_norm;
    long long level;
};

// Left-endpoint rectangle quadrature S[i][j] = sum_{p<i,q<j} b(s_p,t_q,X[p][q]) / N^2
// evaluated along a given field. solve_explicit uses the identical
// accumulation, which makes weak_solution_shift an exact algebraic inverse.
SheetField drift_quadrature(const Drift& b, const SheetField& x);

// Direct marching: each node depends only on strictly smaller indices, so a
// single lexicographic sweep solves the discrete equation exactly.
SolutionField solve_explicit(const Drift& b, const SheetField& w, const BoundaryTrace& boundary);

// Picard iteration from X^0 = closure + W (or a caller-supplied guess);
// stops when the sup-node defect drops to tol.
SolutionField solve_picard(const Drift& b, const SheetField& w, const BoundaryTrace& boundary,
                           double tol, int max_iter, const SheetField* initial = nullptr);

// Clamps the drift at the level dictated by the a-priori bound, solves, and
// verifies a posteriori that the clamp never engaged along the solution.
SolutionField solve_truncated(const Drift& b, const SheetField& w, const BoundaryTrace& boundary);

// Pathwise a-priori bound (1 + M I0(2 sqrt(M))) * (M + sup|W|) on sup|X|
// for drifts of linear growth M.
double apriori_bound(double m, double sheet_sup);

// Clamp level required so that the clamped equation coincides with the
// original along its own solution: ceil((1 + M I0(2 sqrt(M)))^2 M (1 + sup|W|)).
long long truncation_level(double m, double sheet_sup);

}  // namespace sheetlab
