#pragma once

#include <functional>
#include <span>
#include <vector>

#include "sheetlab/field.hpp"

namespace sheetlab {

// Occupation-density estimate on a grid of levels x: counts of nodes whose
// field value lies within +-bandwidth of x, scaled to integrate to the
// occupied time. Scalar fields only.
struct OccupationEstimate {
    std::vector<double> x_grid;
    std::vector<double> density;
    double bandwidth = 0.0;
    double s_horizon = 0.0, t_horizon = 0.0;
    int row_index = -1;  // -1 for plane estimates
};

// Density of time spent by the row s = s_i in [x - bw, x + bw] up to t:
//   (1/(2 bw)) (1/N) #{ j : t_j < t, |W[i][j] - x| <= bw }.
// Integrates over x to ~t; for the zero field all mass sits at x = 0.
OccupationEstimate row_local_time(const SheetField& w, int i, double t,
                                  std::span<const double> x_grid, double bandwidth);

// Single-level version of the above.
double row_local_time_at(const SheetField& w, int i, double t, double x, double bandwidth);

// Plane local time: (1/N) sum over rows with s_i < s of the row estimate.
// Internally integer counts are pooled and scaled once.
OccupationEstimate plane_local_time(const SheetField& w, double s, double t,
                                    std::span<const double> x_grid, double bandwidth);

// Residual of the row-wise reflection identity
//   sum_j 1{W[i][j] <= x} (W[i][j+1] - W[i][j])
//     = (s_i / 2) Lhat(x) - (W[i, t] - x)^- + x^+,
// where Lhat is the row occupation-density estimate at level x over [0, t)
// (same estimator as row_local_time_at, same horizon).
double tanaka_residual(const SheetField& w, int i, double t, double x, double bandwidth);

// Scalar test function and its partial in one space coordinate.
using SpaceTimeFn = std::function<double(double s, double t, std::span<const double> x)>;

struct LtsResult {
    double lhs = 0.0;       // Quad of df over the retained region
    double rhs = 0.0;       // three-term right side
    double residual = 0.0;  // lhs - rhs
};

// Discrete local-time-space identity along coordinate `coord`:
//   int int d_{x_i} f(xi, u, W) du dxi
//     = - int int f(xi, u, W) d_u W^(i) / xi
//       - int int f(xi, 1-u, What) d_u B^(i) / xi
//       + int int f(xi, 1-u, What) What^(i) / (xi (1-u)) du dxi,
// where What is the t-reversal of W and d_u B := d_u What + What/(1-u) du is
// the martingale part of the reversed row. Rows with xi < xi0 and original
// times outside [u0, 1 - u0] are excluded from every term alike (the 1/xi
// and 1/(1-u) factors blow up variance at the edges).
LtsResult lts_formula_residual(const SheetField& w, const SpaceTimeFn& f, const SpaceTimeFn& df,
                               int coord, double s, double t, double xi0, double u0);

}  // namespace sheetlab
