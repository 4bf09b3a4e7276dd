#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sheetlab/drift.hpp"
#include "sheetlab/field.hpp"

namespace sheetlab {

// Exponential change-of-measure density along increasing time horizons:
//   log Z_t = sum_{cells with t_q < t} b(s_p, t_q, X[p][q]) . dX(cell)
//           - (1/2) sum_{same cells} |b(s_p, t_q, X[p][q])|^2 / N^2,
// where dX(cell) is the rectangle increment of the path over the cell and b
// is evaluated at the lower-left node (Ito convention). Carried in log space;
// each time cell contributes one fixed delta, so values at shared horizons do
// not depend on which horizons were requested.
struct DensityTrace {
    std::vector<double> t_grid;    // requested horizons with 0 prepended
    std::vector<double> log_z;     // log_z[0] = 0
    std::vector<double> z_values;  // exp(log_z); positive, z_values[0] = 1
};

DensityTrace density_trace(const SheetField& path, const Drift& b, std::span<const double> t_grid);

// Monte Carlo audit of the normalization E[Z_t] = 1 when the path is a raw
// driving sheet (no drift in the dynamics, only in the density).
struct MartingaleReport {
    std::vector<double> t_grid;
    std::vector<double> ez;         // sample mean of Z_t per horizon
    std::vector<double> se;         // standard error per horizon
    std::vector<double> max_share;  // largest single-sample share of sum Z
    long long samples = 0;
    bool unstable = false;  // some share exceeds 1/2: estimate is heavy-tailed
    bool verdict = false;   // every |ez - 1| <= 4 se, all finite
};

MartingaleReport martingale_check(const Drift& b, long long samples, std::span<const double> t_grid,
                                  const GridSpec& grid, std::uint64_t seed);

// Node-wise inverse of solve_explicit under the shared quadrature:
//   W(s,t) = X(s,t) - X(s,0) - X(0,t) + X(0,0) - Quad(b, X)(s,t).
// Feeding it the output of solve_explicit recovers the driving sheet to
// within 2 ulp per node (bit-exactly for the zero drift).
SheetField weak_solution_shift(const SheetField& path, const Drift& b);

}  // namespace sheetlab
