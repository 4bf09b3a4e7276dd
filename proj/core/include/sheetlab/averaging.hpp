#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sheetlab/drift.hpp"
#include "sheetlab/field.hpp"

namespace sheetlab {

// Dyadic block I_{n,k} x I_{n,k'} with I_{n,k} = ((k) 2^-n, (k+1) 2^-n];
// k, kp are 0-based in 0..2^n - 1. Quadrature inside a block uses the
// left-endpoint rule over its (N/2^n)^2 cells, matching the solver.
struct DyadicBlock {
    int level = 0;  // n
    int k = 0;
    int kp = 0;
};

// Averaging difference over one block:
//   rho(x, y) = Quad_block { b(s, t, W + x) - b(s, t, W + y) }  (a d-vector).
// Terms are differenced pointwise and summed pairwise per component, which
// keeps antisymmetry and the monotone sign property exact in floating point.
std::vector<double> rho(const SheetField& w, const Drift& b, const DyadicBlock& blk,
                        std::span<const double> x, std::span<const double> y);

// Axis-aligned window [a', a'+eps'] x [a, a+eps] inside the unit square
// (first factor is the s-axis). Corners must sit on grid nodes.
struct WindowSpec {
    double a = 0.0, ap = 0.0;      // lower corners on the t- and s-axis
    double eps = 1.0, epsp = 1.0;  // side lengths on the t- and s-axis
    void validate() const;
};

// Empirical tail of |rho| over a window against the sub-Gaussian template
//   P(|rho| >= eta sqrt(eps eps') |x - y|) <= c exp(-alpha eta^2).
struct TailReport {
    std::vector<double> eta;
    std::vector<double> tail_prob;   // nonincreasing in eta by construction
    std::vector<double> se;          // binomial standard errors
    std::vector<bool> retained;      // p >= 10/samples, used in the fit
    double alpha_hat = 0.0;
    double c_hat = 0.0;
    double r2 = 0.0;                 // weighted, on (eta^2, log p)
    bool inconclusive = false;       // fewer than 2 retained points
    bool verdict = false;            // alpha_hat > 0 and all points below c_hat e^{-alpha eta^2 / 2}
};

TailReport tail_estimate(const Drift& b, const WindowSpec& win, std::span<const double> x,
                         std::span<const double> y, long long samples, std::span<const double> eta_grid,
                         const GridSpec& grid, std::uint64_t seed);

// Scan of |rho(x,y)| over all dyadic blocks at one level and all pairs of
// lattice points with denominator 2^m_max in [-1,1]^d, normalized by
//   2^-n (sqrt(n) + sqrt(log+ 1/|x-y|)) |x - y|   (log+ = max(0, ln)).
// Returns the per-path modulus constant (componentwise sup).
struct ScanReport {
    double constant = 0.0;
    DyadicBlock arg_block;
    std::vector<double> arg_x, arg_y;
};

ScanReport modulus_scan(const SheetField& w, const Drift& b, int level, int m_max);

// Same scan anchored at x = 0 over a supplied point set, normalized by
// sqrt(n) 2^-n (|x| + 2^-4^n). The additive term underflows doubles for
// n >= 5; extended_log evaluates the normalization in log2 space instead.
enum class AnchorMode { plain, extended_log };

ScanReport zero_anchor_scan(const SheetField& w, const Drift& b, int level,
                            std::span<const std::vector<double>> x_set,
                            AnchorMode mode = AnchorMode::plain);

// Monte Carlo estimate of
//   E[ exp(alpha eps eps' | Quad_{[0,1]^2} Jac_x b(s, t, Wtilde_{s,t}) |_F^2) ]
// where Wtilde is the rectangle-increment field of the window rescaled to
// the unit square. Requires an evaluable drift Jacobian.
struct ExpMomentReport {
    double estimate = 0.0;
    double se = 0.0;
    double max_share = 0.0;  // largest single-sample contribution
    bool unstable = false;   // max_share > 0.5
};

ExpMomentReport exp_moment(const Drift& b, const WindowSpec& win, double alpha, long long samples,
                           const GridSpec& grid, std::uint64_t seed);

}  // namespace sheetlab
