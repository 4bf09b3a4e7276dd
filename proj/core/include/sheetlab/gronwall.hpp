#pragma once

#include <vector>

#include "sheetlab/field.hpp"

namespace sheetlab {

// Modified Bessel function I0 via its power series; terms are added until
// they fall below 1e-16 relative to the partial sum. Guarded for z <= 700
// (beyond that the value overflows double range anyway).
double bessel_i0(double z);

// Resolvent kernel h(xi, zeta, s, t) = I0(2 sqrt(M (s - xi) (t - zeta))) of
// the plane Volterra equation h = 1 + M int int h over [xi,s] x [zeta,t].
double resolvent_h(double m, double xi, double zeta, double s, double t);

// Max over an N x N grid of |h - 1 - M * Quad(h)| at (s,t) = (1,1) with the
// midpoint rectangle rule; decays at rate O(1/N^2).
double verify_resolvent(double m, int n);

// Majorant G(s,t) = F(s,t) + M * Quad(F(xi,zeta) h(xi,zeta,s,t), [0,s]x[0,t])
// with the left-endpoint rule (the kernel decreases in xi and zeta, so the
// rule over-estimates and G stays a true upper bound for grid solutions of
// u = F + M Quad(u)).
SheetField continuous_bound(const SheetField& f, double m);

// Log2-space table of the perturbation bound over dyadic block indices
// (k, k') in 1..2^n:
//   entry(k,k') = (k+k'-1) log2(3 sqrt(d)) + (k+k') log2(1 + c1 sqrt(dn) 2^-n) + beta_log2.
// Kept in logs: the natural beta levels underflow double range from n = 4.
struct GronwallTable {
    int level = 0;  // n
    int dim = 1;
    double c1 = 0.0;
    double beta_log2 = 0.0;
    std::vector<double> entries_log2;  // row-major, (k-1) * 2^n + (k'-1)

    int side() const noexcept { return 1 << level; }
    double at(int k, int kp) const { return entries_log2[static_cast<std::size_t>(k - 1) * side() + (kp - 1)]; }
};

GronwallTable discrete_bound_table(int level, int dim, double c1, double beta_log2);

// Leading log2-magnitude L(n) = 2^(n+1) log2(4 sqrt(d)) - floor(4^(2n/3)) of
// the uniqueness bound; the floor rounds the negative beta exponent outward
// so the bound stays valid. L(n) -> -infinity makes the perturbation vanish.
struct VanishingReport {
    int n_min = 1, n_max = 0;
    int dim = 1;
    double c1 = 0.0;
    std::vector<double> l_values;          // L(n) for n = n_min..n_max
    std::vector<bool> smallness_ok;        // c1 sqrt(dn) 2^-n <= 1/3, per n
    int decreasing_from = -1;              // smallest n0 with L strictly decreasing beyond
    bool crosses_minus_1000 = false;
    bool verdict = false;
};

VanishingReport vanishing_check(int n_max, int dim, double c1, int n_min = 1);

}  // namespace sheetlab
