#include "sheetlab/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sheetlab/parallel.hpp"
#include "sheetlab/rng.hpp"

namespace sheetlab {

namespace {

// Snaps a window coordinate to its grid index, insisting it is node-aligned.
int node_index(double coord, int n, const char* what) {
    const double raw = coord * n;
    const double rounded = std::round(raw);
    if (std::abs(raw - rounded) > 1e-9 * n)
        throw std::invalid_argument(std::string("window: ") + what + " is not node-aligned");
    const int idx = static_cast<int>(rounded);
    if (idx < 0 || idx > n) throw std::invalid_argument(std::string("window: ") + what + " outside [0,1]");
    return idx;
}

struct BlockRange {
    int i0, j0, m;  // node (i0 + a, j0 + b), a,b in [0, m)
};

BlockRange block_range(const SheetField& w, const DyadicBlock& blk) {
    if (blk.level < 0) throw std::invalid_argument("rho: block level must be >= 0");
    const int side = 1 << blk.level;
    if (w.n_cells() % side != 0)
        throw std::invalid_argument("rho: grid resolution is not a multiple of 2^level");
    if (blk.k < 0 || blk.k >= side || blk.kp < 0 || blk.kp >= side)
        throw std::invalid_argument("rho: block index out of range");
    const int m = w.n_cells() / side;
    return {blk.k * m, blk.kp * m, m};
}

double euclid(std::span<const double> v) {
    double sq = 0.0;
    for (double c : v) sq += c * c;
    return std::sqrt(sq);
}

}  // namespace

void WindowSpec::validate() const {
    if (!(eps > 0.0) || !(epsp > 0.0)) throw std::invalid_argument("window: side lengths must be positive");
    if (a < 0.0 || ap < 0.0 || a + eps > 1.0 + 1e-12 || ap + epsp > 1.0 + 1e-12)
        throw std::invalid_argument("window: must lie inside the unit square");
}

std::vector<double> rho(const SheetField& w, const Drift& b, const DyadicBlock& blk,
                        std::span<const double> x, std::span<const double> y) {
    const int d = w.dim();
    if (b.dim() != d || static_cast<int>(x.size()) != d || static_cast<int>(y.size()) != d)
        throw std::invalid_argument("rho: dimension mismatch");
    const BlockRange r = block_range(w, blk);
    const double h2 = w.grid().spacing() * w.grid().spacing();

    // One buffer of per-node differences per component; pairwise totals keep
    // rounding at O(log) ulp and preserve exact sign/antisymmetry structure.
    const std::size_t nodes = static_cast<std::size_t>(r.m) * r.m;
    std::vector<double> terms(nodes * d);
    std::vector<double> shifted(static_cast<std::size_t>(d));
    std::vector<double> bx(static_cast<std::size_t>(d)), by(static_cast<std::size_t>(d));

    std::size_t idx = 0;
    for (int a = 0; a < r.m; ++a) {
        const int i = r.i0 + a;
        const double s = w.grid().coord(i);
        for (int bidx = 0; bidx < r.m; ++bidx) {
            const int j = r.j0 + bidx;
            const double t = w.grid().coord(j);
            const std::span<const double> wv = w.at(i, j);
            for (int c = 0; c < d; ++c) shifted[c] = wv[c] + x[c];
            b.eval(s, t, shifted, bx);
            for (int c = 0; c < d; ++c) shifted[c] = wv[c] + y[c];
            b.eval(s, t, shifted, by);
            for (int c = 0; c < d; ++c) terms[static_cast<std::size_t>(c) * nodes + idx] = bx[c] - by[c];
            ++idx;
        }
    }

    std::vector<double> out(static_cast<std::size_t>(d));
    for (int c = 0; c < d; ++c)
        out[c] = pairwise_sum(terms.data() + static_cast<std::size_t>(c) * nodes, nodes) * h2;
    return out;
}

namespace {

// rho over an arbitrary node-aligned window (left-endpoint rule), used by
// the tail estimator. Same term-wise accumulation as the block version.
std::vector<double> rho_window(const SheetField& w, const Drift& b, int i0, int i1, int j0, int j1,
                               std::span<const double> x, std::span<const double> y) {
    const int d = w.dim();
    const double h2 = w.grid().spacing() * w.grid().spacing();
    const std::size_t nodes = static_cast<std::size_t>(i1 - i0) * (j1 - j0);
    std::vector<double> terms(nodes * d);
    std::vector<double> shifted(static_cast<std::size_t>(d));
    std::vector<double> bx(static_cast<std::size_t>(d)), by(static_cast<std::size_t>(d));
    std::size_t idx = 0;
    for (int i = i0; i < i1; ++i) {
        const double s = w.grid().coord(i);
        for (int j = j0; j < j1; ++j) {
            const double t = w.grid().coord(j);
            const std::span<const double> wv = w.at(i, j);
            for (int c = 0; c < d; ++c) shifted[c] = wv[c] + x[c];
            b.eval(s, t, shifted, bx);
            for (int c = 0; c < d; ++c) shifted[c] = wv[c] + y[c];
            b.eval(s, t, shifted, by);
            for (int c = 0; c < d; ++c) terms[static_cast<std::size_t>(c) * nodes + idx] = bx[c] - by[c];
            ++idx;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(d));
    for (int c = 0; c < d; ++c)
        out[c] = pairwise_sum(terms.data() + static_cast<std::size_t>(c) * nodes, nodes) * h2;
    return out;
}

struct WlsFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
    bool ok = false;
};

// Weighted least squares of y on x; weights ~ inverse variance.
WlsFit weighted_least_squares(const std::vector<double>& x, const std::vector<double>& y,
                              const std::vector<double>& wgt) {
    WlsFit fit;
    const std::size_t n = x.size();
    if (n < 2) return fit;
    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += wgt[i];
        swx += wgt[i] * x[i];
        swy += wgt[i] * y[i];
        swxx += wgt[i] * x[i] * x[i];
        swxy += wgt[i] * x[i] * y[i];
    }
    const double det = sw * swxx - swx * swx;
    if (det <= 0.0) return fit;
    fit.slope = (sw * swxy - swx * swy) / det;
    fit.intercept = (swxx * swy - swx * swxy) / det;
    double ss_res = 0, ss_tot = 0;
    const double ybar = swy / sw;
    for (std::size_t i = 0; i < n; ++i) {
        const double pred = fit.intercept + fit.slope * x[i];
        ss_res += wgt[i] * (y[i] - pred) * (y[i] - pred);
        ss_tot += wgt[i] * (y[i] - ybar) * (y[i] - ybar);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.ok = true;
    return fit;
}

}  // namespace

TailReport tail_estimate(const Drift& b, const WindowSpec& win, std::span<const double> x,
                         std::span<const double> y, long long samples, std::span<const double> eta_grid,
                         const GridSpec& grid, std::uint64_t seed) {
    win.validate();
    grid.validate();
    if (samples < 1) throw std::invalid_argument("tail_estimate: samples must be >= 1");
    if (eta_grid.empty()) throw std::invalid_argument("tail_estimate: eta grid must be nonempty");
    if (b.bound() && *b.bound() > 1.0 + 1e-12)
        throw std::invalid_argument("tail_estimate: drift bound must be <= 1");
    if (!b.bound()) throw std::invalid_argument("tail_estimate: drift must be bounded");
    const int n = grid.n_cells;
    const int i0 = node_index(win.ap, n, "a'"), i1 = node_index(win.ap + win.epsp, n, "a'+eps'");
    const int j0 = node_index(win.a, n, "a"), j1 = node_index(win.a + win.eps, n, "a+eps");
    if (i0 >= i1 || j0 >= j1) throw std::invalid_argument("tail_estimate: empty window");

    double diff_sq = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) diff_sq += (x[c] - y[c]) * (x[c] - y[c]);
    const double dist = std::sqrt(diff_sq);
    if (!(dist > 0.0)) throw std::invalid_argument("tail_estimate: x and y must differ");
    const double unit = std::sqrt(win.eps * win.epsp) * dist;

    // Each sample writes one slot; thresholds are counted afterwards in
    // sample order, so the result is independent of the worker count.
    const std::size_t ne = eta_grid.size();
    std::vector<double> normalized(static_cast<std::size_t>(samples));
    parallel_for(static_cast<std::size_t>(samples), [&](std::size_t k) {
        const SheetField w = generate_sheet(grid, derive_seed(seed, k));
        const std::vector<double> r = rho_window(w, b, i0, i1, j0, j1, x, y);
        normalized[k] = euclid(r) / unit;
    });

    TailReport rep;
    rep.eta.assign(eta_grid.begin(), eta_grid.end());
    rep.tail_prob.resize(ne);
    rep.se.resize(ne);
    rep.retained.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        long long count = 0;
        for (long long k = 0; k < samples; ++k)
            if (normalized[static_cast<std::size_t>(k)] >= eta_grid[e]) ++count;
        const double p = static_cast<double>(count) / static_cast<double>(samples);
        rep.tail_prob[e] = p;
        rep.se[e] = std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
        rep.retained[e] = count >= 10;
    }

    // Fit log p = log c - alpha eta^2 by WLS; weight = inverse delta-method
    // variance of log p-hat, i.e. samples * p / (1 - p).
    std::vector<double> fx, fy, fw;
    for (std::size_t e = 0; e < ne; ++e) {
        if (!rep.retained[e] || rep.tail_prob[e] >= 1.0) continue;
        fx.push_back(rep.eta[e] * rep.eta[e]);
        fy.push_back(std::log(rep.tail_prob[e]));
        fw.push_back(static_cast<double>(samples) * rep.tail_prob[e] / (1.0 - rep.tail_prob[e]));
    }
    const WlsFit fit = weighted_least_squares(fx, fy, fw);
    if (!fit.ok) {
        rep.inconclusive = true;
        rep.verdict = false;
        return rep;
    }
    rep.alpha_hat = -fit.slope;
    rep.c_hat = std::exp(fit.intercept);
    rep.r2 = fit.r2;

    bool below = true;
    for (std::size_t e = 0; e < ne; ++e) {
        const double envelope = rep.c_hat * std::exp(-0.5 * rep.alpha_hat * rep.eta[e] * rep.eta[e]);
        if (rep.tail_prob[e] > envelope) below = false;
    }
    rep.verdict = rep.alpha_hat > 0.0 && below;
    return rep;
}

ScanReport modulus_scan(const SheetField& w, const Drift& b, int level, int m_max) {
    if (m_max < 0 || m_max > 6) throw std::invalid_argument("modulus_scan: m_max out of range [0,6]");
    const int d = w.dim();
    if (b.dim() != d) throw std::invalid_argument("modulus_scan: dimension mismatch");
    if (d > 3) throw std::invalid_argument("modulus_scan: d > 3 is not tractable for a dense scan");
    const int side = 1 << level;
    if (w.n_cells() % side != 0)
        throw std::invalid_argument("modulus_scan: grid resolution is not a multiple of 2^level");

    // Lattice with denominator 2^m_max on [-1,1]^d.
    const int half = 1 << m_max;
    const int per_axis = 2 * half + 1;
    long long npoints = 1;
    for (int c = 0; c < d; ++c) npoints *= per_axis;
    std::vector<std::vector<double>> points(static_cast<std::size_t>(npoints));
    for (long long pidx = 0; pidx < npoints; ++pidx) {
        std::vector<double> pt(static_cast<std::size_t>(d));
        long long rem = pidx;
        for (int c = 0; c < d; ++c) {
            pt[c] = static_cast<double>(rem % per_axis - half) / half;
            rem /= per_axis;
        }
        points[static_cast<std::size_t>(pidx)] = std::move(pt);
    }

    // Per-block, per-point quadrature of b(W + x); pairs are then differences.
    const int m = w.n_cells() / side;
    const double h2 = w.grid().spacing() * w.grid().spacing();
    const std::size_t nodes = static_cast<std::size_t>(m) * m;
    std::vector<double> terms(nodes * d);
    std::vector<double> shifted(static_cast<std::size_t>(d)), bv(static_cast<std::size_t>(d));
    const double sqrt_n = std::sqrt(static_cast<double>(level));
    const double two_neg_n = std::ldexp(1.0, -level);

    ScanReport rep;
    std::vector<double> sums(static_cast<std::size_t>(npoints) * d);
    for (int k = 0; k < side; ++k) {
        for (int kp = 0; kp < side; ++kp) {
            for (long long pidx = 0; pidx < npoints; ++pidx) {
                const auto& pt = points[static_cast<std::size_t>(pidx)];
                std::size_t idx = 0;
                for (int a = 0; a < m; ++a) {
                    const int i = k * m + a;
                    const double s = w.grid().coord(i);
                    for (int bj = 0; bj < m; ++bj) {
                        const int j = kp * m + bj;
                        const std::span<const double> wv = w.at(i, j);
                        for (int cc = 0; cc < d; ++cc) shifted[cc] = wv[cc] + pt[cc];
                        b.eval(s, w.grid().coord(j), shifted, bv);
                        for (int c = 0; c < d; ++c) terms[static_cast<std::size_t>(c) * nodes + idx] = bv[c];
                        ++idx;
                    }
                }
                for (int c = 0; c < d; ++c)
                    sums[static_cast<std::size_t>(pidx) * d + c] =
                        pairwise_sum(terms.data() + static_cast<std::size_t>(c) * nodes, nodes) * h2;
            }
            for (long long pa = 0; pa < npoints; ++pa) {
                for (long long pb = pa + 1; pb < npoints; ++pb) {
                    double diff_sq = 0.0;
                    for (int c = 0; c < d; ++c) {
                        const double dc = points[static_cast<std::size_t>(pa)][c] -
                                          points[static_cast<std::size_t>(pb)][c];
                        diff_sq += dc * dc;
                    }
                    const double dist = std::sqrt(diff_sq);
                    if (!(dist > 0.0)) continue;
                    const double logplus = std::max(0.0, std::log(1.0 / dist));
                    const double denom = two_neg_n * (sqrt_n + std::sqrt(logplus)) * dist;
                    double worst_comp = 0.0;
                    for (int c = 0; c < d; ++c)
                        worst_comp = std::max(worst_comp,
                                              std::abs(sums[static_cast<std::size_t>(pa) * d + c] -
                                                       sums[static_cast<std::size_t>(pb) * d + c]));
                    const double ratio = worst_comp / denom;
                    if (ratio > rep.constant) {
                        rep.constant = ratio;
                        rep.arg_block = {level, k, kp};
                        rep.arg_x = points[static_cast<std::size_t>(pa)];
                        rep.arg_y = points[static_cast<std::size_t>(pb)];
                    }
                }
            }
        }
    }
    return rep;
}

ScanReport zero_anchor_scan(const SheetField& w, const Drift& b, int level,
                            std::span<const std::vector<double>> x_set, AnchorMode mode) {
    const int d = w.dim();
    if (b.dim() != d) throw std::invalid_argument("zero_anchor_scan: dimension mismatch");
    const int side = 1 << level;
    if (w.n_cells() % side != 0)
        throw std::invalid_argument("zero_anchor_scan: grid resolution is not a multiple of 2^level");
    const double pow4n = std::pow(4.0, level);
    if (mode == AnchorMode::plain && pow4n > 1020.0)
        throw std::invalid_argument(
            "zero_anchor_scan: 2^-4^n underflows doubles for level >= 5; use extended_log mode");

    const double sqrt_n = std::sqrt(static_cast<double>(level));
    const double two_neg_n = std::ldexp(1.0, -level);
    const std::vector<double> zero(static_cast<std::size_t>(d), 0.0);

    ScanReport rep;
    for (int k = 0; k < side; ++k) {
        for (int kp = 0; kp < side; ++kp) {
            const DyadicBlock blk{level, k, kp};
            for (const auto& x : x_set) {
                if (static_cast<int>(x.size()) != d)
                    throw std::invalid_argument("zero_anchor_scan: point dimension mismatch");
                const std::vector<double> r = rho(w, b, blk, zero, x);
                double worst_comp = 0.0;
                for (double rc : r) worst_comp = std::max(worst_comp, std::abs(rc));
                const double xnorm = euclid(x);
                double ratio;
                if (mode == AnchorMode::plain) {
                    const double denom = sqrt_n * two_neg_n * (xnorm + std::exp2(-pow4n));
                    ratio = worst_comp / denom;
                } else {
                    // log2-space normalization: log2(|x| + 2^-4^n) via a
                    // stable two-term log-sum-exp in base 2.
                    if (worst_comp == 0.0) {
                        ratio = 0.0;
                    } else {
                        const double lx = xnorm > 0.0 ? std::log2(xnorm)
                                                      : -std::numeric_limits<double>::infinity();
                        const double lbeta = -pow4n;
                        const double hi = std::max(lx, lbeta);
                        const double lo = std::min(lx, lbeta);
                        const double lsum = hi + std::log2(1.0 + std::exp2(lo - hi));
                        const double denom_log2 = std::log2(sqrt_n) - level + lsum;
                        ratio = std::exp2(std::log2(worst_comp) - denom_log2);
                    }
                }
                if (ratio > rep.constant) {
                    rep.constant = ratio;
                    rep.arg_block = blk;
                    rep.arg_x = zero;
                    rep.arg_y = x;
                }
            }
        }
    }
    return rep;
}

ExpMomentReport exp_moment(const Drift& b, const WindowSpec& win, double alpha, long long samples,
                           const GridSpec& grid, std::uint64_t seed) {
    win.validate();
    grid.validate();
    if (samples < 1) throw std::invalid_argument("exp_moment: samples must be >= 1");
    if (alpha < 0.0) throw std::invalid_argument("exp_moment: alpha must be >= 0");
    if (!b.has_gradient()) throw std::invalid_argument("exp_moment: drift has no evaluable gradient");
    const int n = grid.n_cells;
    const int d = grid.dim;
    if (b.dim() != d) throw std::invalid_argument("exp_moment: dimension mismatch");
    const int i0 = node_index(win.ap, n, "a'"), i1 = node_index(win.ap + win.epsp, n, "a'+eps'");
    const int j0 = node_index(win.a, n, "a"), j1 = node_index(win.a + win.eps, n, "a+eps");
    if (i0 >= i1 || j0 >= j1) throw std::invalid_argument("exp_moment: empty window");
    const int ms = i1 - i0, mt = j1 - j0;
    const double weight = 1.0 / (static_cast<double>(ms) * mt);
    const std::size_t dd = static_cast<std::size_t>(d) * d;

    std::vector<double> values(static_cast<std::size_t>(samples));
    parallel_for(static_cast<std::size_t>(samples), [&](std::size_t kk) {
        const SheetField w = generate_sheet(grid, derive_seed(seed, kk));
        std::vector<double> wtilde(static_cast<std::size_t>(d));
        std::vector<double> jac(dd), acc(dd, 0.0);
        for (int i = i0; i < i1; ++i) {
            const double su = static_cast<double>(i - i0) / ms;  // unit-square coords
            for (int j = j0; j < j1; ++j) {
                const double tu = static_cast<double>(j - j0) / mt;
                for (int c = 0; c < d; ++c)
                    wtilde[c] = w.value(i, j, c) - w.value(i0, j, c) - w.value(i, j0, c) +
                                w.value(i0, j0, c);
                b.eval_jacobian(su, tu, wtilde, jac);
                for (std::size_t e = 0; e < dd; ++e) acc[e] += jac[e] * weight;
            }
        }
        double frob_sq = 0.0;
        for (std::size_t e = 0; e < dd; ++e) frob_sq += acc[e] * acc[e];
        values[kk] = std::exp(alpha * win.eps * win.epsp * frob_sq);
    });

    ExpMomentReport rep;
    double sum = 0.0, max_v = 0.0;
    for (double v : values) {
        sum += v;
        max_v = std::max(max_v, v);
    }
    rep.estimate = sum / static_cast<double>(samples);
    double var = 0.0;
    for (double v : values) var += (v - rep.estimate) * (v - rep.estimate);
    var /= std::max<long long>(1, samples - 1);
    rep.se = std::sqrt(var / static_cast<double>(samples));
    rep.max_share = sum > 0.0 ? max_v / sum : 0.0;
    rep.unstable = rep.max_share > 0.5;
    return rep;
}

}  // namespace sheetlab
