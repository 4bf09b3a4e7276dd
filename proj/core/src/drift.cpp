#include "sheetlab/drift.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <stdexcept>

#include "sheetlab/rng.hpp"

namespace sheetlab {

namespace {

// sign with the midpoint convention sign(0) = 0, so the drift is an odd
// function and truncation never moves it.
inline double sgn(double v) noexcept { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

std::vector<double> parse_number_list(std::string_view text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string_view tok =
            text.substr(start, (comma == std::string_view::npos ? text.size() : comma) - start);
        double v = 0.0;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
            throw std::invalid_argument("drift: malformed number '" + std::string(tok) + "'");
        out.push_back(v);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string format_number(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

Drift Drift::zero(int dim) {
    Drift d;
    d.kind_ = Kind::zero;
    d.dim_ = dim;
    d.bound_ = 0.0;
    d.growth_ = 0.0;
    d.monotone_ = true;
    return d;
}

Drift Drift::constant(std::vector<double> c) {
    if (c.empty()) throw std::invalid_argument("constant drift: empty coefficient vector");
    Drift d;
    d.kind_ = Kind::constant;
    d.dim_ = static_cast<int>(c.size());
    double sq = 0.0;
    for (double v : c) sq += v * v;
    d.bound_ = std::sqrt(sq);
    d.growth_ = std::sqrt(sq);
    d.monotone_ = true;
    d.coeffs_ = std::move(c);
    return d;
}

Drift Drift::identity(int dim) {
    Drift d;
    d.kind_ = Kind::identity;
    d.dim_ = dim;
    d.growth_ = 1.0;
    d.monotone_ = true;
    return d;
}

Drift Drift::componentwise_sign(int dim) {
    Drift d;
    d.kind_ = Kind::sign;
    d.dim_ = dim;
    d.bound_ = std::sqrt(static_cast<double>(dim));
    d.growth_ = std::sqrt(static_cast<double>(dim));
    d.monotone_ = true;
    return d;
}

Drift Drift::componentwise_tanh(int dim, double scale) {
    if (scale <= 0.0) throw std::invalid_argument("tanh drift: scale must be positive");
    Drift d;
    d.kind_ = Kind::tanh;
    d.dim_ = dim;
    d.scale_ = scale;
    d.bound_ = std::sqrt(static_cast<double>(dim));
    d.growth_ = std::sqrt(static_cast<double>(dim));
    d.monotone_ = true;
    return d;
}

Drift Drift::linear(int dim, double m) {
    if (m < 0.0) throw std::invalid_argument("linear drift: coefficient must be >= 0");
    Drift d;
    d.kind_ = Kind::linear;
    d.dim_ = dim;
    d.scale_ = m;
    d.growth_ = m;
    d.monotone_ = true;
    return d;
}

Drift Drift::custom(int dim, Fn fn, std::optional<double> bound, std::optional<double> growth,
                    bool monotone, JacFn jac) {
    if (!fn) throw std::invalid_argument("custom drift: evaluation callback required");
    Drift d;
    d.kind_ = Kind::custom;
    d.dim_ = dim;
    d.fn_ = std::move(fn);
    d.jac_ = std::move(jac);
    d.bound_ = bound;
    d.growth_ = growth;
    d.monotone_ = monotone;
    return d;
}

bool Drift::has_gradient() const noexcept {
    switch (kind_) {
        case Kind::zero:
        case Kind::constant:
        case Kind::identity:
        case Kind::tanh:
        case Kind::linear:
            return true;
        case Kind::sign:
            return false;
        case Kind::custom:
            return static_cast<bool>(jac_);
    }
    return false;
}

void Drift::eval(double s, double t, std::span<const double> x, std::span<double> out) const {
    switch (kind_) {
        case Kind::zero:
            for (int c = 0; c < dim_; ++c) out[c] = 0.0;
            break;
        case Kind::constant:
            for (int c = 0; c < dim_; ++c) out[c] = coeffs_[c];
            break;
        case Kind::identity:
            for (int c = 0; c < dim_; ++c) out[c] = x[c];
            break;
        case Kind::sign:
            for (int c = 0; c < dim_; ++c) out[c] = sgn(x[c]);
            break;
        case Kind::tanh:
            for (int c = 0; c < dim_; ++c) out[c] = std::tanh(scale_ * x[c]);
            break;
        case Kind::linear:
            for (int c = 0; c < dim_; ++c) out[c] = scale_ * x[c];
            break;
        case Kind::custom:
            fn_(s, t, x, out);
            break;
    }
    if (clamp_ != std::numeric_limits<double>::infinity())
        for (int c = 0; c < dim_; ++c) out[c] = std::clamp(out[c], -clamp_, clamp_);
}

void Drift::eval_jacobian(double s, double t, std::span<const double> x, std::span<double> out) const {
    if (!has_gradient()) throw std::logic_error("drift has no evaluable gradient");
    const std::size_t dd = static_cast<std::size_t>(dim_) * dim_;
    for (std::size_t k = 0; k < dd; ++k) out[k] = 0.0;
    switch (kind_) {
        case Kind::zero:
        case Kind::constant:
            break;
        case Kind::identity:
            for (int c = 0; c < dim_; ++c) out[static_cast<std::size_t>(c) * dim_ + c] = 1.0;
            break;
        case Kind::linear:
            for (int c = 0; c < dim_; ++c) out[static_cast<std::size_t>(c) * dim_ + c] = scale_;
            break;
        case Kind::tanh:
            for (int c = 0; c < dim_; ++c) {
                const double th = std::tanh(scale_ * x[c]);
                out[static_cast<std::size_t>(c) * dim_ + c] = scale_ * (1.0 - th * th);
            }
            break;
        case Kind::sign:
            break;  // unreachable: has_gradient() is false
        case Kind::custom:
            jac_(s, t, x, out);
            break;
    }
    if (clamp_ != std::numeric_limits<double>::infinity()) {
        // Chain rule through the clamp: rows where the clamp is active vanish.
        std::vector<double> b(static_cast<std::size_t>(dim_));
        eval(s, t, x, b);
        for (int r = 0; r < dim_; ++r)
            if (std::abs(b[r]) >= clamp_)
                for (int c = 0; c < dim_; ++c) out[static_cast<std::size_t>(r) * dim_ + c] = 0.0;
    }
}

Drift Drift::truncated(double level) const {
    if (!(level > 0.0)) throw std::invalid_argument("truncated: level must be positive");
    Drift d = *this;
    d.clamp_ = std::min(clamp_, level);
    const double per_comp_bound = d.clamp_;
    const double euclid = per_comp_bound * std::sqrt(static_cast<double>(dim_));
    d.bound_ = bound_ ? std::min(*bound_, euclid) : euclid;
    // |g_n(b)| <= |b|, so a declared growth constant survives truncation.
    return d;
}

std::string Drift::spec_string() const {
    std::string base;
    switch (kind_) {
        case Kind::zero: base = "zero"; break;
        case Kind::constant: {
            base = "const:";
            for (std::size_t c = 0; c < coeffs_.size(); ++c) {
                if (c) base += ',';
                base += format_number(coeffs_[c]);
            }
            break;
        }
        case Kind::identity: base = "identity"; break;
        case Kind::sign: base = "sign"; break;
        case Kind::tanh: base = "tanh:" + format_number(scale_); break;
        case Kind::linear: base = "linear:" + format_number(scale_); break;
        case Kind::custom: base = "custom"; break;
    }
    if (clamp_ != std::numeric_limits<double>::infinity())
        base += "|clamp:" + format_number(clamp_);
    return base;
}

Drift Drift::parse(const std::string& text, int dim) {
    if (dim < 1) throw std::invalid_argument("drift parse: dim must be >= 1");
    std::string body = text;
    std::optional<double> clamp;
    if (const auto bar = body.find('|'); bar != std::string::npos) {
        const std::string suffix = body.substr(bar + 1);
        body = body.substr(0, bar);
        if (suffix.rfind("clamp:", 0) != 0)
            throw std::invalid_argument("drift parse: unknown modifier '" + suffix + "'");
        clamp = parse_number_list(suffix.substr(6)).at(0);
    }

    std::string name = body;
    std::string args;
    if (const auto colon = body.find(':'); colon != std::string::npos) {
        name = body.substr(0, colon);
        args = body.substr(colon + 1);
    }

    Drift d;
    if (name == "zero") {
        d = Drift::zero(dim);
    } else if (name == "const") {
        auto c = parse_number_list(args);
        if (c.size() == 1 && dim > 1) c.assign(static_cast<std::size_t>(dim), c[0]);
        if (static_cast<int>(c.size()) != dim)
            throw std::invalid_argument("drift parse: const component count != dim");
        d = Drift::constant(std::move(c));
    } else if (name == "identity") {
        d = Drift::identity(dim);
    } else if (name == "sign") {
        d = Drift::componentwise_sign(dim);
    } else if (name == "tanh") {
        d = Drift::componentwise_tanh(dim, args.empty() ? 1.0 : parse_number_list(args).at(0));
    } else if (name == "linear") {
        d = Drift::linear(dim, args.empty() ? 1.0 : parse_number_list(args).at(0));
    } else {
        throw std::invalid_argument("drift parse: unknown kind '" + name + "'");
    }
    if (clamp) d = d.truncated(*clamp);
    return d;
}

HypothesisReport check_monotone(const Drift& b, long long trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("check_monotone: trials must be >= 1");
    const int d = b.dim();
    CounterStream stream(seed);
    HypothesisReport rep;
    rep.tested = trials;
    rep.worst_margin = -std::numeric_limits<double>::infinity();
    std::vector<double> x(static_cast<std::size_t>(d)), y(static_cast<std::size_t>(d));
    std::vector<double> bx(static_cast<std::size_t>(d)), by(static_cast<std::size_t>(d));
    std::uint64_t k = 0;
    for (long long trial = 0; trial < trials; ++trial) {
        const double s = stream.u01(k++);
        const double t = stream.u01(k++);
        for (int c = 0; c < d; ++c) {
            x[c] = 20.0 * stream.u01(k++) - 10.0;
            y[c] = x[c] + 10.0 * stream.u01(k++);  // componentwise x <= y
        }
        b.eval(s, t, x, bx);
        b.eval(s, t, y, by);
        for (int c = 0; c < d; ++c) {
            const double margin = bx[c] - by[c];
            rep.worst_margin = std::max(rep.worst_margin, margin);
            if (margin > 0.0) ++rep.violations;
        }
    }
    rep.verdict = rep.violations == 0;
    return rep;
}

HypothesisReport check_growth(const Drift& b, double m, long long trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("check_growth: trials must be >= 1");
    if (m < 0.0) throw std::invalid_argument("check_growth: m must be >= 0");
    const int d = b.dim();
    constexpr double kRadius = 1e3;
    // Separate streams for uniform and Gaussian draws: gaussian() consumes
    // two raw words per counter, so sharing one counter would alias words.
    CounterStream unif(derive_seed(seed, 0));
    CounterStream gauss(derive_seed(seed, 1));
    HypothesisReport rep;
    rep.tested = trials;
    rep.worst_margin = -std::numeric_limits<double>::infinity();
    std::vector<double> x(static_cast<std::size_t>(d)), bx(static_cast<std::size_t>(d));
    std::uint64_t ku = 0, kg = 0;
    for (long long trial = 0; trial < trials; ++trial) {
        const double s = unif.u01(ku++);
        const double t = unif.u01(ku++);
        // Gaussian direction, radius uniform in volume: covers the ball.
        double sq = 0.0;
        for (int c = 0; c < d; ++c) {
            x[c] = gauss.gaussian(kg++);
            sq += x[c] * x[c];
        }
        const double norm = std::sqrt(sq);
        const double r = kRadius * std::pow(unif.u01(ku++), 1.0 / d);
        for (int c = 0; c < d; ++c) x[c] = norm > 0.0 ? x[c] / norm * r : 0.0;
        b.eval(s, t, x, bx);
        double bsq = 0.0;
        for (int c = 0; c < d; ++c) bsq += bx[c] * bx[c];
        const double ratio = std::sqrt(bsq) / (1.0 + r);
        rep.worst_margin = std::max(rep.worst_margin, ratio - m);
        if (ratio > m) ++rep.violations;
    }
    rep.verdict = rep.violations == 0;
    return rep;
}

}  // namespace sheetlab
