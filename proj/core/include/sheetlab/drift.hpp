#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sheetlab {

// Drift coefficient b(s, t, x) mapping [0,1]^2 x R^d -> R^d, plus the
// structural facts the experiments rely on: a sup-norm bound, a linear
// growth constant, componentwise monotonicity, and (when available) the
// Jacobian in x. Hypotheses are declared, then audited by check_monotone /
// check_growth rather than trusted.
class Drift {
  public:
    enum class Kind { zero, constant, identity, sign, tanh, linear, custom };

    using Fn = std::function<void(double s, double t, std::span<const double> x, std::span<double> out)>;
    // Jacobian callback fills d*d entries row-major: out[i*d+j] = d b_i / d x_j.
    using JacFn = std::function<void(double s, double t, std::span<const double> x, std::span<double> out)>;

    Drift() = default;

    static Drift zero(int dim);
    static Drift constant(std::vector<double> c);
    static Drift identity(int dim);
    static Drift componentwise_sign(int dim);
    static Drift componentwise_tanh(int dim, double scale);
    static Drift linear(int dim, double m);
    static Drift custom(int dim, Fn fn, std::optional<double> bound, std::optional<double> growth,
                        bool monotone, JacFn jac = nullptr);

    int dim() const noexcept { return dim_; }
    Kind kind() const noexcept { return kind_; }
    std::optional<double> bound() const noexcept { return bound_; }
    std::optional<double> growth() const noexcept { return growth_; }
    bool monotone() const noexcept { return monotone_; }
    bool has_gradient() const noexcept;
    double clamp_level() const noexcept { return clamp_; }

    void eval(double s, double t, std::span<const double> x, std::span<double> out) const;
    void eval_jacobian(double s, double t, std::span<const double> x, std::span<double> out) const;

    // Componentwise clamp to [-level, level]: replaces b by g_level(b).
    // Idempotent for repeated application with level' >= level.
    Drift truncated(double level) const;

    // Round-trippable textual form, e.g. "tanh:1", "const:0.5,0.5", "sign".
    std::string spec_string() const;
    static Drift parse(const std::string& text, int dim);

  private:
    Kind kind_ = Kind::zero;
    int dim_ = 1;
    double scale_ = 1.0;               // tanh slope or linear coefficient
    std::vector<double> coeffs_;       // constant vector
    Fn fn_;                            // custom evaluation
    JacFn jac_;                        // custom Jacobian
    std::optional<double> bound_;      // sup_x |b(s,t,x)| (Euclidean)
    std::optional<double> growth_;     // M with |b| <= M (1 + |x|)
    bool monotone_ = false;
    double clamp_ = std::numeric_limits<double>::infinity();
};

// Result of a randomized hypothesis audit.
struct HypothesisReport {
    long long tested = 0;
    long long violations = 0;
    double worst_margin = 0.0;  // > 0 means the hypothesis failed somewhere
    bool verdict = false;       // violations == 0
};

// Samples pairs x <= y (componentwise) and checks b_i(x) <= b_i(y) with zero
// tolerance; worst_margin is max over trials of b_i(x) - b_i(y).
HypothesisReport check_monotone(const Drift& b, long long trials, std::uint64_t seed);

// Samples x in the centred ball of radius 10^3 and checks |b| <= m (1 + |x|);
// worst_margin is max over trials of |b| / (1 + |x|) - m.
HypothesisReport check_growth(const Drift& b, double m, long long trials, std::uint64_t seed);

}  // namespace sheetlab
