#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sheetlab/averaging.hpp"
#include "sheetlab/drift.hpp"
#include "sheetlab/field.hpp"
#include "sheetlab/girsanov.hpp"
#include "sheetlab/gronwall.hpp"
#include "sheetlab/localtime.hpp"
#include "sheetlab/parallel.hpp"
#include "sheetlab/rng.hpp"
#include "sheetlab/solver.hpp"
#include "sheetlab/uniqueness.hpp"

namespace sheetlab::cli {

namespace {

using nlohmann::ordered_json;

std::string iso_now() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void emit(const std::string& path, const ordered_json& doc) {
    if (path.empty()) {
        std::cout << doc.dump(2) << "\n";
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open output file: " + path);
    out << doc.dump(2) << "\n";
}

std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 1) throw std::invalid_argument("grid needs at least one point");
    std::vector<double> v(static_cast<std::size_t>(count));
    if (count == 1) {
        v[0] = lo;
        return v;
    }
    for (int k = 0; k < count; ++k) v[k] = lo + (hi - lo) * k / (count - 1);
    return v;
}

// Broadcasts a single value to dim components; checks the size otherwise.
std::vector<double> as_point(std::vector<double> v, int dim, const char* name) {
    if (v.size() == 1 && dim > 1) v.assign(static_cast<std::size_t>(dim), v[0]);
    if (static_cast<int>(v.size()) != dim)
        throw std::invalid_argument(std::string(name) + ": expected " + std::to_string(dim) +
                                    " components, got " + std::to_string(v.size()));
    return v;
}

BoundaryTrace parse_boundary(const std::string& text, const GridSpec& g) {
    if (text == "zero") return BoundaryTrace::zero(g);
    if (text.rfind("const:", 0) == 0) return BoundaryTrace::constant(g, std::stod(text.substr(6)));
    throw std::invalid_argument("boundary must be 'zero' or 'const:<value>'");
}

void collect_verdicts(const nlohmann::json& node, std::vector<bool>& found) {
    if (node.is_object()) {
        for (const auto& [key, value] : node.items()) {
            if (key == "verdict" && value.is_boolean()) found.push_back(value.get<bool>());
            collect_verdicts(value, found);
        }
    } else if (node.is_array()) {
        for (const auto& value : node) collect_verdicts(value, found);
    }
}

struct CommandOutput {
    ordered_json params;
    ordered_json results;
    std::optional<bool> verdict;
};

// ---- option bag -----------------------------------------------------------

struct Opts {
    int grid_n = 64;
    int dim = 1;
    std::uint64_t seed = 0;
    long long seed_count = 1;
    std::string drift = "zero";
    std::string out;
    std::string csv;
    std::string in_csv;
    int jobs = 0;

    // solve
    std::string scheme = "explicit";
    std::string boundary = "zero";
    double tol = 1e-12;
    int max_iter = 64;

    // gronwall
    bool vanishing = false;
    bool table = false;
    bool resolvent = false;
    double bessel_z = std::nan("");
    int n_max = 16;
    int n_min = 1;
    double c1 = 1.0;
    double m_growth = 1.0;
    int level = 3;
    double beta_log2 = 0.0;
    double max_residual = 0.0;

    // window
    double win_a = 0.0, win_ap = 0.0, win_eps = 1.0, win_epsp = 1.0;

    // rho-tail
    std::vector<double> x_point{0.0};
    std::vector<double> y_point{0.5};
    long long samples = 20000;
    double eta_min = 0.5, eta_max = 6.0;
    int eta_count = 12;

    // rho-scan
    int m_max = 2;
    std::string anchor;  // "", "plain", "extlog"

    // exp-moment
    double alpha = 0.01;
    std::vector<double> eps_list;
    double max_ratio = 0.0;

    // localtime / tanaka / lts
    int row = -1;
    bool plane = false;
    double s_horizon = 1.0, t_horizon = 1.0;
    double bandwidth = 0.0;  // 0 = N^(-1/4)
    double x_min = -3.0, x_max = 3.0;
    int x_count = 121;
    double x_level = 0.0;
    double occupation_tol = 0.0;
    int coord = 0;
    double xi0 = 1.0 / 16.0, u0 = 1.0 / 16.0;
    std::string test_fn = "bump";

    // girsanov
    std::vector<double> t_grid{0.25, 0.5, 1.0};

    // uniqueness
    double beta = 1e-6;
    double picard_tol = 1e-14;
    double gap_tol = 1e-6;

    // report
    std::vector<std::string> inputs;
};

double auto_bandwidth(const Opts& o) {
    return o.bandwidth > 0.0 ? o.bandwidth : std::pow(static_cast<double>(o.grid_n), -0.25);
}

// ---- command handlers ------------------------------------------------------

CommandOutput cmd_simulate(const Opts& o) {
    GridSpec g{o.grid_n, o.dim};
    const SheetField w = generate_sheet(g, o.seed);
    if (o.csv.empty()) throw std::invalid_argument("simulate: --csv-out is required");
    write_csv(w, o.csv);
    CommandOutput out;
    out.params = {{"grid_n", o.grid_n}, {"dim", o.dim}, {"seed", o.seed}};
    out.results = {{"csv", o.csv},
                   {"nodes", (static_cast<long long>(o.grid_n) + 1) * (o.grid_n + 1)},
                   {"sup_norm", sup_norm(w)}};
    return out;
}

CommandOutput cmd_solve(const Opts& o) {
    GridSpec g{o.grid_n, o.dim};
    const SheetField w = o.in_csv.empty() ? generate_sheet(g, o.seed) : read_csv(o.in_csv);
    if (!o.in_csv.empty()) g = w.grid();
    const Drift b = Drift::parse(o.drift, g.dim);
    const BoundaryTrace bt = parse_boundary(o.boundary, g);

    CommandOutput out;
    out.params = {{"grid_n", g.n_cells}, {"dim", g.dim},     {"seed", o.seed},
                  {"drift", o.drift},    {"scheme", o.scheme}, {"boundary", o.boundary}};
    try {
        SolutionField sol = [&] {
            if (o.scheme == "explicit") return solve_explicit(b, w, bt);
            if (o.scheme == "picard") return solve_picard(b, w, bt, o.tol, o.max_iter);
            if (o.scheme == "truncated") return solve_truncated(b, w, bt);
            throw std::invalid_argument("scheme must be explicit, picard, or truncated");
        }();
        if (!o.csv.empty()) write_csv(sol.field, o.csv);
        out.results = {{"residual", sol.residual},
                       {"iterations", sol.iterations},
                       {"sup_norm", sup_norm(sol.field)},
                       {"sheet_sup_norm", sup_norm(w)}};
        if (sol.truncation_n) out.results["truncation_level"] = *sol.truncation_n;
        if (b.growth()) {
            out.results["apriori_bound"] = apriori_bound(*b.growth(), sup_norm(w));
        }
        out.verdict = true;
    } catch (const PicardError& e) {
        out.results = {{"error", e.what()}, {"residual", e.residual}, {"iterations", e.iterations}};
        out.verdict = false;
    } catch (const TruncationError& e) {
        out.results = {{"error", e.what()}, {"worst_norm", e.worst_norm}, {"level", e.level}};
        out.verdict = false;
    }
    return out;
}

CommandOutput cmd_gronwall(const Opts& o) {
    CommandOutput out;
    if (!std::isnan(o.bessel_z)) {
        out.params = {{"bessel", o.bessel_z}};
        out.results = {{"i0", bessel_i0(o.bessel_z)}};
        return out;
    }
    if (o.vanishing) {
        const VanishingReport rep = vanishing_check(o.n_max, o.dim, o.c1, o.n_min);
        out.params = {{"mode", "vanishing"}, {"dim", o.dim}, {"c1", o.c1},
                      {"n_min", o.n_min},   {"n_max", o.n_max}};
        out.results = {{"l_values", rep.l_values},
                       {"smallness_ok", rep.smallness_ok},
                       {"decreasing_from", rep.decreasing_from},
                       {"crosses_minus_1000", rep.crosses_minus_1000},
                       {"verdict", rep.verdict}};
        out.verdict = rep.verdict;
        return out;
    }
    if (o.table) {
        const GronwallTable t = discrete_bound_table(o.level, o.dim, o.c1, o.beta_log2);
        out.params = {{"mode", "table"},
                      {"level", o.level},
                      {"dim", o.dim},
                      {"c1", o.c1},
                      {"beta_log2", o.beta_log2}};
        out.results = {{"side", t.side()}, {"entries_log2", t.entries_log2}};
        return out;
    }
    if (o.resolvent) {
        const double r1 = verify_resolvent(o.m_growth, o.grid_n);
        const double r2 = verify_resolvent(o.m_growth, 2 * o.grid_n);
        out.params = {{"mode", "resolvent"}, {"m", o.m_growth}, {"grid_n", o.grid_n}};
        out.results = {{"residual", r1}, {"residual_2n", r2}, {"ratio", r1 / r2}};
        if (o.max_residual > 0.0) out.verdict = r1 <= o.max_residual;
        return out;
    }
    throw std::invalid_argument("gronwall: pick one of --vanishing, --table, --resolvent, --bessel");
}

CommandOutput cmd_rho_tail(const Opts& o) {
    GridSpec g{o.grid_n, o.dim};
    const Drift b = Drift::parse(o.drift, o.dim);
    const WindowSpec win{o.win_a, o.win_ap, o.win_eps, o.win_epsp};
    const std::vector<double> x = as_point(o.x_point, o.dim, "--x");
    const std::vector<double> y = as_point(o.y_point, o.dim, "--y");
    const std::vector<double> eta = linspace(o.eta_min, o.eta_max, o.eta_count);

    const TailReport rep = tail_estimate(b, win, x, y, o.samples, eta, g, o.seed);
    CommandOutput out;
    out.params = {{"grid_n", o.grid_n}, {"dim", o.dim},        {"drift", o.drift},
                  {"samples", o.samples}, {"seed", o.seed},    {"x", x},
                  {"y", y},             {"window", {o.win_a, o.win_ap, o.win_eps, o.win_epsp}}};
    out.results = {{"eta", rep.eta},
                   {"tail_prob", rep.tail_prob},
                   {"se", rep.se},
                   {"retained", rep.retained},
                   {"alpha_hat", rep.alpha_hat},
                   {"c_hat", rep.c_hat},
                   {"r2", rep.r2},
                   {"inconclusive", rep.inconclusive},
                   {"verdict", rep.verdict}};
    out.verdict = rep.verdict;
    return out;
}

CommandOutput cmd_rho_scan(const Opts& o) {
    GridSpec g{o.grid_n, o.dim};
    const Drift b = Drift::parse(o.drift, o.dim);
    const SheetField w = generate_sheet(g, o.seed);

    CommandOutput out;
    out.params = {{"grid_n", o.grid_n}, {"dim", o.dim},   {"drift", o.drift},
                  {"seed", o.seed},     {"level", o.level}, {"m_max", o.m_max}};
    if (o.anchor.empty()) {
        const ScanReport rep = modulus_scan(w, b, o.level, o.m_max);
        out.results = {{"constant", rep.constant},
                       {"arg_block", {rep.arg_block.level, rep.arg_block.k, rep.arg_block.kp}},
                       {"arg_x", rep.arg_x},
                       {"arg_y", rep.arg_y}};
        return out;
    }
    const AnchorMode mode = [&] {
        if (o.anchor == "plain") return AnchorMode::plain;
        if (o.anchor == "extlog") return AnchorMode::extended_log;
        throw std::invalid_argument("--anchor must be plain or extlog");
    }();
    // Points along each coordinate axis at lattice denominator 2^m_max.
    std::vector<std::vector<double>> x_set;
    const int denom = 1 << o.m_max;
    for (int c = 0; c < o.dim; ++c)
        for (int k = -denom; k <= denom; ++k) {
            if (k == 0) continue;
            std::vector<double> pt(static_cast<std::size_t>(o.dim), 0.0);
            pt[c] = static_cast<double>(k) / denom;
            x_set.push_back(std::move(pt));
        }
    const ScanReport rep = zero_anchor_scan(w, b, o.level, x_set, mode);
    out.params["anchor"] = o.anchor;
    out.results = {{"constant", rep.constant},
                   {"arg_block", {rep.arg_block.level, rep.arg_block.k, rep.arg_block.kp}},
                   {"arg_x", rep.arg_x}};
    return out;
}

CommandOutput cmd_exp_moment(const Opts& o) {
    GridSpec g{o.grid_n, o.dim};
    const Drift b = Drift::parse(o.drift, o.dim);
    std::vector<double> eps = o.eps_list;
    if (eps.empty()) eps.push_back(o.win_eps);

    CommandOutput out;
    out.params = {{"grid_n", o.grid_n}, {"dim", o.dim},       {"drift", o.drift},
                  {"alpha", o.alpha},   {"samples", o.samples}, {"seed", o.seed},
                  {"eps", eps}};
    ordered_json estimates = ordered_json::array();
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    bool any_unstable = false;
    for (std::size_t k = 0; k < eps.size(); ++k) {
        const WindowSpec win{o.win_a, o.win_ap, eps[k], eps[k]};
        const ExpMomentReport rep =
            exp_moment(b, win, o.alpha, o.samples, g, derive_seed(o.seed, k));
        estimates.push_back({{"eps", eps[k]},
                             {"estimate", rep.estimate},
                             {"se", rep.se},
                             {"max_share", rep.max_share},
                             {"unstable", rep.unstable}});
        lo = std::min(lo, rep.estimate);
        hi = std::max(hi, rep.estimate);
        any_unstable = any_unstable || rep.unstable;
    }
    out.results = {{"estimates", estimates}, {"spread", hi / lo}, {"unstable", any_unstable}};
    if (o.max_ratio > 0.0) out.verdict = !any_unstable && hi / lo <= o.max_ratio;
    return out;
}

CommandOutput cmd_localtime(const Opts& o) {
    GridSpec g{o.grid_n, 1};
    const SheetField w = generate_sheet(g, o.seed);
    const double bw = auto_bandwidth(o);
    const std::vector<double> levels = linspace(o.x_min, o.x_max, o.x_count);
    const int row = o.row < 0 ? o.grid_n : o.row;

    const OccupationEstimate est = o.plane
                                       ? plane_local_time(w, o.s_horizon, o.t_horizon, levels, bw)
                                       : row_local_time(w, row, o.t_horizon, levels, bw);
    if (!o.csv.empty()) {
        std::ofstream f(o.csv);
        if (!f) throw std::invalid_argument("cannot open output file: " + o.csv);
        f << "x,density\n";
        for (std::size_t k = 0; k < est.x_grid.size(); ++k)
            f << est.x_grid[k] << "," << est.density[k] << "\n";
    }

    double integral = 0.0;
    const double dx = levels.size() > 1 ? levels[1] - levels[0] : 0.0;
    for (double v : est.density) integral += v * dx;
    const double expected =
        o.plane ? o.s_horizon * o.t_horizon : o.t_horizon;  // occupied mass under the identity

    CommandOutput out;
    out.params = {{"grid_n", o.grid_n},   {"seed", o.seed},       {"bandwidth", bw},
                  {"plane", o.plane},     {"row", o.plane ? -1 : row}, {"s", o.s_horizon},
                  {"t", o.t_horizon},     {"x_min", o.x_min},     {"x_max", o.x_max},
                  {"x_count", o.x_count}};
    out.results = {{"integral", integral}, {"expected", expected}};
    if (!o.csv.empty()) out.results["csv"] = o.csv;
    if (o.occupation_tol > 0.0) {
        const double rel = expected != 0.0 ? std::abs(integral - expected) / expected
                                           : std::abs(integral);
        out.results["relative_error"] = rel;
        out.verdict = rel <= o.occupation_tol;
    }
    return out;
}

CommandOutput cmd_tanaka(const Opts& o) {
    GridSpec g{o.grid_n, 1};
    const double bw = auto_bandwidth(o);
    const int row = o.row < 0 ? o.grid_n : o.row;
    std::vector<double> residuals(static_cast<std::size_t>(o.seed_count), 0.0);
    parallel_for(static_cast<std::size_t>(o.seed_count), [&](std::size_t k) {
        const SheetField w = generate_sheet(g, derive_seed(o.seed, k));
        residuals[k] = tanaka_residual(w, row, o.t_horizon, o.x_level, bw);
    });
    double sq = 0.0;
    for (double r : residuals) sq += r * r;
    const double rms = std::sqrt(sq / static_cast<double>(o.seed_count));

    CommandOutput out;
    out.params = {{"grid_n", o.grid_n}, {"seeds", o.seed_count}, {"base_seed", o.seed},
                  {"row", row},         {"t", o.t_horizon},      {"x", o.x_level},
                  {"bandwidth", bw}};
    out.results = {{"rms", rms}, {"residuals", residuals}};
    return out;
}

CommandOutput cmd_lts(const Opts& o) {
    GridSpec g{o.grid_n, o.dim};
    const auto [f, df] = [&]() -> std::pair<SpaceTimeFn, SpaceTimeFn> {
        const int c = o.coord;
        if (o.test_fn == "bump")
            return {[c](double, double, std::span<const double> x) { return std::exp(-4.0 * x[c] * x[c]); },
                    [c](double, double, std::span<const double> x) {
                        return -8.0 * x[c] * std::exp(-4.0 * x[c] * x[c]);
                    }};
        if (o.test_fn == "linear")
            return {[c](double, double, std::span<const double> x) { return x[c]; },
                    [](double, double, std::span<const double>) { return 1.0; }};
        throw std::invalid_argument("--fn must be bump or linear");
    }();

    std::vector<double> residuals(static_cast<std::size_t>(o.seed_count), 0.0);
    std::vector<double> lhs(static_cast<std::size_t>(o.seed_count), 0.0);
    parallel_for(static_cast<std::size_t>(o.seed_count), [&](std::size_t k) {
        const SheetField w = generate_sheet(g, derive_seed(o.seed, k));
        const LtsResult r =
            lts_formula_residual(w, f, df, o.coord, o.s_horizon, o.t_horizon, o.xi0, o.u0);
        residuals[k] = r.residual;
        lhs[k] = r.lhs;
    });
    double sq = 0.0, sql = 0.0;
    for (std::size_t k = 0; k < residuals.size(); ++k) {
        sq += residuals[k] * residuals[k];
        sql += lhs[k] * lhs[k];
    }
    const double rms_res = std::sqrt(sq / static_cast<double>(o.seed_count));
    const double rms_lhs = std::sqrt(sql / static_cast<double>(o.seed_count));
    const double ratio = rms_lhs > 0.0 ? rms_res / rms_lhs : std::numeric_limits<double>::infinity();

    CommandOutput out;
    out.params = {{"grid_n", o.grid_n}, {"dim", o.dim},  {"seeds", o.seed_count},
                  {"base_seed", o.seed}, {"coord", o.coord}, {"s", o.s_horizon},
                  {"t", o.t_horizon},   {"xi0", o.xi0},  {"u0", o.u0},
                  {"fn", o.test_fn}};
    out.results = {{"rms_residual", rms_res},
                   {"rms_lhs", rms_lhs},
                   {"ratio", ratio},
                   {"residuals", residuals}};
    if (o.max_ratio > 0.0) out.verdict = ratio <= o.max_ratio;
    return out;
}

CommandOutput cmd_girsanov(const Opts& o) {
    GridSpec g{o.grid_n, o.dim};
    const Drift b = Drift::parse(o.drift, o.dim);
    const MartingaleReport rep = martingale_check(b, o.samples, o.t_grid, g, o.seed);

    CommandOutput out;
    out.params = {{"grid_n", o.grid_n}, {"dim", o.dim},  {"drift", o.drift},
                  {"samples", o.samples}, {"seed", o.seed}};
    out.results = {{"t", rep.t_grid},      {"EZ", rep.ez},
                   {"se", rep.se},         {"max_share", rep.max_share},
                   {"unstable", rep.unstable}, {"verdict", rep.verdict}};
    out.verdict = rep.verdict;
    return out;
}

CommandOutput cmd_uniqueness(const Opts& o) {
    GridSpec g{o.grid_n, o.dim};
    const Drift b = Drift::parse(o.drift, o.dim);

    ordered_json per_seed = ordered_json::array();
    double max_gap = 0.0;
    double min_margin = std::numeric_limits<double>::infinity();
    bool all_ok = true;
    for (long long k = 0; k < o.seed_count; ++k) {
        const UniquenessReport rep =
            uniqueness_experiment(b, g, o.level, o.beta, o.picard_tol, derive_seed(o.seed, k));
        per_seed.push_back({{"seed_index", k},
                            {"fixed_point_gap", rep.fixed_point_gap},
                            {"picard_iterations", rep.picard_iterations},
                            {"picard_converged", rep.picard_converged},
                            {"c2_hat", rep.c2_hat},
                            {"c1_hat", rep.c1_hat},
                            {"smallness_ok", rep.smallness_ok},
                            {"min_margin", rep.min_margin},
                            {"upper_sup", rep.upper_sup},
                            {"lower_sup", rep.lower_sup},
                            {"bound_log2", rep.bound_log2},
                            {"margin_log2", rep.margin_log2},
                            {"verdict", rep.verdict}});
        max_gap = std::max(max_gap, rep.fixed_point_gap);
        min_margin = std::min(min_margin, rep.min_margin);
        all_ok = all_ok && rep.verdict;
    }
    const bool verdict = all_ok && max_gap <= o.gap_tol;

    CommandOutput out;
    out.params = {{"grid_n", o.grid_n}, {"dim", o.dim},   {"drift", o.drift},
                  {"level", o.level},   {"beta", o.beta}, {"picard_tol", o.picard_tol},
                  {"gap_tol", o.gap_tol}, {"seeds", o.seed_count}, {"base_seed", o.seed}};
    out.results = {{"max_fixed_point_gap", max_gap},
                   {"min_margin", min_margin},
                   {"seeds", per_seed},
                   {"verdict", verdict}};
    out.verdict = verdict;
    return out;
}

CommandOutput cmd_report(const Opts& o) {
    CommandOutput out;
    out.params = {{"inputs", o.inputs}};
    ordered_json docs = ordered_json::array();
    bool all_pass = true;
    long long verdict_count = 0;
    for (const std::string& path : o.inputs) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open input file: " + path);
        nlohmann::json doc = nlohmann::json::parse(in);
        std::vector<bool> verdicts;
        collect_verdicts(doc, verdicts);
        bool file_pass = true;
        for (bool v : verdicts) file_pass = file_pass && v;
        all_pass = all_pass && file_pass;
        verdict_count += static_cast<long long>(verdicts.size());
        docs.push_back({{"file", path},
                        {"command", doc.value("command", std::string("?"))},
                        {"verdicts", verdicts.size()},
                        {"pass", file_pass}});
    }
    out.results = {{"files", docs}, {"verdicts", verdict_count}, {"verdict", all_pass}};
    out.verdict = all_pass;
    return out;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Numerical laboratory for plane stochastic integral equations"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Flat key=value config file; command-line flags win");
    app.get_formatter()->column_width(30);

    Opts o;
    app.add_option("--jobs", o.jobs, "Worker threads (0 = hardware)")->capture_default_str();

    const auto add_common = [&](CLI::App* sub, bool needs_seed) {
        sub->add_option("--grid-n", o.grid_n, "Cells per axis")->capture_default_str();
        sub->add_option("--dim", o.dim, "Field dimension d")->capture_default_str();
        sub->add_option("--out", o.out, "JSON report path (default: stdout)");
        auto* seed = sub->add_option("--seed", o.seed, "Base seed (required: no wall-clock seeding)");
        if (needs_seed) seed->required();
    };

    auto* sim = app.add_subcommand("simulate", "Draw one driving-field sample and write it as CSV")->configurable();
    add_common(sim, true);
    sim->add_option("--csv-out", o.csv, "Field CSV path")->required();

    auto* solve = app.add_subcommand("solve", "Solve the plane integral equation along one path")->configurable();
    add_common(solve, false);
    solve->add_option("--in", o.in_csv, "Load the driving field from CSV instead of --seed");
    solve->add_option("--drift", o.drift, "Drift spec, e.g. zero|const:c|sign|tanh:s|linear:m")
        ->capture_default_str();
    solve->add_option("--scheme", o.scheme, "explicit|picard|truncated")->capture_default_str();
    solve->add_option("--boundary", o.boundary, "zero|const:v")->capture_default_str();
    solve->add_option("--tol", o.tol, "Picard tolerance")->capture_default_str();
    solve->add_option("--max-iter", o.max_iter, "Picard iteration cap")->capture_default_str();
    solve->add_option("--csv-out", o.csv, "Solution CSV path");

    auto* gron = app.add_subcommand("gronwall", "Bound tables, vanishing check, resolvent residual")->configurable();
    add_common(gron, false);
    gron->add_flag("--vanishing", o.vanishing, "Exact leading-magnitude check L(n)");
    gron->add_flag("--table", o.table, "Emit the block bound table");
    gron->add_flag("--resolvent", o.resolvent, "Residual of the resolvent kernel identity");
    gron->add_option("--bessel", o.bessel_z, "Evaluate the series kernel at z");
    gron->add_option("--d", o.dim, "Dimension d")->capture_default_str();
    gron->add_option("--n-max", o.n_max, "Largest level for --vanishing")->capture_default_str();
    gron->add_option("--n-min", o.n_min, "Smallest level for --vanishing")->capture_default_str();
    gron->add_option("--c1", o.c1, "Smallness constant")->capture_default_str();
    gron->add_option("--level", o.level, "Block level n for --table")->capture_default_str();
    gron->add_option("--beta-log2", o.beta_log2, "log2 of the boundary gap")->capture_default_str();
    gron->add_option("--m", o.m_growth, "Growth constant for --resolvent")->capture_default_str();
    gron->add_option("--max-residual", o.max_residual, "Verdict threshold for --resolvent");

    auto* tail = app.add_subcommand("rho-tail", "Tail of the averaging operator over a window")->configurable();
    add_common(tail, true);
    tail->add_option("--drift", o.drift, "Drift spec")->capture_default_str();
    tail->add_option("--samples", o.samples, "Monte Carlo sample count")->capture_default_str();
    tail->add_option("--x", o.x_point, "First shift (comma list, broadcast)")->delimiter(',');
    tail->add_option("--y", o.y_point, "Second shift (comma list, broadcast)")->delimiter(',');
    tail->add_option("--win-a", o.win_a, "Window corner on the t-axis")->capture_default_str();
    tail->add_option("--win-ap", o.win_ap, "Window corner on the s-axis")->capture_default_str();
    tail->add_option("--win-eps", o.win_eps, "Window side on the t-axis")->capture_default_str();
    tail->add_option("--win-epsp", o.win_epsp, "Window side on the s-axis")->capture_default_str();
    tail->add_option("--eta-min", o.eta_min, "Smallest threshold")->capture_default_str();
    tail->add_option("--eta-max", o.eta_max, "Largest threshold")->capture_default_str();
    tail->add_option("--eta-count", o.eta_count, "Threshold count")->capture_default_str();

    auto* scan = app.add_subcommand("rho-scan", "Modulus scan of the averaging operator")->configurable();
    add_common(scan, true);
    scan->add_option("--drift", o.drift, "Drift spec")->capture_default_str();
    scan->add_option("--level", o.level, "Dyadic level n")->capture_default_str();
    scan->add_option("--m-max", o.m_max, "Lattice denominator exponent")->capture_default_str();
    scan->add_option("--anchor", o.anchor, "Anchored scan at x=0: plain|extlog");

    auto* expm = app.add_subcommand("exp-moment", "Exponential square-moment estimate")->configurable();
    add_common(expm, true);
    expm->add_option("--drift", o.drift, "Drift spec (needs a Jacobian)")->capture_default_str();
    expm->add_option("--alpha", o.alpha, "Exponent weight")->capture_default_str();
    expm->add_option("--samples", o.samples, "Monte Carlo sample count")->capture_default_str();
    expm->add_option("--eps", o.eps_list, "Window sides to sweep (comma list)")->delimiter(',');
    expm->add_option("--win-a", o.win_a, "Window corner on the t-axis")->capture_default_str();
    expm->add_option("--win-ap", o.win_ap, "Window corner on the s-axis")->capture_default_str();
    expm->add_option("--max-ratio", o.max_ratio, "Verdict threshold on max/min estimate");

    auto* lt = app.add_subcommand("localtime", "Occupation-density estimate of one path")->configurable();
    add_common(lt, true);
    lt->add_option("--row", o.row, "Row index (default: top row)")->capture_default_str();
    lt->add_flag("--plane", o.plane, "Plane estimate instead of a single row");
    lt->add_option("--s", o.s_horizon, "s horizon")->capture_default_str();
    lt->add_option("--t", o.t_horizon, "t horizon")->capture_default_str();
    lt->add_option("--bandwidth", o.bandwidth, "Kernel half-width (0 = N^(-1/4))")
        ->capture_default_str();
    lt->add_option("--x-min", o.x_min, "Lowest level")->capture_default_str();
    lt->add_option("--x-max", o.x_max, "Highest level")->capture_default_str();
    lt->add_option("--x-count", o.x_count, "Level count")->capture_default_str();
    lt->add_option("--csv-out", o.csv, "Density CSV path (x,density)");
    lt->add_option("--check-occupation", o.occupation_tol,
                   "Verdict: relative occupation defect below this tolerance");

    auto* tan = app.add_subcommand("tanaka", "Reflection-identity residual sweep across seeds")->configurable();
    add_common(tan, true);
    tan->add_option("--seeds", o.seed_count, "Seed count")->capture_default_str();
    tan->add_option("--row", o.row, "Row index (default: top row)")->capture_default_str();
    tan->add_option("--t", o.t_horizon, "t horizon")->capture_default_str();
    tan->add_option("--x", o.x_level, "Level x")->capture_default_str();
    tan->add_option("--bandwidth", o.bandwidth, "Kernel half-width (0 = N^(-1/4))")
        ->capture_default_str();

    auto* lts = app.add_subcommand("lts-check", "Space-time density identity residual across seeds")->configurable();
    add_common(lts, true);
    lts->add_option("--seeds", o.seed_count, "Seed count")->capture_default_str();
    lts->add_option("--coord", o.coord, "Space coordinate")->capture_default_str();
    lts->add_option("--s", o.s_horizon, "s horizon")->capture_default_str();
    lts->add_option("--t", o.t_horizon, "t horizon")->capture_default_str();
    lts->add_option("--xi0", o.xi0, "Row cutoff")->capture_default_str();
    lts->add_option("--u0", o.u0, "Time cutoff")->capture_default_str();
    lts->add_option("--fn", o.test_fn, "Test function: bump|linear")->capture_default_str();
    lts->add_option("--max-ratio", o.max_ratio, "Verdict threshold on rms(residual)/rms(lhs)");

    auto* gir = app.add_subcommand("girsanov", "Martingale normalization of the density")->configurable();
    add_common(gir, true);
    gir->add_option("--drift", o.drift, "Drift spec")->capture_default_str();
    gir->add_option("--samples", o.samples, "Monte Carlo sample count")->capture_default_str();
    gir->add_option("--t-grid", o.t_grid, "Horizons (comma list)")->delimiter(',');

    auto* uniq = app.add_subcommand("uniqueness", "Fixed-point collapse and perturbation bound")->configurable();
    add_common(uniq, true);
    uniq->add_option("--drift", o.drift, "Drift spec")->capture_default_str();
    uniq->add_option("--level", o.level, "Dyadic level n")->capture_default_str();
    uniq->add_option("--beta", o.beta, "Boundary perturbation height")->capture_default_str();
    uniq->add_option("--picard-tol", o.picard_tol, "Fixed-point tolerance")->capture_default_str();
    uniq->add_option("--gap-tol", o.gap_tol, "Verdict threshold on the collapse gap")
        ->capture_default_str();
    uniq->add_option("--seeds", o.seed_count, "Seed count")->capture_default_str();

    auto* rept = app.add_subcommand("report", "Merge reports; fail when any verdict is false")->configurable();
    rept->add_option("--out", o.out, "JSON report path (default: stdout)");
    rept->add_option("--in", o.inputs, "Input report files")->required()->expected(-1);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (o.jobs > 0) set_worker_count(static_cast<unsigned>(o.jobs));

    try {
        const auto dispatch = [&]() -> CommandOutput {
            if (sim->parsed()) return cmd_simulate(o);
            if (solve->parsed()) return cmd_solve(o);
            if (gron->parsed()) return cmd_gronwall(o);
            if (tail->parsed()) return cmd_rho_tail(o);
            if (scan->parsed()) return cmd_rho_scan(o);
            if (expm->parsed()) return cmd_exp_moment(o);
            if (lt->parsed()) return cmd_localtime(o);
            if (tan->parsed()) return cmd_tanaka(o);
            if (lts->parsed()) return cmd_lts(o);
            if (gir->parsed()) return cmd_girsanov(o);
            if (uniq->parsed()) return cmd_uniqueness(o);
            if (rept->parsed()) return cmd_report(o);
            throw std::invalid_argument("no subcommand selected");
        };
        CommandOutput result = dispatch();

        ordered_json doc;
        doc["command"] = app.get_subcommands().front()->get_name();
        doc["generated_at"] = iso_now();
        doc["params"] = std::move(result.params);
        doc["results"] = std::move(result.results);
        if (result.verdict) doc["verdict"] = *result.verdict;
        emit(o.out, doc);
        return result.verdict && !*result.verdict ? 1 : 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    args.reserve(argc > 0 ? static_cast<std::size_t>(argc - 1) : 0);
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace sheetlab::cli
