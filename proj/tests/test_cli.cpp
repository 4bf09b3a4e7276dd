/// @file test_cli.cpp
/// Unit tests for the command-line front end: exit codes, JSON report shape,
/// CSV side outputs, config-file layering, and determinism.

#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path tmp_file(const std::string& name) {
    return fs::temp_directory_path() / ("sheetlab_cli_" + name);
}

int run(std::initializer_list<std::string> args) {
    return sheetlab::cli::run(std::vector<std::string>(args));
}

json load_json(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    return json::parse(in);
}

long count_lines(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    long n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

}  // namespace

TEST_CASE("cli: usage errors exit with code 2") {
    CHECK(run({}) == 2);  // a subcommand is required
    CHECK(run({"simulate", "--bogus-flag", "1"}) == 2);
    CHECK(run({"no-such-command"}) == 2);
    // --seed is declared required for sampling commands.
    CHECK(run({"simulate", "--grid-n", "8", "--csv-out", tmp_file("x.csv").string()}) == 2);
    // gronwall needs one of its modes.
    CHECK(run({"gronwall"}) == 2);
}

TEST_CASE("cli: simulate writes one CSV row per node plus a header") {
    const fs::path csv = tmp_file("sim.csv");
    const fs::path rep = tmp_file("sim.json");
    const int code = run({"simulate", "--grid-n", "8", "--dim", "1", "--seed", "42",
                          "--csv-out", csv.string(), "--out", rep.string()});
    CHECK(code == 0);
    CHECK(count_lines(csv) == 9 * 9 + 1);
    const json doc = load_json(rep);
    CHECK(doc["command"] == "simulate");
    CHECK(doc["results"]["nodes"] == 81);
    CHECK(doc.contains("generated_at"));
}

TEST_CASE("cli: solve round-trips a field loaded from CSV") {
    const fs::path field_csv = tmp_file("field.csv");
    const fs::path sol_csv = tmp_file("solution.csv");
    REQUIRE(run({"simulate", "--grid-n", "8", "--dim", "1", "--seed", "7",
                 "--csv-out", field_csv.string(), "--out", tmp_file("f.json").string()}) == 0);
    // Zero drift and zero boundary: the solution equals the driving field.
    REQUIRE(run({"solve", "--in", field_csv.string(), "--drift", "zero",
                 "--csv-out", sol_csv.string(), "--out", tmp_file("s.json").string()}) == 0);
    std::ifstream a(field_csv), b(sol_csv);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
}

TEST_CASE("cli: gronwall vanishing mode reports the exact magnitude sequence") {
    const fs::path rep = tmp_file("van.json");
    const int code = run({"gronwall", "--vanishing", "--d", "1", "--n-max", "12",
                          "--out", rep.string()});
    CHECK(code == 0);
    const json doc = load_json(rep);
    CHECK(doc["command"] == "gronwall");
    const auto& l = doc["results"]["l_values"];
    REQUIRE(l.size() == 12);
    CHECK(l[2].get<double>() == 16.0);    // n = 3
    CHECK(l[5].get<double>() == 0.0);     // n = 6
    CHECK(l[11].get<double>() == -49152.0);  // n = 12
    CHECK(doc["results"]["verdict"] == true);
}

TEST_CASE("cli: girsanov audit passes for a constant drift on a small grid") {
    const fs::path rep = tmp_file("gir.json");
    const int code = run({"girsanov", "--grid-n", "16", "--dim", "1", "--drift", "const:0.5",
                          "--samples", "400", "--seed", "11", "--out", rep.string()});
    CHECK(code == 0);
    const json doc = load_json(rep);
    CHECK(doc["verdict"] == true);
    const auto& ez = doc["results"]["EZ"];
    const auto& se = doc["results"]["se"];
    REQUIRE(ez.size() == se.size());
    for (std::size_t k = 0; k < ez.size(); ++k)
        CHECK(std::abs(ez[k].get<double>() - 1.0) <= 4.0 * se[k].get<double>() + 1e-15);
}

TEST_CASE("cli: uniqueness run on a zero drift yields a passing verdict") {
    const fs::path rep = tmp_file("uni.json");
    const int code = run({"uniqueness", "--grid-n", "16", "--dim", "1", "--drift", "zero",
                          "--level", "1", "--seeds", "1", "--seed", "3", "--out", rep.string()});
    CHECK(code == 0);
    const json doc = load_json(rep);
    CHECK(doc["verdict"] == true);
}

TEST_CASE("cli: report aggregates verdicts and fails on any false") {
    const fs::path good = tmp_file("rep_good.json");
    const fs::path bad = tmp_file("rep_bad.json");
    {
        std::ofstream g(good);
        g << R"({"command":"demo","verdict":true})";
        std::ofstream b(bad);
        b << R"({"command":"demo","results":{"verdict":false}})";
    }
    CHECK(run({"report", "--in", good.string(), "--out", tmp_file("agg1.json").string()}) == 0);
    CHECK(run({"report", "--in", good.string(), bad.string(),
               "--out", tmp_file("agg2.json").string()}) == 1);
    const json doc = load_json(tmp_file("agg2.json"));
    CHECK(doc["results"]["verdict"] == false);
    CHECK(doc["results"]["verdicts"].get<long long>() >= 2);
}

TEST_CASE("cli: reports are deterministic apart from the timestamp") {
    const fs::path r1 = tmp_file("det1.json");
    const fs::path r2 = tmp_file("det2.json");
    for (const fs::path& r : {r1, r2})
        REQUIRE(run({"localtime", "--grid-n", "32", "--seed", "19", "--x-min", "-1",
                     "--x-max", "1", "--x-count", "11", "--out", r.string()}) == 0);
    json a = load_json(r1);
    json b = load_json(r2);
    a.erase("generated_at");
    b.erase("generated_at");
    CHECK(a.dump() == b.dump());
}

TEST_CASE("cli: config file supplies defaults and flags override it") {
    const fs::path cfg = tmp_file("conf.ini");
    {
        std::ofstream f(cfg);
        f << "[simulate]\n"
          << "grid-n=8\n"
          << "dim=1\n"
          << "seed=5\n";
    }
    const fs::path csv1 = tmp_file("cfg_a.csv");
    // Values come from the config file (--config is a global option, so it
    // precedes the subcommand): grid 8 -> 82 lines, seed satisfied from file.
    CHECK(run({"--config", cfg.string(), "simulate", "--csv-out", csv1.string(),
               "--out", tmp_file("cfg_a.json").string()}) == 0);
    CHECK(count_lines(csv1) == 9 * 9 + 1);
    const fs::path csv2 = tmp_file("cfg_b.csv");
    // The command line wins over the file: grid 4 -> 26 lines.
    CHECK(run({"--config", cfg.string(), "simulate", "--grid-n", "4", "--csv-out", csv2.string(),
               "--out", tmp_file("cfg_b.json").string()}) == 0);
    CHECK(count_lines(csv2) == 5 * 5 + 1);
}
