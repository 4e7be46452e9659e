#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "sdg/config.hpp"
#include "sdg/errors.hpp"
#include "sdg/runner.hpp"

using namespace sdg;
namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* p = std::getenv("SDG_CLI_PATH");
    return p ? std::string(p) : std::string();
}

int run_cli(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string capture_cli(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[512];
    while (fgets(buf, sizeof buf, pipe)) out += buf;
    pclose(pipe);
    return out;
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path d = fs::temp_directory_path() / ("sdg_cli_" + tag);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config text parses comments, sections, and round-trips") {
    const Config c = Config::parse_string(
        "# header comment\n"
        "problem = ou1d\n"
        "grid.radius = 6\n"
        "grid.n = 41   # trailing comment\n"
        "\n"
        "solver.alphas = 0.5, 0.25\n");
    CHECK(c.get("problem") == "ou1d");
    CHECK(c.get_double("grid.radius") == 6.0);
    CHECK(c.get_long("grid.n", 0) == 41);
    CHECK(c.get_doubles("solver.alphas") == std::vector<double>{0.5, 0.25});
    CHECK(c.section_keys("grid") == std::vector<std::string>{"grid.n", "grid.radius"});

    const Config back = Config::parse_string(c.serialize());
    CHECK(back.entries() == c.entries());
}

TEST_CASE("malformed config lines are rejected") {
    CHECK_THROWS_AS(Config::parse_string("problem = a\nproblem = b\n"), InvalidInput);
    CHECK_THROWS_AS(Config::parse_string("no equals sign here\n"), InvalidInput);
    CHECK_THROWS_AS(Config::parse_string(" = empty key\n"), InvalidInput);
    CHECK_THROWS_AS(Config::parse_string("x = 1\n").get("missing"), InvalidInput);
    CHECK_THROWS_AS(Config::parse_string("x = abc\n").get_double("x"), InvalidInput);
}

TEST_CASE("run configuration echo parses back to the same settings") {
    RunConfig rc;
    rc.problem = "ou1d";
    rc.method = Method::rvi;
    rc.grid_n = 81;
    rc.t_end = 5.0;
    const RunConfig back = RunConfig::from_config(rc.to_config());
    CHECK(back.problem == rc.problem);
    CHECK(back.method == rc.method);
    CHECK(back.grid_n == rc.grid_n);
    CHECK(back.t_end == rc.t_end);
    CHECK(back.alphas == RunConfig::default_alphas());
}

TEST_CASE("unknown configuration keys are rejected") {
    Config c;
    c.set("problem", "ou1d");
    c.set("method", "rvi");
    c.set("solver.step", "0.1");  // not a recognized key
    CHECK_THROWS_AS(RunConfig::from_config(c), InvalidInput);
}

TEST_CASE("cli: list-problems names every registered benchmark") {
    if (cli_path().empty()) {
        MESSAGE("SDG_CLI_PATH not set; skipping CLI process tests");
        return;
    }
    const std::string out = capture_cli("list-problems");
    CHECK(out.find("ou1d") != std::string::npos);
    CHECK(out.find("ou-game-1d") != std::string::npos);
    CHECK(out.find("risk-ou-1d") != std::string::npos);
}

TEST_CASE("cli: a converged solve exits 0 and writes artifacts") {
    if (cli_path().empty()) return;
    const fs::path out = fresh_dir("solve_ok");
    const int rc = run_cli("solve --problem ou1d --method rvi --radius 4 --n 81 --t-end 10 --out " +
                           out.string());
    CHECK(rc == 0);
    CHECK(fs::exists(out / "manifest.cfg"));
    CHECK(fs::exists(out / "report.json"));
    CHECK(fs::exists(out / "value.csv"));
    CHECK(fs::exists(out / "strategy.csv"));
}

TEST_CASE("cli: invalid inputs exit 1") {
    if (cli_path().empty()) return;
    CHECK(run_cli("solve --problem no-such-problem --method rvi") == 1);
    CHECK(run_cli("solve --problem ou1d --method bogus") == 1);
    CHECK(run_cli("frobnicate") == 1);

    const fs::path dir = fresh_dir("dup_key");
    std::ofstream(dir / "bad.cfg") << "problem = ou1d\nmethod = rvi\nmethod = vi\n";
    CHECK(run_cli("solve --config " + (dir / "bad.cfg").string()) == 1);
}

TEST_CASE("cli: an unconverged solve exits 2") {
    if (cli_path().empty()) return;
    // Far too short a march with an unreachable residual tolerance.
    const int rc = run_cli(
        "solve --problem ou1d --method rvi --radius 4 --n 81 --t-end 0.05 --residual-tol 1e-9");
    CHECK(rc == 2);
}

TEST_CASE("cli: check passes on the shipped benchmarks") {
    if (cli_path().empty()) return;
    const fs::path out = fresh_dir("check");
    CHECK(run_cli("check --problem ou1d --out " + out.string()) == 0);
    CHECK(fs::exists(out / "check_report.json"));
    CHECK(run_cli("check --problem risk-ou-1d") == 0);
}

TEST_CASE("cli: the manifest re-runs to a byte-identical value field") {
    if (cli_path().empty()) return;
    const fs::path a = fresh_dir("manifest_a");
    const fs::path b = fresh_dir("manifest_b");
    REQUIRE(run_cli("solve --problem ou1d --method rvi --radius 4 --n 61 --t-end 8 --out " +
                    a.string()) == 0);
    REQUIRE(run_cli("solve --config " + (a / "manifest.cfg").string() + " --out " + b.string()) ==
            0);
    CHECK(slurp(a / "value.csv") == slurp(b / "value.csv"));
    CHECK(slurp(a / "strategy.csv") == slurp(b / "strategy.csv"));

    const CompareResult diff = compare(a.string(), b.string());
    CHECK(diff.dbeta == 0.0);
    CHECK(diff.max_diff == 0.0);
}

TEST_CASE("cli: compare reports the self-difference as zero") {
    if (cli_path().empty()) return;
    const fs::path a = fresh_dir("cmp_a");
    REQUIRE(run_cli("solve --problem ou1d --method rvi --radius 4 --n 61 --t-end 8 --out " +
                    a.string()) == 0);
    CHECK(run_cli("compare " + a.string() + " " + a.string()) == 0);
}

TEST_CASE("cli: compare rejects mismatched grids") {
    if (cli_path().empty()) return;
    const fs::path a = fresh_dir("mis_a");
    const fs::path b = fresh_dir("mis_b");
    REQUIRE(run_cli("solve --problem ou1d --method rvi --radius 4 --n 61 --t-end 8 --out " +
                    a.string()) == 0);
    REQUIRE(run_cli("solve --problem ou1d --method rvi --radius 4 --n 41 --t-end 8 --out " +
                    b.string()) == 0);
    CHECK(run_cli("compare " + a.string() + " " + b.string()) == 1);
    CHECK_THROWS_AS(compare(a.string(), b.string()), InvalidInput);
}

TEST_CASE("cli: simulate writes trace and estimates") {
    if (cli_path().empty()) return;
    const fs::path out = fresh_dir("sim");
    const int rc = run_cli(
        "simulate --problem ou1d --radius 4 --n 61 --t-end 8 --paths 50 --horizon 3 "
        "--sim-dt 0.005 --out " +
        out.string());
    CHECK(rc == 0);
    CHECK(fs::exists(out / "trace.csv"));
    CHECK(fs::exists(out / "estimates.json"));
}
