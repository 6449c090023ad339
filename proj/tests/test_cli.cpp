#include <doctest.h>

#include "fracks/cli.hpp"
#include "fracks/errors.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace fracks;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("fracks-test-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("minimal config takes the defaults") {
    const RunConfig c = parse_config_text("[model]\nalpha = 0.8\n", Experiment::solve);
    CHECK(c.model.alpha == 0.8);
    CHECK(c.dim == 1);
    CHECK(c.n == 256);
    CHECK(c.half_width == doctest::Approx(std::numbers::pi));
    CHECK(c.steps == 64);
    const IterationConfig derived = IterationConfig::for_model(c.model, 1, 2.0, 2.0);
    CHECK(c.iteration.besov_eta.s == derived.besov_eta.s);
    CHECK(c.iteration.besov_v.s == derived.besov_v.s);
    // graded mesh defaults to exponent 2/alpha
    const TimeMesh m = c.mesh();
    CHECK(m.nodes()[1] == doctest::Approx(c.t_final * std::pow(1.0 / c.steps, 2.0 / 0.8)));
}

TEST_CASE("ini and json configs agree") {
    const char* ini =
        "# comment\n[grid]\nn = 64\nhalf_width = 4pi\n; other comment\n[mesh]\nsteps = 16\n"
        "[ensemble]\nT = 1, 3\n[run]\nseed = 9\n";
    const char* json = R"({"grid": {"n": 64, "half_width": "4pi"}, "mesh": {"steps": 16},
                           "ensemble": {"T": [1, 3]}, "run": {"seed": 9}})";
    const RunConfig a = parse_config_text(ini, Experiment::bilinear);
    const RunConfig b = parse_config_text(json, Experiment::bilinear, true);
    for (const RunConfig* c : {&a, &b}) {
        CHECK(c->n == 64);
        CHECK(c->half_width == doctest::Approx(4 * std::numbers::pi));
        CHECK(c->steps == 16);
        CHECK(c->T_values == std::vector<double>{1.0, 3.0});
        CHECK(c->seed == 9);
        CHECK(c->ensemble.seed == 9);
    }
}

TEST_CASE("config errors") {
    CHECK_THROWS_WITH_AS(parse_config_text("[model]\nbeta = 1\n", Experiment::solve),
                         doctest::Contains("unknown key 'model.beta'"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("[grid]\nn = lots\n", Experiment::solve),
                         doctest::Contains("grid.n: expected a number"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("[besov]\ns1 = 0.2\n", Experiment::solve),
                         doctest::Contains("derived"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("[model]\nalpha = 0.5\nnot a pair\n", Experiment::solve),
                         doctest::Contains("line 3:"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("{\"model\": 1}", Experiment::solve, true),
                         doctest::Contains("must be an object"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("[grid]\nn = 100\n", Experiment::solve),
                         doctest::Contains("power of two"), ConfigError);
    CHECK_THROWS_AS(parse_experiment("nope"), ConfigError);
    CHECK(parse_experiment("linear-op") == Experiment::linear_op);
    CHECK(experiment_names().size() == 11);
    CHECK_THROWS_AS(load_config("/nonexistent/fracks.ini", Experiment::solve), ConfigError);
}

TEST_CASE("hypothesis violations are all reported") {
    const char* bad = "[model]\ntheta = 3\ntheta1 = 0\n[besov]\np = 1.1\nq = 1.1\n";
    try {
        parse_config_text(bad, Experiment::solve);
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        const std::string m = e.what();
        CHECK(m.find("theta < 1 + (n - theta1)/3") != std::string::npos);
        CHECK(m.find("6n/(5n + theta1)") != std::string::npos);
    }
    // the window only matters for experiments that use the model spaces
    CHECK_NOTHROW(parse_config_text("[model]\ntheta = 3\n", Experiment::ml_eval));
    CHECK_THROWS_WITH_AS(parse_config_text("[model]\ngamma = 0.1\n", Experiment::selfsim),
                         doctest::Contains("gamma = 0"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("[decay]\ns1 = 1\ns2 = 0\n", Experiment::decay_heat),
                         doctest::Contains("s1 <= s2"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("[decay]\nfamily = heat\n", Experiment::decay_ml),
                         doctest::Contains("E_alpha"), ConfigError);
}

TEST_CASE("solve with zero data passes") {
    const fs::path out = scratch("zero");
    RunConfig c = parse_config_text("[grid]\nn = 32\n[mesh]\nsteps = 8\n[data]\nkind = zero\n[ensemble]\nmembers = 2\n",
                                    Experiment::solve);
    c.output_dir = out.string();
    std::ostringstream log;
    const auto reports = run(c, log);
    REQUIRE(reports.size() == 3);
    CHECK(reports[0].check_id == "picard-contraction");
    CHECK(reports[0].verdict == Verdict::pass);
    CHECK(exit_status(reports) == 0);
    CHECK(log.str().find("PASS") == 0);
    for (const char* f : {"report.csv", "checks.json", "trace.csv", "eta_final.fkf", "v_final.fkf"})
        CHECK(fs::exists(out / "solve" / f));
}

TEST_CASE("exit status and anchors") {
    RatioReport ok, bad, unsure;
    ok.verdict = Verdict::pass;
    bad.verdict = Verdict::fail;
    unsure.verdict = Verdict::inconclusive;
    CHECK(exit_status({ok, unsure}) == 0);
    CHECK(exit_status({ok, bad}) == 1);
    CHECK(check_anchor("ml-oracle") == "plumbing");
    CHECK(check_anchor("something-else") == "plumbing");
    CHECK(check_anchor("bilinear-K") == "bilinear estimate");
}

TEST_CASE("report index") {
    const fs::path out = scratch("index");
    CHECK(report_index(out.string()) == 0);
    const std::string empty = slurp(out / "index.md");
    CHECK(empty.find("| result | check |") != std::string::npos);

    RunConfig c = parse_config_text("", Experiment::mainardi_moments);
    c.output_dir = out.string();
    std::ostringstream log;
    run(c, log);
    CHECK(report_index(out.string()) == 2);
    const std::string first = slurp(out / "index.md");
    CHECK(report_index(out.string()) == 2);
    CHECK(slurp(out / "index.md") == first);
    CHECK(first.find("mainardi-representation") != std::string::npos);
}

TEST_CASE("reports are deterministic for a fixed seed") {
    const char* text = "[grid]\nn = 32\n[ensemble]\nmembers = 4\n[run]\nseed = 5\n";
    std::string csv[2];
    for (int i = 0; i < 2; ++i) {
        const fs::path out = scratch("det" + std::to_string(i));
        RunConfig c = parse_config_text(text, Experiment::product);
        c.output_dir = out.string();
        std::ostringstream log;
        run(c, log);
        csv[i] = slurp(out / "product" / "report.csv");
    }
    CHECK(csv[0] == csv[1]);
    CHECK(csv[0].find(",5,1d-N64-") != std::string::npos);
}

TEST_CASE("gamma-shifted decay runs both signs and stays inconclusive") {
    const fs::path out = scratch("gamma");
    RunConfig c = parse_config_text(
        "[model]\nalpha = 0.7\ntheta = 1.5\ngamma = 1e-4\n[grid]\nn = 1024\nhalf_width = 64pi\n"
        "[decay]\nfamily = E_alpha\ns2 = 0.5\n",
        Experiment::decay_ml);
    c.output_dir = out.string();
    std::ostringstream log;
    const auto reports = run(c, log);
    REQUIRE(reports.size() == 2);
    for (const auto& r : reports) CHECK(r.verdict == Verdict::inconclusive);
    CHECK(exit_status(reports) == 0);
    CHECK(fs::exists(out / "decay-ml" / "decay-E_alpha-paper.svg"));
}
