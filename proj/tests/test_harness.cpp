#include "doctest.h"

#include "billiard/errors.hpp"
#include "billiard/harness.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace billiard;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string tmp_dir(const std::string& tag) {
    const std::string d = std::string("/tmp/billiard_test_") + tag;
    std::filesystem::remove_all(d);
    return d;
}

} // namespace

TEST_CASE("config parsing defaults and validation") {
    const ExperimentConfig c = config_from_json(json::object());
    CHECK(c.table.beta == 3.0);
    CHECK(c.table.s1 == 1.0);
    CHECK(c.seed == 1);
    CHECK(c.delta == 0.1);

    CHECK_THROWS_AS(config_from_json(json{{"table", {{"beta", "x"}}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"table", {{"beta", 1.5}}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"n_grid", {100, 50}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"n_grid", {5}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"delta", 2.0}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"k_frac", 0.2}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"exec", "gpu"}}), ConfigError);

    // json pointer appears in the message
    try {
        config_from_json(json{{"m", "many"}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("/m") != std::string::npos);
    }
}

TEST_CASE("validate-geometry experiment and summary schema") {
    ExperimentConfig cfg;
    cfg.experiment = "validate-geometry";
    cfg.out_dir = tmp_dir("vg");
    const ReportBundle b = run_experiment(cfg);
    CHECK(b.pass);
    CHECK(b.exit_code == 0);
    std::string err;
    CHECK(validate_summary(b.summary, &err));
    CHECK(std::filesystem::exists(cfg.out_dir + "/validate-geometry.summary.json"));
    CHECK(std::filesystem::exists(cfg.out_dir + "/validate-geometry.samples.csv"));
    CHECK(std::filesystem::exists(cfg.out_dir + "/validate-geometry.plotdata.csv"));

    // summary on disk parses and validates too
    json loaded = json::parse(slurp(cfg.out_dir + "/validate-geometry.summary.json"));
    CHECK(validate_summary(loaded, &err));
}

TEST_CASE("orbit experiment writes a trace") {
    ExperimentConfig cfg;
    cfg.experiment = "orbit";
    cfg.steps = 250;
    cfg.seed = 5;
    cfg.out_dir = tmp_dir("orbit");
    cfg.trace_out = cfg.out_dir + "/trace.csv";
    const ReportBundle b = run_experiment(cfg);
    CHECK(b.pass);
    const std::string trace = slurp(cfg.trace_out);
    // header + 250 rows
    CHECK(std::count(trace.begin(), trace.end(), '\n') == 251);
    CHECK(trace.rfind("step,component,r,phi,tau", 0) == 0);
}

TEST_CASE("experiment reruns are byte-identical across worker counts") {
    ExperimentConfig cfg;
    cfg.experiment = "tails";
    cfg.m = 30000;
    cfg.seed = 99;
    cfg.workers = 1;
    cfg.out_dir = tmp_dir("det1");
    run_experiment(cfg);
    ExperimentConfig cfg2 = cfg;
    cfg2.workers = 2;
    cfg2.out_dir = tmp_dir("det2");
    run_experiment(cfg2);
    CHECK(slurp(cfg.out_dir + "/tails.samples.csv") == slurp(cfg2.out_dir + "/tails.samples.csv"));
    CHECK(slurp(cfg.out_dir + "/tails.plotdata.csv") ==
          slurp(cfg2.out_dir + "/tails.plotdata.csv"));
}

TEST_CASE("insufficient data is recorded, not thrown") {
    ExperimentConfig cfg;
    cfg.experiment = "tails";
    cfg.m = 10;
    cfg.out_dir = tmp_dir("insuff");
    const ReportBundle b = run_experiment(cfg);
    CHECK_FALSE(b.pass);
    CHECK(b.exit_code != 0);
    CHECK(b.summary["results"].contains("error"));
}

TEST_CASE("stable-limit smoke run emits criteria and samples") {
    ExperimentConfig cfg;
    cfg.experiment = "stable-limit";
    cfg.observable = "f0";
    cfg.mode = "induced";
    cfg.m = 400;
    cfg.n_grid = {100, 400};
    cfg.seed = 7;
    cfg.out_dir = tmp_dir("sl");
    const ReportBundle b = run_experiment(cfg);
    REQUIRE(b.criteria.size() == 1);
    CHECK(b.criteria[0].id == "C8");
    std::string err;
    CHECK(validate_summary(b.summary, &err));
    const std::string csv = slurp(cfg.out_dir + "/stable-limit.samples.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 400);
}

TEST_CASE("custom piecewise-polynomial observable") {
    ExperimentConfig cfg;
    cfg.observable_spec = json::parse(R"({
        "id": "poly",
        "gamma": 1.0,
        "pieces": [
            {"component": "Gamma3", "r_range": [1.0, 1.8], "coeffs": [[0.0, 1.0]]}
        ]
    })");
    const CuspTable t = build_table(cfg.table);
    const Observable f = observable_from_config(t, cfg);
    CHECK(f.centered);
    // raw value at (Gamma3, r=1.4, phi=0.7) is 0 + 1*phi = 0.7, minus the mean
    const double v = f.eval(Component::Gamma3, 1.4, 0.7);
    CHECK(v == doctest::Approx(0.7 - f.mu_mean).epsilon(1e-9));
    // outside the piece the raw value vanishes
    CHECK(f.eval(Component::Gamma1, 0.3, 0.7) == doctest::Approx(-f.mu_mean).epsilon(1e-12));

    ExperimentConfig bad;
    bad.observable_spec = json::parse(R"({"pieces": [{"component": "GammaX", "r_range": [0,1], "coeffs": [[1]]}]})");
    CHECK_THROWS_AS(observable_from_config(t, bad), ConfigError);
}

TEST_CASE("summary schema validator rejects malformed input") {
    json bad = {{"experiment", 5}};
    std::string err;
    CHECK_FALSE(validate_summary(bad, &err));
    json missing = {{"experiment", "tails"}};
    CHECK_FALSE(validate_summary(missing, &err));
}
