#include "billiard/errors.hpp"
#include "billiard/harness.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

using billiard::ConfigError;
using billiard::ExperimentConfig;
using nlohmann::json;

namespace {

const char* kExperiments[] = {"validate-geometry", "orbit",   "tails",          "cells",
                              "stable-limit",      "poisson", "corr",           "selftest-stable",
                              "oracle-check",      "error-slope", "truncation"};

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dispersing-billiard simulator and statistical verification lab"};
    app.require_subcommand(1);

    std::string config_path, table_path, out_dir, trace_out, observable, mode;
    std::uint64_t seed = 0;
    bool have_seed = false;
    int workers = -1;
    long steps = -1;
    long m_override = -1;

    for (const char* name : kExperiments) {
        CLI::App* sub = app.add_subcommand(name, "");
        sub->add_option("--config", config_path, "experiment config JSON");
        sub->add_option("--table", table_path, "table JSON {beta, s1, theta0}");
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](const std::uint64_t& v) { seed = v; have_seed = true; }, "RNG seed");
        sub->add_option("--workers", workers, "worker threads (0 = runtime default)");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--steps", steps, "orbit length (orbit subcommand)");
        sub->add_option("--trace-out", trace_out, "orbit trace CSV path");
        sub->add_option("--observable", observable, "observable name (f0, f_smooth, f_rough)");
        sub->add_option("--mode", mode, "stable-limit mode: induced | full | both");
        sub->add_option("-m,--samples", m_override, "sample count / reps override");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        json cfg_json = json::object();
        if (!config_path.empty()) cfg_json = load_json_file(config_path);
        if (!table_path.empty()) cfg_json["table"] = load_json_file(table_path);

        ExperimentConfig cfg = billiard::config_from_json(cfg_json);
        cfg.experiment = app.get_subcommands().front()->get_name();
        if (have_seed) cfg.seed = seed;
        if (workers >= 0) cfg.workers = workers;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (steps >= 0) cfg.steps = steps;
        if (!trace_out.empty()) cfg.trace_out = trace_out;
        if (!observable.empty()) cfg.observable = observable;
        if (!mode.empty()) cfg.mode = mode;
        if (m_override >= 0) cfg.m = static_cast<std::size_t>(m_override);

        const billiard::ReportBundle bundle = billiard::run_experiment(cfg);
        std::cout << bundle.summary.dump(2) << std::endl;
        return bundle.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return 2;
    } catch (const billiard::Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 3;
    }
}
