#pragma once

#include "billiard/observables.hpp"
#include "billiard/stats.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace billiard {

// One experiment invocation. Fields not used by a given experiment are
// ignored; m == 0 picks the experiment's default sample count.
struct ExperimentConfig {
    TableParams table{};
    std::string experiment;
    std::string observable = "f0";
    nlohmann::json observable_spec; // inline piecewise-polynomial spec, optional
    std::vector<long> n_grid;
    std::size_t m = 0;
    double delta = 0.1;
    double eta_bar = 0.1;
    std::uint64_t seed = 1;
    int workers = 0; // 0 = BILLIARD_WORKERS env or OpenMP default
    std::string out_dir = ".";
    PrecisionPolicy precision{};
    ExecPolicy exec = ExecPolicy::openmp;

    long steps = 1000;          // orbit
    std::string trace_out;      // orbit
    std::string mode = "both";  // stable-limit: induced | full | both
    double k_frac = 0.002;      // tails: Hill order-statistic fraction
    std::size_t orbit_len = 10000000; // corr
    double interval_a = 1.0, interval_b = 2.0;   // poisson
    double interval_a2 = 3.0, interval_b2 = 4.0; // poisson, disjoint interval
};

// Parses and validates; throws ConfigError with a JSON pointer to the bad field.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);

struct CriterionResult {
    std::string id;   // acceptance criterion id, "C1".."C13"
    std::string name;
    bool pass = false;
    bool warn_only = false; // reported but never fails the run
    double value = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct ReportBundle {
    nlohmann::json summary;
    std::vector<CriterionResult> criteria;
    bool pass = true;
    int exit_code = 0;
};

// Dispatches to the named experiment, writes <experiment>.samples.csv,
// <experiment>.summary.json and <experiment>.plotdata.csv under out_dir, and
// returns the machine-readable summary.
ReportBundle run_experiment(const ExperimentConfig& cfg);

// Structural check of a summary against the published schema
// (docs/summary.schema.json).
bool validate_summary(const nlohmann::json& summary, std::string* error = nullptr);

Observable observable_from_config(const CuspTable& t, const ExperimentConfig& cfg);

std::string format_g17(double v);

int resolve_workers(int config_workers);

} // namespace billiard
