#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "katolab/coefficients.hpp"
#include "katolab/grid.hpp"
#include "katolab/resolvent.hpp"
#include "katolab/sqrt_calculus.hpp"

namespace katolab {

// Experiment configuration and report emission.
//
// Config schema "katolab-config-v1" (JSON object):
//   schema       string, must equal "katolab-config-v1"
//   grid         {n, Nx, Nt, Lx, Lt}
//   coefficients {family, magnitude, seed, extra{...}}
//   solver       {rel_tol, max_iter, restart, precondition}
//   quadrature   {lambda_min, lambda_max, nodes}
//   suites       array of suite names, run in declared order
//   seed         integer, master sample seed
//   output       path prefix for emitted artifacts
//   workers      worker threads (KATOLAB_WORKERS env overrides)
//
// Report schema "katolab-report-v1" (JSON object):
//   schema, config (echo), environment (fingerprint), suites, timing.
//   Every asserted inequality appears under suites[].checks as
//   {name, lhs, rhs, tolerance, pass}; measured constants under
//   suites[].measured; per-suite CSV artifacts under suites[].tables and
//   plot-ready series under suites[].plots. The canonical payload is the
//   envelope with the timing block removed; it is bitwise deterministic
//   for a fixed (config, seed) regardless of worker count.

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    GridSpec grid;
    GeneratorSpec coefficients;
    SolverConfig solver;
    QuadratureSpec quadrature;
    std::vector<std::string> suites;
    std::uint64_t seed = 1;
    std::string output = "katolab";
    int workers = 1;
};

const std::vector<std::string>& known_suites();
void validate_config(const ExperimentConfig& cfg);  // throws ConfigError

std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);  // throws ConfigError

struct CheckRecord {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct PlotSeries {
    std::string name;
    std::vector<std::array<double, 2>> points;
};

struct SuiteResult {
    std::string suite;
    bool pass = true;
    std::string error;  // nonempty when the suite aborted; counts as failure
    std::vector<CheckRecord> checks;
    std::vector<std::pair<std::string, double>> measured;
    std::vector<std::pair<std::string, std::string>> tables;  // name -> CSV text
    std::vector<PlotSeries> plots;
};

struct ReportEnvelope {
    ExperimentConfig config;
    std::vector<std::pair<std::string, std::string>> environment;
    std::vector<SuiteResult> suites;
    std::vector<std::pair<std::string, double>> timing;  // seconds per suite

    bool all_pass() const;
};

// configured count unless KATOLAB_WORKERS is set; always >= 1
int effective_workers(int configured);

// Runs the configured suites in declared order. Suites are scheduled over a
// worker pool; each failure (assertion or exception) is recorded in its slot
// and never aborts the others. Deterministic given (config, seed).
ReportEnvelope run(const ExperimentConfig& cfg);

std::string report_to_json(const ReportEnvelope& env);
ReportEnvelope report_from_json(const std::string& text);

// JSON with the timing block removed: the determinism contract compares this
std::string canonical_payload(const ReportEnvelope& env);

// flattened per-measurement rows:
//   suite,kind,name,lhs,rhs,tolerance,pass,value
// kind is "check" or "measure"; numbers carry full round-trip precision
std::string flat_csv(const ReportEnvelope& env);

struct FlatRow {
    std::string suite, kind, name;
    double lhs = 0.0, rhs = 0.0, tolerance = 0.0, value = 0.0;
    int pass = 0;
};
std::vector<FlatRow> parse_flat_csv(const std::string& text);

// (x, y) series, one row per point: series,x,y
std::string plotdata_csv(const ReportEnvelope& env);

// formats: subset of {"json", "csv", "plotdata"}; returns the files written.
// Suite tables emit alongside as <prefix>_<suite>_<table>.csv when csv is on.
std::vector<std::string> emit(const ReportEnvelope& env,
                              const std::vector<std::string>& formats,
                              const std::string& prefix);

}  // namespace katolab
