#pragma once

#include <nlohmann/json.hpp>
#include <filesystem>
#include <optional>

#include "kgr/evolve.hpp"

// Experiment configuration, orchestration, persistence and plot-data
// emission. Config files are flat key = value text with [section] headers so
// every experiment stays reviewable in version control; results go to a JSON
// run record plus per-mode CSV tables, floats printed with 17 significant
// digits.

namespace kgr {

using Json = nlohmann::ordered_json;

struct RunOptions {
    std::vector<double> omega;  // empty: sampled deterministically from the seed
    double T = 50.0;
    double dtFactor = 0.1;      // dt = dtFactor / max(|omega|, lambda_J)
    std::vector<double> rlist = {0.0, 1.0, 2.0};
    int maxSteps = 12;
    double etaTol = 1e-12;
    int thetaSamples = 32;
    int mcCount = 4000;
    std::string set = "omega0";  // measure mode: omega0 | u_alpha | omega_inf
    std::vector<double> gammaList;
};

struct SweepOptions {
    std::string axis = "M";
    std::vector<double> values;
    std::string metric = "magnus_norm";  // magnus_norm | transf_norm
    double omegaFactor = 1.5;            // omega = factor * M * (1,..,1)/sqrt(nu)
};

struct ExperimentConfig {
    std::string mode = "magnus";  // magnus | kam | measure | evolve | sweep
    std::string output = "out";
    ModelConfig model;
    PotentialSpec potential;
    RunOptions run;
    SweepOptions sweep;

    void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& file);
std::string serialize_config(const ExperimentConfig& cfg);

// FNV-1a over the canonical serialization.
std::string config_hash(const ExperimentConfig& cfg);

struct CheckResult {
    std::string name;
    double value = 0;
    double threshold = 0;
    bool pass = false;
};

struct RunRecord {
    Json json;
    std::vector<CheckResult> checks;
    std::filesystem::path directory;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

// Dispatches the configured pipeline, writes record.json and the mode's CSV
// tables under the output directory (KG_REDUCE_OUTPUT_ROOT prefixes it when
// set), and returns the record.
RunRecord run(const ExperimentConfig& cfg);

// Re-derives a flat plot table from a stored record; returns the CSV path.
std::filesystem::path emit_plotdata(const std::filesystem::path& recordFile,
                                    const std::string& metric);

// 17-significant-digit float formatting used for all CSV output.
std::string fmt17(double x);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Through-origin fit y = s x; returns (slope, R^2) with R^2 = 1 - SSres/SSyy.
std::pair<double, double> fit_through_origin(const std::vector<double>& x,
                                             const std::vector<double>& y);

// Deterministic frequency choice: the explicit [run] omega when present,
// otherwise the first seeded annulus sample inside Omega_0 and U_alpha.
RVec resolve_omega(const ExperimentConfig& cfg);

}  // namespace kgr
