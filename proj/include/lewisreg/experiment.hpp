#pragma once

// Seeded end-to-end experiments: generate an instance, plan from its Lewis
// weights, query the sketch support, solve, and compare with the full-data
// minimizer. Reports serialize to a versioned JSON schema.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lewisreg/core.hpp"
#include "lewisreg/sampling.hpp"

namespace lewisreg {

inline constexpr const char* kReportSchema = "lewisreg.experiment/1";

struct ExperimentConfig {
    /// "random", "coherent" or "lower-bound"
    std::string family = "random";
    Index n = 20000;
    Index d = 10;
    double p = 1.0;
    double eps = 0.25;
    double delta = 0.1;
    Scheme scheme = Scheme::bernoulli_l1;
    double c_u = 1.0;
    double c_m = 1.0;
    /// Target support; overrides the default threshold / budget.
    std::optional<double> m;
    Index trials = 100;
    std::uint64_t seed = 0;
    std::string output;

    double noise_scale = 1.0;
    Index outliers = 1;
    double outlier_magnitude = 1e4;
    /// Label budget per trial; defaults to the high-probability support bound.
    std::optional<Index> budget;
    /// Random betas for the robust uniform convergence check; 0 disables it.
    int ruc_betas = 0;
    /// Pass criterion: fraction of trials with ratio <= 1 + eps / (1 - eps).
    double required_pass_fraction = 0.9;
    /// Reuse one instance (drawn from `seed`) and vary only the sketch.
    bool fixed_instance = false;
    int threads = 1;

    /// Throws ParameterError on an out-of-range field.
    void validate() const;
};

struct TrialRecord {
    Index trial = 0;
    std::uint64_t seed = 0;
    Index queries = 0;
    Index support = 0;
    /// Queried rows equal the sketch support exactly.
    bool ledger_matches_support = false;
    Index budget = 0;
    bool budget_exceeded = false;
    std::string status;
    /// L(beta~) / L(beta*)
    double objective_ratio = 0.0;
    bool pass = false;
    std::optional<double> ruc_corrected;
    std::optional<double> ruc_uncorrected;
    std::optional<double> ruc_delta;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<TrialRecord> trials;
    double ratio_bound = 0.0;
    double pass_fraction = 0.0;
    double median_ratio = 0.0;
    /// min, median, 90th percentile and max of the queries per trial
    std::vector<double> query_quantiles;
    std::optional<double> median_ruc_corrected;
    std::optional<double> ruc_pass_fraction;
    std::optional<double> uncorrected_fail_fraction;
    bool pass = true;
    std::string version;
    double wall_seconds = 0.0;
};

/// Named configurations: "l1-accept" and "lp-accept". Throws ParameterError
/// for an unknown name.
ExperimentConfig preset(const std::string& name);

ExperimentReport run_experiment(const ExperimentConfig& config);

enum class SweepAxis { m, eps, c_u };

SweepAxis sweep_axis_from_string(const std::string& name);
std::string to_string(SweepAxis axis);

/// One report per value; values must be sorted ascending.
std::vector<ExperimentReport> sweep(const ExperimentConfig& config, SweepAxis axis, const std::vector<double>& values);

/// Header plus one line per report: value, median_ratio, pass_fraction,
/// median_queries, median_ruc_corrected (empty when not measured).
std::string sweep_csv(SweepAxis axis, const std::vector<double>& values, const std::vector<ExperimentReport>& reports);

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrialRecord& record);
nlohmann::json to_json(const ExperimentReport& report);

/// Median of a copy of v; 0 for an empty vector.
double median(std::vector<double> v);
/// Linear-interpolated quantile, q in [0, 1].
double quantile(std::vector<double> v, double q);
/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace lewisreg
