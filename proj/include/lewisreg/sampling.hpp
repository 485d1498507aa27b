#pragma once

// Label-oblivious sampling plans built from (approximate) Lewis weights, and
// their realization into sparse reweightings s. No function here accepts
// labels.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lewisreg/core.hpp"

namespace lewisreg {

enum class Scheme { bernoulli_l1, poisson_lp, uniform };

std::string to_string(Scheme scheme);
/// Accepts "bernoulli-l1", "poisson-lp", "uniform".
Scheme scheme_from_string(const std::string& name);

struct SamplePlan {
    Scheme scheme = Scheme::bernoulli_l1;
    Index n = 0;
    Index d = 0;
    /// Inclusion probability p_i (bernoulli, uniform) or Poisson rate
    /// lambda_i = m w'_i / d (poisson).
    DenseVector params;
    /// Oversampling threshold (bernoulli only).
    double u = 0.0;
    /// Target budget (poisson, uniform); expected support for bernoulli.
    double m = 0.0;
    double gamma = 1.0;

    double expected_support() const;
};

struct SketchEntry {
    Index row = 0;
    double weight = 0.0;

    bool operator==(const SketchEntry&) const = default;
};

/// Realized reweighting: rows absent from `entries` have s_i = 0.
struct Sketch {
    Index n = 0;
    /// Strictly increasing rows, positive weights.
    std::vector<SketchEntry> entries;
    std::uint64_t seed = 0;
    std::uint64_t plan_hash = 0;

    std::size_t support() const { return entries.size(); }
    DenseVector dense() const;
    std::vector<Index> rows() const;

    /// s = 1 on every row, so the weighted loss equals the full loss.
    static Sketch identity(Index n);
};

/// c_u eps^2 / ln(gamma d / (delta eps)), natural log.
double default_threshold(double gamma, double eps, double delta, Index d, double c_u);

/// c_m (gamma d^2 ln(d / (eps delta)) / eps^2 + gamma d^{2/p} / (eps^2 delta)).
double default_budget(double gamma, double eps, double delta, Index d, double p, double c_m);

/// Bernoulli plan: p_i = min(gamma w'_i / u, 1) with u from
/// default_threshold unless overridden. Rows with w'_i = 0 get p_i = 0.
SamplePlan plan_l1(const DenseVector& w_prime, double gamma, double eps, double delta, Index d,
                   std::optional<double> u_override = std::nullopt, double c_u = 1.0);

/// Poisson plan: s_i = (d / (m w'_i)) Poisson(m w'_i / d), with m from
/// default_budget unless overridden.
SamplePlan plan_lp(const DenseVector& w_prime, double gamma, double eps, double delta, Index d, double p,
                   std::optional<double> m_override = std::nullopt, double c_m = 1.0);

/// m rows uniformly without replacement, each with weight n / m.
SamplePlan plan_uniform(Index n, Index d, Index m);

/// Bernoulli threshold u giving an expected support of about m rows when the
/// weights sum to d: u = gamma d / m.
double threshold_for_support(double gamma, Index d, double m);

/// Deterministic in (plan, seed). Bernoulli and Poisson draws for row i come
/// from substream(seed, i), so the result does not depend on iteration order.
Sketch realize(const SamplePlan& plan, std::uint64_t seed);

/// mu + sqrt(2 mu ln(2/delta)) + ln(2/delta), mu = expected support.
double support_size_bound_real(const SamplePlan& plan, double delta);
/// Ceiling of support_size_bound_real.
Index support_size_bound(const SamplePlan& plan, double delta);

std::uint64_t plan_hash(const SamplePlan& plan);

} // namespace lewisreg
