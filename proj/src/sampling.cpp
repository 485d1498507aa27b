#include "lewisreg/sampling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "lewisreg/random.hpp"

namespace lewisreg {

std::string to_string(Scheme scheme)
{
    switch (scheme) {
    case Scheme::bernoulli_l1: return "bernoulli-l1";
    case Scheme::poisson_lp: return "poisson-lp";
    case Scheme::uniform: return "uniform";
    }
    return "unknown";
}

Scheme scheme_from_string(const std::string& name)
{
    if (name == "bernoulli-l1")
        return Scheme::bernoulli_l1;
    if (name == "poisson-lp")
        return Scheme::poisson_lp;
    if (name == "uniform")
        return Scheme::uniform;
    throw ParameterError("unknown sampling scheme '" + name + "'");
}

double SamplePlan::expected_support() const
{
    switch (scheme) {
    case Scheme::bernoulli_l1:
    case Scheme::uniform:
        return params.sum();
    case Scheme::poisson_lp:
        return (1.0 - (-params.array()).exp()).sum();
    }
    return 0.0;
}

DenseVector Sketch::dense() const
{
    DenseVector s = DenseVector::Zero(n);
    for (const auto& e : entries)
        s(e.row) = e.weight;
    return s;
}

std::vector<Index> Sketch::rows() const
{
    std::vector<Index> out;
    out.reserve(entries.size());
    for (const auto& e : entries)
        out.push_back(e.row);
    return out;
}

Sketch Sketch::identity(Index n)
{
    Sketch s;
    s.n = n;
    s.entries.reserve(std::size_t(n));
    for (Index i = 0; i < n; ++i)
        s.entries.push_back({i, 1.0});
    return s;
}

namespace {

void check_common(const DenseVector& w_prime, double gamma, double eps, double delta, Index d)
{
    if (!(gamma >= 1.0))
        throw ParameterError("gamma must be >= 1");
    if (!(eps > 0.0 && eps < 1.0))
        throw ParameterError("eps must lie in (0, 1)");
    if (!(delta > 0.0 && delta < 1.0))
        throw ParameterError("delta must lie in (0, 1)");
    if (d < 1)
        throw ParameterError("d must be positive");
    for (Index i = 0; i < w_prime.size(); ++i)
        if (!(w_prime(i) >= 0.0) || !std::isfinite(w_prime(i)))
            throw ParameterError("approximate Lewis weights must be finite and non-negative");
}

} // namespace

double default_threshold(double gamma, double eps, double delta, Index d, double c_u)
{
    return c_u * eps * eps / std::log(gamma * double(d) / (delta * eps));
}

double default_budget(double gamma, double eps, double delta, Index d, double p, double c_m)
{
    const double dd = double(d);
    return c_m * (gamma * dd * dd * std::log(dd / (eps * delta)) / (eps * eps) +
                  gamma * std::pow(dd, 2.0 / p) / (eps * eps * delta));
}

double threshold_for_support(double gamma, Index d, double m)
{
    if (!(m > 0.0))
        throw ParameterError("target support must be positive");
    return gamma * double(d) / m;
}

SamplePlan plan_l1(const DenseVector& w_prime, double gamma, double eps, double delta, Index d,
                   std::optional<double> u_override, double c_u)
{
    check_common(w_prime, gamma, eps, delta, d);
    const double u = u_override ? *u_override : default_threshold(gamma, eps, delta, d, c_u);
    if (!(u > 0.0) || !std::isfinite(u))
        throw ParameterError("oversampling threshold u must be positive, got " + std::to_string(u));
    SamplePlan plan;
    plan.scheme = Scheme::bernoulli_l1;
    plan.n = w_prime.size();
    plan.d = d;
    plan.u = u;
    plan.gamma = gamma;
    plan.params = (gamma * w_prime / u).cwiseMin(1.0);
    plan.m = plan.params.sum();
    return plan;
}

SamplePlan plan_lp(const DenseVector& w_prime, double gamma, double eps, double delta, Index d, double p,
                   std::optional<double> m_override, double c_m)
{
    check_common(w_prime, gamma, eps, delta, d);
    if (!(p > 1.0 && p <= 2.0))
        throw DomainError("plan_lp: p must lie in (1, 2]");
    const double m = m_override ? *m_override : default_budget(gamma, eps, delta, d, p, c_m);
    if (!(m > 0.0) || !std::isfinite(m))
        throw ParameterError("budget m must be positive, got " + std::to_string(m));
    SamplePlan plan;
    plan.scheme = Scheme::poisson_lp;
    plan.n = w_prime.size();
    plan.d = d;
    plan.m = m;
    plan.gamma = gamma;
    plan.params = (m / double(d)) * w_prime;
    return plan;
}

SamplePlan plan_uniform(Index n, Index d, Index m)
{
    if (m < 1 || m > n)
        throw ParameterError("uniform plan: need 1 <= m <= n");
    SamplePlan plan;
    plan.scheme = Scheme::uniform;
    plan.n = n;
    plan.d = d;
    plan.m = double(m);
    plan.params = DenseVector::Constant(n, double(m) / double(n));
    return plan;
}

Sketch realize(const SamplePlan& plan, std::uint64_t seed)
{
    Sketch sk;
    sk.n = plan.n;
    sk.seed = seed;
    sk.plan_hash = plan_hash(plan);
    switch (plan.scheme) {
    case Scheme::bernoulli_l1:
        for (Index i = 0; i < plan.n; ++i) {
            const double pi = plan.params(i);
            if (pi <= 0.0)
                continue;
            if (pi >= 1.0) {
                sk.entries.push_back({i, 1.0});
                continue;
            }
            SplitMix64 rng = substream(seed, std::uint64_t(i));
            if (rng.uniform() < pi)
                sk.entries.push_back({i, 1.0 / pi});
        }
        break;
    case Scheme::poisson_lp:
        for (Index i = 0; i < plan.n; ++i) {
            const double lambda = plan.params(i);
            if (lambda <= 0.0)
                continue;
            SplitMix64 rng = substream(seed, std::uint64_t(i));
            const std::uint64_t k = rng.poisson(lambda);
            if (k > 0)
                sk.entries.push_back({i, double(k) / lambda});
        }
        break;
    case Scheme::uniform: {
        const auto m = Index(std::llround(plan.m));
        std::vector<Index> idx(std::size_t(plan.n));
        std::iota(idx.begin(), idx.end(), Index(0));
        SplitMix64 rng(mix64(seed));
        for (Index k = 0; k < m; ++k) {
            const auto j = Index(k + Index(rng.below(std::uint64_t(plan.n - k))));
            std::swap(idx[std::size_t(k)], idx[std::size_t(j)]);
        }
        idx.resize(std::size_t(m));
        std::sort(idx.begin(), idx.end());
        const double weight = double(plan.n) / double(m);
        for (Index i : idx)
            sk.entries.push_back({i, weight});
        break;
    }
    }
    return sk;
}

double support_size_bound_real(const SamplePlan& plan, double delta)
{
    if (!(delta > 0.0 && delta < 1.0))
        throw ParameterError("delta must lie in (0, 1)");
    const double mu = plan.expected_support();
    const double log_term = std::log(2.0 / delta);
    return mu + std::sqrt(2.0 * mu * log_term) + log_term;
}

Index support_size_bound(const SamplePlan& plan, double delta)
{
    return Index(std::ceil(support_size_bound_real(plan, delta)));
}

std::uint64_t plan_hash(const SamplePlan& plan)
{
    // FNV-1a over the fields that determine the realization.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto feed = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    feed(std::uint64_t(plan.scheme));
    feed(std::uint64_t(plan.n));
    feed(std::uint64_t(plan.d));
    feed(std::bit_cast<std::uint64_t>(plan.u));
    feed(std::bit_cast<std::uint64_t>(plan.m));
    for (Index i = 0; i < plan.params.size(); ++i)
        feed(std::bit_cast<std::uint64_t>(plan.params(i)));
    return h;
}

} // namespace lewisreg
