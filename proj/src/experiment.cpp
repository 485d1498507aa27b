#include "lewisreg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include "lewisreg/instances.hpp"
#include "lewisreg/lewis.hpp"
#include "lewisreg/oracle.hpp"
#include "lewisreg/random.hpp"
#include "lewisreg/solvers.hpp"
#include "lewisreg/verify.hpp"

#ifndef LEWISREG_VERSION
#define LEWISREG_VERSION "0.0.0"
#endif

namespace lewisreg {

void ExperimentConfig::validate() const
{
    if (family != "random" && family != "coherent" && family != "lower-bound")
        throw ParameterError("unknown family '" + family + "'");
    if (d < 1 || n < d)
        throw ParameterError("need n >= d >= 1");
    if (family == "lower-bound" && n % d != 0)
        throw ParameterError("lower-bound family needs d to divide n");
    if (!(p >= 1.0 && p <= 2.0))
        throw ParameterError("p must lie in [1, 2]");
    if (family == "lower-bound" && p != 1.0)
        throw ParameterError("lower-bound family is defined for p = 1");
    if (scheme == Scheme::bernoulli_l1 && p != 1.0)
        throw ParameterError("bernoulli-l1 needs p = 1");
    if (scheme == Scheme::poisson_lp && p == 1.0)
        throw ParameterError("poisson-lp needs p in (1, 2]");
    if (!(eps > 0.0 && eps < 1.0))
        throw ParameterError("eps must lie in (0, 1)");
    if (family == "lower-bound" && eps > 0.5)
        throw ParameterError("lower-bound family needs eps <= 1/2");
    if (!(delta > 0.0 && delta < 1.0))
        throw ParameterError("delta must lie in (0, 1)");
    if (!(c_u > 0.0) || !(c_m > 0.0))
        throw ParameterError("c_u and c_m must be positive");
    if (m && !(*m >= 1.0))
        throw ParameterError("m must be at least 1");
    if (trials < 0)
        throw ParameterError("trials must be non-negative");
    if (!(noise_scale >= 0.0) || !(outlier_magnitude >= 0.0))
        throw ParameterError("noise scale and outlier magnitude must be non-negative");
    if (outliers < 0 || outliers > n)
        throw ParameterError("outlier count out of range");
    if (budget && *budget < 0)
        throw ParameterError("budget must be non-negative");
    if (ruc_betas < 0)
        throw ParameterError("ruc_betas must be non-negative");
    if (!(required_pass_fraction >= 0.0 && required_pass_fraction <= 1.0))
        throw ParameterError("required_pass_fraction must lie in [0, 1]");
    if (threads < 1)
        throw ParameterError("threads must be at least 1");
}

ExperimentConfig preset(const std::string& name)
{
    ExperimentConfig c;
    if (name == "l1-accept") {
        c.family = "random";
        c.n = 20000;
        c.d = 10;
        c.p = 1.0;
        c.eps = 0.25;
        c.delta = 0.1;
        c.scheme = Scheme::bernoulli_l1;
        c.c_u = 1.0;
        c.outliers = 1;
        c.outlier_magnitude = 1e4;
        c.budget = 1500;
        c.trials = 100;
        c.required_pass_fraction = 0.9;
        return c;
    }
    if (name == "lp-accept") {
        c.family = "random";
        c.n = 20000;
        c.d = 6;
        c.p = 1.5;
        c.eps = 0.3;
        c.delta = 0.1;
        c.scheme = Scheme::poisson_lp;
        c.c_m = 0.25;
        c.outliers = 0;
        c.trials = 100;
        c.required_pass_fraction = 0.85;
        return c;
    }
    throw ParameterError("unknown preset '" + name + "'");
}

namespace {

struct Prepared {
    RegressionInstance instance;
    LewisWeights lewis;
    DenseVector beta_star;
    double full_star = 0.0;
};

Prepared prepare(const ExperimentConfig& c, std::uint64_t seed)
{
    auto make = [&]() -> RegressionInstance {
        if (c.family == "lower-bound")
            return gen_lower_bound(c.n, c.d, std::min(c.eps, 0.5), std::nullopt, seed).instance;
        const NoiseSpec noise{c.noise_scale > 0.0 ? NoiseKind::gaussian : NoiseKind::none, c.noise_scale};
        return gen_random(c.n, c.d, c.p, noise, {c.outliers, c.outlier_magnitude}, seed, c.family == "coherent")
            .instance;
    };
    RegressionInstance inst = make();
    LewisWeights lw = lewis_weights(inst.A(), inst.p());
    const DenseVector ones = DenseVector::Ones(inst.rows());
    const SolveResult full = solve_weighted(inst.A(), inst.reveal_for_analysis(), ones, inst.p());
    return {std::move(inst), std::move(lw), full.beta, full.objective};
}

SamplePlan make_plan(const ExperimentConfig& c, const Prepared& prep)
{
    const auto& lw = prep.lewis;
    switch (c.scheme) {
    case Scheme::bernoulli_l1: {
        std::optional<double> u;
        if (c.m)
            u = threshold_for_support(lw.gamma, c.d, *c.m);
        return plan_l1(lw.w, lw.gamma, c.eps, c.delta, c.d, u, c.c_u);
    }
    case Scheme::poisson_lp:
        return plan_lp(lw.w, lw.gamma, c.eps, c.delta, c.d, c.p, c.m, c.c_m);
    case Scheme::uniform: {
        double m = c.m ? *c.m : plan_l1(lw.w, lw.gamma, c.eps, c.delta, c.d, std::nullopt, c.c_u).expected_support();
        return plan_uniform(c.n, c.d, std::clamp<Index>(Index(std::ceil(m)), 1, c.n));
    }
    }
    throw ParameterError("unknown scheme");
}

TrialRecord run_trial(const ExperimentConfig& c, Index t, const Prepared* shared)
{
    TrialRecord rec;
    rec.trial = t;
    rec.seed = derive_seed(c.seed, std::uint64_t(t));
    std::optional<Prepared> own;
    if (!shared)
        own.emplace(prepare(c, rec.seed));
    const Prepared& prep = shared ? *shared : *own;

    const SamplePlan plan = make_plan(c, prep);
    const Index budget = c.budget ? *c.budget : support_size_bound(plan, c.delta);
    rec.budget = budget;
    const std::uint64_t sketch_seed = derive_seed(rec.seed, 1);
    try {
        ActiveSolveResult res = active_solve(prep.instance, plan, sketch_seed, budget);
        rec.queries = res.ledger.size();
        rec.support = Index(res.sketch.support());
        rec.ledger_matches_support = res.ledger.queried() == res.sketch.rows();
        rec.status = to_string(res.solve.status);
        const double loss = lp_loss(prep.instance.A(), prep.instance.reveal_for_analysis(), res.solve.beta,
                                    prep.instance.p());
        rec.objective_ratio = prep.full_star > 0.0 ? loss / prep.full_star : (loss == 0.0 ? 1.0 : HUGE_VAL);
        rec.pass = rec.objective_ratio <= approx_transfer_bound(c.eps);
        if (c.ruc_betas > 0) {
            BetaSampling sampling;
            sampling.betas = c.ruc_betas;
            sampling.delta = c.delta;
            sampling.seed = derive_seed(rec.seed, 2);
            const RucReport ruc = ruc_check(prep.instance, res.sketch, prep.beta_star, sampling, c.eps);
            rec.ruc_corrected = ruc.max_rel_violation.front();
            rec.ruc_uncorrected = ruc.max_uncorrected.front();
            rec.ruc_delta = ruc.delta_value.front();
        }
    } catch (const BudgetExceeded&) {
        rec.budget_exceeded = true;
        rec.queries = budget;
        rec.status = "budget_exceeded";
        rec.objective_ratio = HUGE_VAL;
        rec.pass = false;
    }
    return rec;
}

} // namespace

ExperimentReport run_experiment(const ExperimentConfig& config)
{
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    ExperimentReport rep;
    rep.config = config;
    rep.version = LEWISREG_VERSION;
    rep.ratio_bound = approx_transfer_bound(config.eps);

    std::optional<Prepared> shared;
    if (config.fixed_instance && config.trials > 0)
        shared.emplace(prepare(config, config.seed));

    rep.trials.resize(std::size_t(config.trials));
    std::atomic<Index> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
        for (Index t = next++; t < config.trials && !failed; t = next++) {
            try {
                rep.trials[std::size_t(t)] = run_trial(config, t, shared ? &*shared : nullptr);
            } catch (...) {
                if (!failed.exchange(true))
                    failure = std::current_exception();
            }
        }
    };
    const int nthreads = int(std::min<Index>(config.threads, std::max<Index>(config.trials, 1)));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int k = 0; k < nthreads; ++k)
            pool.emplace_back(worker);
    }
    if (failure)
        std::rethrow_exception(failure);

    std::vector<double> ratios, queries, corrected;
    Index passes = 0, ruc_passes = 0, unc_fails = 0;
    for (const auto& r : rep.trials) {
        ratios.push_back(r.objective_ratio);
        queries.push_back(double(r.queries));
        passes += r.pass;
        if (r.ruc_corrected) {
            corrected.push_back(*r.ruc_corrected);
            ruc_passes += *r.ruc_corrected <= config.eps;
            unc_fails += *r.ruc_uncorrected > config.eps;
        }
    }
    if (!rep.trials.empty()) {
        rep.pass_fraction = double(passes) / double(rep.trials.size());
        rep.median_ratio = median(ratios);
        rep.query_quantiles = {quantile(queries, 0.0), quantile(queries, 0.5), quantile(queries, 0.9),
                               quantile(queries, 1.0)};
        rep.pass = rep.pass_fraction >= config.required_pass_fraction;
    }
    if (!corrected.empty()) {
        rep.median_ruc_corrected = median(corrected);
        rep.ruc_pass_fraction = double(ruc_passes) / double(corrected.size());
        rep.uncorrected_fail_fraction = double(unc_fails) / double(corrected.size());
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

SweepAxis sweep_axis_from_string(const std::string& name)
{
    if (name == "m")
        return SweepAxis::m;
    if (name == "eps")
        return SweepAxis::eps;
    if (name == "c_u" || name == "c-u")
        return SweepAxis::c_u;
    throw ParameterError("unknown sweep axis '" + name + "'");
}

std::string to_string(SweepAxis axis)
{
    switch (axis) {
    case SweepAxis::m: return "m";
    case SweepAxis::eps: return "eps";
    case SweepAxis::c_u: return "c_u";
    }
    return "?";
}

std::vector<ExperimentReport> sweep(const ExperimentConfig& config, SweepAxis axis, const std::vector<double>& values)
{
    if (!std::is_sorted(values.begin(), values.end()))
        throw ParameterError("sweep values must be sorted ascending");
    std::vector<ExperimentReport> out;
    for (double v : values) {
        ExperimentConfig c = config;
        switch (axis) {
        case SweepAxis::m: c.m = v; break;
        case SweepAxis::eps: c.eps = v; break;
        case SweepAxis::c_u: c.c_u = v; break;
        }
        out.push_back(run_experiment(c));
    }
    return out;
}

std::string sweep_csv(SweepAxis axis, const std::vector<double>& values, const std::vector<ExperimentReport>& reports)
{
    if (values.size() != reports.size())
        throw DimensionMismatch("sweep_csv: one report per value expected");
    std::ostringstream out;
    out.precision(10);
    out << to_string(axis) << ",median_ratio,pass_fraction,median_queries,median_ruc_corrected\n";
    for (std::size_t k = 0; k < values.size(); ++k) {
        const auto& r = reports[k];
        out << values[k] << ',' << r.median_ratio << ',' << r.pass_fraction << ','
            << (r.query_quantiles.empty() ? 0.0 : r.query_quantiles[1]) << ',';
        if (r.median_ruc_corrected)
            out << *r.median_ruc_corrected;
        out << '\n';
    }
    return out.str();
}

nlohmann::json to_json(const ExperimentConfig& c)
{
    nlohmann::json j{{"family", c.family},
                     {"n", c.n},
                     {"d", c.d},
                     {"p", c.p},
                     {"eps", c.eps},
                     {"delta", c.delta},
                     {"scheme", to_string(c.scheme)},
                     {"c_u", c.c_u},
                     {"c_m", c.c_m},
                     {"trials", c.trials},
                     {"seed", c.seed},
                     {"output", c.output},
                     {"noise_scale", c.noise_scale},
                     {"outliers", c.outliers},
                     {"outlier_magnitude", c.outlier_magnitude},
                     {"ruc_betas", c.ruc_betas},
                     {"required_pass_fraction", c.required_pass_fraction},
                     {"fixed_instance", c.fixed_instance},
                     {"threads", c.threads}};
    j["m"] = c.m ? nlohmann::json(*c.m) : nlohmann::json(nullptr);
    j["budget"] = c.budget ? nlohmann::json(*c.budget) : nlohmann::json(nullptr);
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j)
{
    ExperimentConfig c;
    auto get = [&j](const char* key, auto& field) {
        if (j.contains(key) && !j.at(key).is_null())
            field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("family", c.family);
    get("n", c.n);
    get("d", c.d);
    get("p", c.p);
    get("eps", c.eps);
    get("delta", c.delta);
    if (j.contains("scheme"))
        c.scheme = scheme_from_string(j.at("scheme").get<std::string>());
    get("c_u", c.c_u);
    get("c_m", c.c_m);
    get("trials", c.trials);
    get("seed", c.seed);
    get("output", c.output);
    get("noise_scale", c.noise_scale);
    get("outliers", c.outliers);
    get("outlier_magnitude", c.outlier_magnitude);
    get("ruc_betas", c.ruc_betas);
    get("required_pass_fraction", c.required_pass_fraction);
    get("fixed_instance", c.fixed_instance);
    get("threads", c.threads);
    if (j.contains("m") && !j.at("m").is_null())
        c.m = j.at("m").get<double>();
    if (j.contains("budget") && !j.at("budget").is_null())
        c.budget = j.at("budget").get<Index>();
    return c;
}

nlohmann::json to_json(const TrialRecord& r)
{
    auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
    nlohmann::json j{{"trial", r.trial},
                     {"seed", r.seed},
                     {"queries", r.queries},
                     {"support", r.support},
                     {"ledger_matches_support", r.ledger_matches_support},
                     {"budget", r.budget},
                     {"budget_exceeded", r.budget_exceeded},
                     {"status", r.status},
                     {"objective_ratio", num(r.objective_ratio)},
                     {"pass", r.pass}};
    if (r.ruc_corrected) {
        j["ruc_corrected"] = num(*r.ruc_corrected);
        j["ruc_uncorrected"] = num(*r.ruc_uncorrected);
        j["ruc_delta"] = num(*r.ruc_delta);
    }
    return j;
}

nlohmann::json to_json(const ExperimentReport& r)
{
    nlohmann::json trials = nlohmann::json::array();
    for (const auto& t : r.trials)
        trials.push_back(to_json(t));
    nlohmann::json agg{{"ratio_bound", r.ratio_bound},
                       {"pass_fraction", r.pass_fraction},
                       {"median_ratio", std::isfinite(r.median_ratio) ? nlohmann::json(r.median_ratio) : nullptr},
                       {"query_quantiles", r.query_quantiles}};
    if (r.median_ruc_corrected) {
        agg["median_ruc_corrected"] = *r.median_ruc_corrected;
        agg["ruc_pass_fraction"] = *r.ruc_pass_fraction;
        agg["uncorrected_fail_fraction"] = *r.uncorrected_fail_fraction;
    }
    return {{"schema", kReportSchema},
            {"version", r.version},
            {"config", to_json(r.config)},
            {"trials", trials},
            {"aggregates", agg},
            {"pass", r.pass},
            {"wall_seconds", r.wall_seconds}};
}

double median(std::vector<double> v)
{
    return quantile(std::move(v), 0.5);
}

double quantile(std::vector<double> v, double q)
{
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = std::clamp(q, 0.0, 1.0) * double(v.size() - 1);
    const auto lo = std::size_t(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - double(lo);
    if (frac == 0.0 || v[lo] == v[hi])
        return v[lo];
    return v[lo] + frac * (v[hi] - v[lo]);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw DimensionMismatch("loglog_slope: need two or more paired points");
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += std::log(x[k]);
        my += std::log(y[k]);
    }
    mx /= double(x.size());
    my /= double(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double dx = std::log(x[k]) - mx;
        sxy += dx * (std::log(y[k]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

} // namespace lewisreg
