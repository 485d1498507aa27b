#include "lewisreg/lewis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lewisreg/random.hpp"
#include "lewisreg/solvers.hpp"

namespace lewisreg {

std::string to_string(ImportanceMethod method)
{
    return method == ImportanceMethod::closed_form_1d ? "closed-form-1d" : "multistart-ascent";
}

namespace {

/// log of |a^T beta|^p / ||A beta||_p^p; -inf when the numerator vanishes.
double log_ratio(const DenseMatrix& A, const DenseVector& a, const DenseVector& beta, double p)
{
    const double num = std::abs(a.dot(beta));
    const double den = lp_energy((A * beta).eval(), p);
    if (num == 0.0 || den == 0.0)
        return -std::numeric_limits<double>::infinity();
    return p * std::log(num) - std::log(den);
}

/// Projected gradient ascent of the log ratio on the unit sphere with a
/// backtracking step. Returns the best log ratio reached.
double ascend(const DenseMatrix& A, const DenseVector& a, DenseVector beta, double p, int max_steps)
{
    beta.normalize();
    double value = log_ratio(A, a, beta, p);
    if (!std::isfinite(value))
        return value;
    double step = 0.5;
    for (int it = 0; it < max_steps; ++it) {
        const DenseVector Ab = A * beta;
        const double ab = a.dot(beta);
        double energy = 0.0;
        DenseVector g_den = DenseVector::Zero(A.cols());
        for (Index j = 0; j < Ab.size(); ++j) {
            if (Ab(j) == 0.0)
                continue;
            const double mag = std::abs(Ab(j));
            energy += abs_pow(mag, p);
            g_den += (p * std::pow(mag, p - 1.0) * sign(Ab(j))) * A.row(j).transpose();
        }
        DenseVector grad = (p / ab) * a - g_den / energy;
        grad -= grad.dot(beta) * beta;
        const double gnorm = grad.norm();
        if (!(gnorm > 1e-14))
            break;
        bool improved = false;
        while (step > 1e-14) {
            const DenseVector trial = (beta + (step / gnorm) * grad).normalized();
            const double tv = log_ratio(A, a, trial, p);
            if (tv > value) {
                improved = tv - value > 1e-15 * std::max(1.0, std::abs(value));
                beta = trial;
                value = tv;
                step = std::min(1.0, 2.0 * step);
                break;
            }
            step *= 0.5;
        }
        if (!improved)
            break;
    }
    return value;
}

} // namespace

double importance_weight_oracle(const DenseMatrix& A, double p, Index row, int starts, std::uint64_t seed)
{
    require_p_in_range(p);
    if (row < 0 || row >= A.rows())
        throw IndexError("importance_weight_oracle: row " + std::to_string(row) + " out of range");
    const DenseVector a = A.row(row).transpose();
    if (a.cwiseAbs().maxCoeff() == 0.0)
        return 0.0;
    const Index d = A.cols();
    if (d == 1) {
        const double total = lp_energy(A.col(0), p);
        return abs_pow(a(0), p) / total;
    }

    constexpr int kSteps = 300;
    double best = ascend(A, a, a, p, kSteps);
    try {
        const DenseVector convex = maximize_linear_over_lp_ball(A, a, p);
        best = std::max(best, ascend(A, a, convex, p, kSteps));
    } catch (const DegenerateInput&) {
        // rank-deficient A: the remaining starts still give a valid lower bound
    }
    SplitMix64 rng = substream(seed, std::uint64_t(row));
    for (int k = 0; k < starts; ++k) {
        DenseVector beta(d);
        for (Index j = 0; j < d; ++j)
            beta(j) = rng.normal();
        if (beta.norm() == 0.0)
            continue;
        best = std::max(best, ascend(A, a, beta, p, kSteps));
    }
    return std::isfinite(best) ? std::min(1.0, std::exp(best)) : 0.0;
}

ImportanceWeights importance_weights(const DenseMatrix& A, double p, int starts, std::uint64_t seed)
{
    ImportanceWeights out;
    out.p = p;
    out.starts = starts;
    out.method = A.cols() == 1 ? ImportanceMethod::closed_form_1d : ImportanceMethod::multistart_ascent;
    out.u.resize(A.rows());
    for (Index i = 0; i < A.rows(); ++i)
        out.u(i) = importance_weight_oracle(A, p, i, starts, seed);
    return out;
}

SandwichReport sandwich_check(const DenseMatrix& A, double p, const LewisWeights& lw, const ImportanceWeights& iw,
                              double slack)
{
    if (!lw.converged)
        throw PreconditionError("sandwich_check: Lewis weights did not converge");
    if (lw.w.size() != A.rows() || iw.u.size() != A.rows())
        throw DimensionMismatch("sandwich_check: weight vectors do not match A");
    SandwichReport rep;
    rep.p = p;
    rep.slack = slack;
    rep.min_lower_ratio = std::numeric_limits<double>::infinity();
    const double shrink = std::pow(double(A.cols()), -(1.0 - p / 2.0));
    for (Index i = 0; i < A.rows(); ++i) {
        const double w = lw.w(i);
        const double u = iw.u(i);
        if (w == 0.0)
            continue;
        ++rep.rows_checked;
        const double lower = shrink * w;
        rep.min_lower_ratio = std::min(rep.min_lower_ratio, u / lower);
        rep.max_upper_ratio = std::max(rep.max_upper_ratio, u / w);
        if (u < lower * (1.0 - slack))
            rep.violations.push_back({i, u, w, "lower"});
        if (u > w * (1.0 + slack))
            rep.violations.push_back({i, u, w, "upper"});
    }
    return rep;
}

DenseMatrix split_row(const DenseMatrix& A, Index row, Index k, double p)
{
    if (row < 0 || row >= A.rows())
        throw IndexError("split_row: row " + std::to_string(row) + " out of range");
    if (k < 1)
        throw DomainError("split_row: k must be at least 1");
    require_p_in_range(p);
    DenseMatrix out(A.rows() + k - 1, A.cols());
    out.topRows(row) = A.topRows(row);
    const double scale = std::pow(double(k), -1.0 / p);
    for (Index c = 0; c < k; ++c)
        out.row(row + c) = scale * A.row(row);
    out.bottomRows(A.rows() - row - 1) = A.bottomRows(A.rows() - row - 1);
    return out;
}

UniformityReport uniformity_report(const DenseMatrix& A, double p, const LewisWeights& lw)
{
    UniformityReport rep;
    rep.p = p;
    rep.c_p = 4.0 / p - 1.0;
    const auto lev = leverage_scores(A);
    Index nonzero = 0;
    for (Index i = 0; i < A.rows(); ++i)
        nonzero += lw.w(i) > 0.0;
    const double uniform = double(A.cols()) / double(nonzero);
    const auto spread = [uniform](double x) { return std::max(x / uniform, uniform / x); };
    for (Index i = 0; i < A.rows(); ++i) {
        if (lw.w(i) == 0.0)
            continue;
        rep.lewis_alpha = std::max(rep.lewis_alpha, spread(lw.w(i)));
        rep.leverage_alpha = std::max(rep.leverage_alpha, spread(lev.scores(i)));
    }
    rep.leverage_bound = std::pow(rep.lewis_alpha, rep.c_p);
    rep.leverage_within_bound = rep.leverage_alpha <= rep.leverage_bound * (1.0 + 1e-6);
    return rep;
}

} // namespace lewisreg
