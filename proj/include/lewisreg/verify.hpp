#pragma once

// Empirical certificates: robust uniform convergence with the Delta
// correction, lp subspace embedding, the first-order cross term, and the
// Taylor remainder inequality.

#include <cstdint>
#include <vector>

#include "lewisreg/core.hpp"
#include "lewisreg/oracle.hpp"
#include "lewisreg/sampling.hpp"

namespace lewisreg {

/// How the supremum over beta is approximated.
struct BetaSampling {
    /// Random points, split evenly over three bands of
    /// ||A(beta - beta*)||_p^p / L(beta*): [1e-3, 3), [3, 25/(eps delta)),
    /// [25/(eps delta), 2500/(eps delta)].
    int betas = 1000;
    /// Pattern-search steps spent climbing from each of the worst samples.
    int ascent_steps = 40;
    int ascent_starts = 3;
    /// delta used to place the outer band.
    double delta = 0.1;
    std::uint64_t seed = 0;
};

/// Deviation of the sketched loss at one beta.
struct RucPoint {
    /// |[L~(beta) - L~(beta*)] - [L(beta) - L(beta*)]| / L(beta)
    double corrected = 0.0;
    /// |L~(beta) - L(beta)| / L(beta)
    double uncorrected = 0.0;
    double full_loss = 0.0;
    double sketched_loss = 0.0;
};

struct RucReport {
    double eps_target = 0.0;
    Index trials = 0;
    int betas_per_trial = 0;
    /// Delta = L(beta*) - L~(beta*), one per trial.
    std::vector<double> delta_value;
    /// Corrected sup deviation, one per trial.
    std::vector<double> max_rel_violation;
    /// Uncorrected sup |L~ - L| / L, one per trial.
    std::vector<double> max_uncorrected;
    double pass_fraction = 0.0;
    /// Fraction of trials whose uncorrected deviation exceeds eps_target.
    double uncorrected_fail_fraction = 0.0;

    /// Appends the trials of `other` and recomputes the fractions.
    void merge(const RucReport& other);
};

/// Precomputes L and L~ at beta* for repeated evaluations against one sketch.
class RucEvaluator {
public:
    RucEvaluator(const RegressionInstance& instance, const Sketch& sketch, DenseVector beta_star);

    RucPoint at(const DenseVector& beta) const;
    /// Column-wise evaluation of a d x k block of betas.
    std::vector<RucPoint> batch(const Eigen::MatrixXd& betas) const;

    double full_loss_at_star() const { return full_star_; }
    double sketched_loss_at_star() const { return sketched_star_; }
    /// Delta = L(beta*) - L~(beta*)
    double delta() const { return full_star_ - sketched_star_; }

private:
    const DenseMatrix& A_;
    const DenseVector& y_;
    double p_;
    DenseMatrix As_;
    DenseVector ys_;
    DenseVector ss_;
    DenseVector beta_star_;
    double full_star_ = 0.0;
    double sketched_star_ = 0.0;
};

/// One-trial report: the sup over beta is approximated by the banded sample
/// plus local ascent from the worst points. beta* must be the full-data
/// minimizer (analysis side).
RucReport ruc_check(const RegressionInstance& instance, const Sketch& sketch, const DenseVector& beta_star,
                    const BetaSampling& sampling, double eps);

struct EmbedReport {
    double p = 1.0;
    int directions = 0;
    /// max | ||S A beta||_p^p / ||A beta||_p^p - 1 | over sampled unit beta
    double max_ratio_dev = 0.0;
    bool pass = false;
};

/// Samples `directions` unit vectors (plus the coordinate axes) and records
/// the worst relative distortion of the lp energy; directions with
/// A beta = 0 are skipped.
EmbedReport embedding_check(const DenseMatrix& A, const Sketch& sketch, double p, double eps, int directions,
                            std::uint64_t seed);

struct CrossTermReport {
    double p = 1.5;
    /// Relative norm of sum p |y_i|^{p-1} sign(y_i) a_i before sketching.
    double optimality_residual = 0.0;
    /// max over beta of sum s_i p |y_i|^{p-1} sign(y_i) a_i^T beta / (||A beta||_p ||y||_p^{p-1})
    double max_ratio = 0.0;
    /// sqrt(gamma d^{2/p} / (delta m))
    double bound_scale = 0.0;
    /// max_ratio / bound_scale
    double fitted_constant = 0.0;
};

/// y_centered must be the residual y - A beta* of the full lp minimizer, so
/// that the unsketched first-order term vanishes (checked to 1e-6; a
/// violation throws PreconditionError). The maximum is taken over `betas`
/// random directions and the exact maximizer of the linear form over the lp
/// ball of A.
CrossTermReport cross_term_check(const DenseMatrix& A, const DenseVector& y_centered, const Sketch& sketch, double p,
                                 int betas, std::uint64_t seed, double gamma, double delta, double m);

/// |a - b|^p - |a|^p + p |a|^{p-1} sign(a) b, evaluated by a binomial series
/// when |b| <= |a| / 10 to avoid cancellation.
double taylor_remainder(double a, double b, double p);

struct TaylorReport {
    double p = 1.5;
    Index samples = 0;
    /// sup |remainder| / |b|^p over the sampled pairs
    double sup_ratio = 0.0;
    /// a / b at the supremum
    double argmax_ratio = 0.0;
    bool finite = true;
};

/// Samples pairs with |a|, |b| log-uniform over twelve decades so that
/// |b| << |a|, |b| ~ |a| and |b| >> |a| are all represented.
TaylorReport taylor_claim_check(double p, Index samples, std::uint64_t seed);

} // namespace lewisreg
