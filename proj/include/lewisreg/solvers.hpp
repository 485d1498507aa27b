#pragma once

// Minimizers of the weighted empirical loss sum_i s_i |a_i^T beta - y_i|^p.

#include <string>
#include <vector>

#include "lewisreg/core.hpp"

namespace lewisreg {

enum class SolveStatus { converged, max_iter, degenerate };

std::string to_string(SolveStatus status);

struct SolveResult {
    DenseVector beta;
    double objective = 0.0;
    int iterations = 0;
    SolveStatus status = SolveStatus::degenerate;
    /// Dimensionless first-order optimality violation; 0 at an exact optimum.
    double kkt_residual = 0.0;
    /// Objective after every accepted reweighting step.
    std::vector<double> history;
};

struct SolveOptions {
    double tol = 1e-8;
    /// Reweighting iterations allowed per smoothing stage.
    int max_iter = 100;
};

/// Lowest value whose cumulative weight reaches half the total weight.
/// Zero-weight entries are ignored.
double weighted_median(const DenseVector& values, const DenseVector& weights);

/// Weighted least absolute deviations.
///
/// Smoothed IRLS (residual floor annealed from 1e-2 to 1e-10 of the warm
/// start's mean absolute residual) followed by an exact vertex descent: from
/// the basis of the d smallest residuals, edges of the piecewise-linear
/// objective are followed with an exact weighted-median line search until
/// no edge descends. One-column problems go straight to the weighted median.
SolveResult solve_weighted_l1(const DenseMatrix& A, const DenseVector& y, const DenseVector& s,
                              const SolveOptions& options = {});

/// Weighted lp regression for p in (1, 2]; p = 2 is solved in closed form.
/// Iterates are damped Newton steps on the floored IRLS model.
SolveResult solve_weighted_lp(const DenseMatrix& A, const DenseVector& y, const DenseVector& s,
                              double p, const SolveOptions& options = {});

/// Dispatches on p: 1 -> solve_weighted_l1, (1, 2] -> solve_weighted_lp.
SolveResult solve_weighted(const DenseMatrix& A, const DenseVector& y, const DenseVector& s,
                           double p, const SolveOptions& options = {});

/// Gradient-based optimality measure for p > 1:
/// ||sum s_i p |r_i|^{p-1} sign(r_i) a_i||_2 / sum s_i p |r_i|^{p-1} ||a_i||_2.
double lp_kkt_residual(const DenseMatrix& A, const DenseVector& y, const DenseVector& s,
                       const DenseVector& beta, double p);

/// Direction maximizing c^T beta over the unit ball {beta : ||A beta||_p <= 1},
/// found by solving the equivalent convex problem min ||A beta||_p subject
/// to c^T beta = 1 (an unconstrained lp regression on the complement of c).
/// Requires A of full column rank and c != 0; the result has ||A beta||_p = 1.
DenseVector maximize_linear_over_lp_ball(const DenseMatrix& A, const DenseVector& c, double p);

/// Loss ratio guaranteed for the minimizer of an objective that tracks the
/// true loss differences up to eps * L(beta): 1 + eps / (1 - eps).
double approx_transfer_bound(double eps);

} // namespace lewisreg
