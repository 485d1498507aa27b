#pragma once

// lp Lewis weights, the brute-force importance-weight oracle, and the
// row-splitting / uniformity utilities used to cross-check them.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lewisreg/core.hpp"

namespace lewisreg {

template <typename Scalar>
struct BasicLewisWeights {
    Scalar p = Scalar(1);
    /// w_i; zero rows carry weight 0.
    Vector<Scalar> w;
    /// Certified approximation factor: w is within gamma of the exact fixed
    /// point, derived from the residual and the contraction rate |1 - p/2|.
    Scalar gamma = Scalar(1);
    /// max_i | a_i^T (A^T W^{1-2/p} A)^{-1} a_i / w_i^{2/p} - 1 |
    Scalar residual = Scalar(0);
    int iterations = 0;
    bool converged = false;
};

using LewisWeights = BasicLewisWeights<double>;

namespace detail {

/// tau_i = a_i^T (A^T diag(v) A)^{-1} a_i for the nonzero rows.
template <typename Derived, typename Scalar = typename Derived::Scalar>
Vector<Scalar> quadratic_forms(const Eigen::MatrixBase<Derived>& A, const Vector<Scalar>& v)
{
    using ColMajor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const ColMajor gram = A.transpose() * v.asDiagonal() * A;
    Eigen::LLT<ColMajor> llt(gram);
    if (llt.info() != Eigen::Success)
        throw DegenerateInput("lewis_weights: A^T W A is not positive definite");
    ColMajor X = A.transpose();
    llt.matrixL().solveInPlace(X);
    return X.colwise().squaredNorm().transpose();
}

template <typename Scalar>
Scalar contraction_gamma(Scalar p, Scalar log_violation)
{
    const Scalar rate = std::abs(Scalar(1) - p / Scalar(2));
    return std::exp((p / Scalar(2)) * log_violation / (Scalar(1) - rate));
}

} // namespace detail

/// Fixed-point violation of candidate weights w (zero rows skipped).
template <typename Derived, typename Scalar = typename Derived::Scalar>
Scalar lewis_residual(const Eigen::MatrixBase<Derived>& A, Scalar p, const Vector<Scalar>& w)
{
    std::vector<Index> rows;
    for (Index i = 0; i < A.rows(); ++i)
        if (A.row(i).cwiseAbs().maxCoeff() > Scalar(0))
            rows.push_back(i);
    Matrix<Scalar> B(Index(rows.size()), A.cols());
    Vector<Scalar> wb(Index(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        B.row(Index(k)) = A.row(rows[k]);
        wb(Index(k)) = w(rows[k]);
    }
    const Vector<Scalar> v = wb.array().pow(Scalar(1) - Scalar(2) / p);
    const Vector<Scalar> tau = detail::quadratic_forms(B, v);
    Scalar res(0);
    for (Index k = 0; k < tau.size(); ++k)
        res = std::max(res, std::abs(tau(k) / std::pow(wb(k), Scalar(2) / p) - Scalar(1)));
    return res;
}

/// lp Lewis weights by the contraction w_i <- (a_i^T (A^T W^{1-2/p} A)^{-1} a_i)^{p/2},
/// started from the uniform weights d/n. Converges geometrically with rate
/// |1 - p/2| for p in [1, 2]. At p = 2 the weights are the leverage scores.
///
/// Zero rows get weight 0 and are left out of the fixed point. Throws
/// DegenerateInput when the nonzero rows do not span R^d. Non-convergence
/// is reported through `converged` and `residual`, not thrown.
template <typename Derived, typename Scalar = typename Derived::Scalar>
BasicLewisWeights<Scalar> lewis_weights(const Eigen::MatrixBase<Derived>& A, Scalar p, Scalar tol = Scalar(1e-8),
                                        int max_iter = 500)
{
    require_p_in_range(p);
    require_finite(A, "A");
    const Index n = A.rows();
    const Index d = A.cols();

    std::vector<Index> rows;
    for (Index i = 0; i < n; ++i)
        if (A.row(i).cwiseAbs().maxCoeff() > Scalar(0))
            rows.push_back(i);
    const Index m = Index(rows.size());
    if (m < d || d == 0)
        throw DegenerateInput("lewis_weights: fewer nonzero rows than columns");
    Matrix<Scalar> B(m, d);
    for (Index k = 0; k < m; ++k)
        B.row(k) = A.row(rows[std::size_t(k)]);
    {
        Eigen::ColPivHouseholderQR<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> qr(B);
        qr.setThreshold(Scalar(kRankCutoff));
        if (qr.rank() < d)
            throw DegenerateInput("lewis_weights: A is rank deficient");
    }

    BasicLewisWeights<Scalar> out;
    out.p = p;
    Vector<Scalar> w = Vector<Scalar>::Constant(m, Scalar(d) / Scalar(m));
    const Scalar exponent = Scalar(1) - Scalar(2) / p;
    Scalar log_violation(0);
    int it = 0;
    for (;; ++it) {
        const Vector<Scalar> v = exponent == Scalar(0) ? Vector<Scalar>::Ones(m) : Vector<Scalar>(w.array().pow(exponent));
        const Vector<Scalar> tau = detail::quadratic_forms(B, v);
        Scalar res(0);
        log_violation = Scalar(0);
        for (Index k = 0; k < m; ++k) {
            const Scalar ratio = tau(k) / std::pow(w(k), Scalar(2) / p);
            res = std::max(res, std::abs(ratio - Scalar(1)));
            log_violation = std::max(log_violation, std::abs(std::log(ratio)));
        }
        out.residual = res;
        if (res <= tol || it >= max_iter)
            break;
        w = tau.array().pow(p / Scalar(2));
    }
    out.iterations = it;
    out.converged = out.residual <= tol;
    out.gamma = detail::contraction_gamma(p, log_violation);
    out.w = Vector<Scalar>::Zero(n);
    for (Index k = 0; k < m; ++k)
        out.w(rows[std::size_t(k)]) = w(k);
    return out;
}

enum class ImportanceMethod { closed_form_1d, multistart_ascent };

std::string to_string(ImportanceMethod method);

struct ImportanceWeights {
    double p = 1.0;
    /// Lower estimates of sup_beta |a_i^T beta|^p / ||A beta||_p^p.
    DenseVector u;
    ImportanceMethod method = ImportanceMethod::closed_form_1d;
    int starts = 0;
};

/// Estimates the importance weight of one row. For d = 1 this is the exact
/// closed form |a_i|^p / sum_j |a_j|^p. Otherwise the ratio is maximized
/// over the unit sphere by projected ascent from the deterministic starts
/// beta = a_i and the maximizer of the equivalent convex program, plus
/// `starts` random directions; the best value found is returned, which
/// never exceeds the true supremum. Meant for small instances.
double importance_weight_oracle(const DenseMatrix& A, double p, Index row, int starts, std::uint64_t seed);

/// Oracle applied to every row, row i using the seed substream i.
ImportanceWeights importance_weights(const DenseMatrix& A, double p, int starts, std::uint64_t seed);

struct SandwichViolation {
    Index row = 0;
    double importance = 0.0;
    double lewis = 0.0;
    /// "lower" or "upper"
    std::string side;
};

struct SandwichReport {
    double p = 1.0;
    double slack = 0.0;
    Index rows_checked = 0;
    std::vector<SandwichViolation> violations;
    /// min_i u_i / (d^{-(1-p/2)} w_i); >= 1 means the lower inequality holds.
    double min_lower_ratio = 0.0;
    /// max_i u_i / w_i; <= 1 means the upper inequality holds.
    double max_upper_ratio = 0.0;
    bool ok() const { return violations.empty(); }
};

/// Checks d^{-(1-p/2)} w_i (1 - slack) <= u_i <= w_i (1 + slack) row by row.
/// Throws PreconditionError when `lw` did not converge.
SandwichReport sandwich_check(const DenseMatrix& A, double p, const LewisWeights& lw, const ImportanceWeights& iw,
                              double slack);

/// Replaces row `row` by k copies of a_row / k^{1/p}, in place. The lp
/// energy sum_j |a_j^T beta|^p is unchanged for every beta.
DenseMatrix split_row(const DenseMatrix& A, Index row, Index k, double p);

struct UniformityReport {
    double p = 1.0;
    /// max_i max(w_i / (d/n), (d/n) / w_i) over nonzero rows
    double lewis_alpha = 1.0;
    /// same statistic for the leverage scores
    double leverage_alpha = 1.0;
    /// 4/p - 1
    double c_p = 3.0;
    /// lewis_alpha^{c_p}
    double leverage_bound = 1.0;
    bool leverage_within_bound = true;
};

UniformityReport uniformity_report(const DenseMatrix& A, double p, const LewisWeights& lw);

} // namespace lewisreg
