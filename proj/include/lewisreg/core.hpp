#pragma once

// Dense primitives shared by every module: matrix/vector aliases, leverage
// scores, lp norms and the weighted lp empirical loss.

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "lewisreg/errors.hpp"

namespace lewisreg {

using Index = Eigen::Index;

/// Row-major dense matrix; rows are the data points a_i.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using DenseMatrix = Matrix<double>;
using DenseVector = Vector<double>;

/// Relative singular-value cutoff below which a direction counts as null.
inline constexpr double kRankCutoff = 1e-10;

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x)
{
    return x.derived().allFinite();
}

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& x, const std::string& what)
{
    if (!all_finite(x))
        throw DomainError(what + " contains non-finite entries");
}

template <typename Scalar>
void require_p_in_range(Scalar p, Scalar lo = Scalar(1), Scalar hi = Scalar(2))
{
    if (!(p >= lo && p <= hi))
        throw DomainError("p = " + std::to_string(double(p)) + " outside [" +
                          std::to_string(double(lo)) + ", " + std::to_string(double(hi)) + "]");
}

/// |x|^p with the common exponents short-circuited.
template <typename Scalar>
inline Scalar abs_pow(Scalar x, Scalar p)
{
    using std::abs;
    using std::pow;
    const Scalar ax = abs(x);
    if (p == Scalar(1))
        return ax;
    if (p == Scalar(2))
        return ax * ax;
    if (ax == Scalar(0))
        return Scalar(0);
    return pow(ax, p);
}

template <typename Scalar>
inline Scalar sign(Scalar x)
{
    return Scalar((x > Scalar(0)) - (x < Scalar(0)));
}

/// sum_i |v_i|^p
template <typename Derived>
typename Derived::Scalar lp_energy(const Eigen::MatrixBase<Derived>& v, typename Derived::Scalar p)
{
    using Scalar = typename Derived::Scalar;
    if (p == Scalar(1))
        return v.template lpNorm<1>();
    if (p == Scalar(2))
        return v.squaredNorm();
    Scalar acc(0);
    for (Index i = 0; i < v.size(); ++i)
        acc += abs_pow(v(i), p);
    return acc;
}

/// (sum_i |v_i|^p)^(1/p) for p in [1, 2].
template <typename Derived>
typename Derived::Scalar lp_norm(const Eigen::MatrixBase<Derived>& v, typename Derived::Scalar p)
{
    using Scalar = typename Derived::Scalar;
    require_p_in_range<Scalar>(p);
    const Scalar e = lp_energy(v, p);
    if (e == Scalar(0))
        return Scalar(0);
    return std::pow(e, Scalar(1) / p);
}

/// sum_i s_i |a_i^T beta - y_i|^p
template <typename DA, typename DY, typename DB, typename DS>
typename DA::Scalar weighted_lp_loss(const Eigen::MatrixBase<DA>& A, const Eigen::MatrixBase<DY>& y,
                                     const Eigen::MatrixBase<DB>& beta, const Eigen::MatrixBase<DS>& s,
                                     typename DA::Scalar p)
{
    using Scalar = typename DA::Scalar;
    if (y.size() != A.rows() || s.size() != A.rows() || beta.size() != A.cols())
        throw DimensionMismatch("weighted_lp_loss: A is " + std::to_string(A.rows()) + "x" +
                                std::to_string(A.cols()) + ", y has " + std::to_string(y.size()) +
                                ", s has " + std::to_string(s.size()) + ", beta has " +
                                std::to_string(beta.size()));
    const Vector<Scalar> r = A * beta - y;
    Scalar acc(0);
    for (Index i = 0; i < r.size(); ++i) {
        if (s(i) < Scalar(0))
            throw DomainError("weighted_lp_loss: negative weight");
        if (s(i) != Scalar(0))
            acc += s(i) * abs_pow(r(i), p);
    }
    return acc;
}

/// Unweighted loss L(beta) = ||A beta - y||_p^p.
template <typename DA, typename DY, typename DB>
typename DA::Scalar lp_loss(const Eigen::MatrixBase<DA>& A, const Eigen::MatrixBase<DY>& y,
                            const Eigen::MatrixBase<DB>& beta, typename DA::Scalar p)
{
    if (y.size() != A.rows() || beta.size() != A.cols())
        throw DimensionMismatch("lp_loss: dimension mismatch");
    return lp_energy((A * beta - y).eval(), p);
}

template <typename Scalar>
struct LeverageScores {
    Vector<Scalar> scores;
    Index rank = 0;
};

/// Statistical leverage a_i^T (A^T A)^+ a_i from the thin left singular
/// vectors; singular values below kRankCutoff * sigma_max are dropped.
template <typename Derived>
LeverageScores<typename Derived::Scalar> leverage_scores(const Eigen::MatrixBase<Derived>& A)
{
    using Scalar = typename Derived::Scalar;
    using ColMajor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    if (A.size() == 0 || A.cwiseAbs().maxCoeff() == Scalar(0))
        throw DegenerateInput("leverage_scores: all-zero matrix");

    Eigen::BDCSVD<ColMajor> svd(ColMajor(A), Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > Scalar(kRankCutoff) * sv(0))
        ++rank;

    LeverageScores<Scalar> out;
    out.rank = rank;
    out.scores = svd.matrixU().leftCols(rank).rowwise().squaredNorm();
    return out;
}

} // namespace lewisreg
