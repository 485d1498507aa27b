#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "lewisreg/core.hpp"
#include "test_support.hpp"

using namespace lewisreg;
using testing_support::gaussian_matrix;
using testing_support::gaussian_vector;

TEST(LeverageScores, IdentityHasUnitScores)
{
    const auto lev = leverage_scores(DenseMatrix(DenseMatrix::Identity(3, 3)));
    EXPECT_EQ(lev.rank, 3);
    for (Index i = 0; i < 3; ++i)
        EXPECT_NEAR(lev.scores(i), 1.0, 1e-14);
}

TEST(LeverageScores, ConstantColumnIsUniform)
{
    const auto lev = leverage_scores(DenseMatrix(DenseMatrix::Ones(4, 1)));
    EXPECT_EQ(lev.rank, 1);
    for (Index i = 0; i < 4; ++i)
        EXPECT_NEAR(lev.scores(i), 0.25, 1e-14);
}

TEST(LeverageScores, MatchesExplicitGramInverse)
{
    const DenseMatrix A = gaussian_matrix(20, 3, 11);
    const Eigen::MatrixXd gram_inv = (A.transpose() * A).inverse();
    const auto lev = leverage_scores(A);
    for (Index i = 0; i < A.rows(); ++i) {
        const double oracle = A.row(i) * gram_inv * A.row(i).transpose();
        EXPECT_NEAR(lev.scores(i), oracle, 1e-10) << "row " << i;
    }
}

TEST(LeverageScores, SumEqualsRankAndScoresInUnitInterval)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const DenseMatrix A = gaussian_matrix(30 + Index(seed), 1 + Index(seed % 5), seed);
        const auto lev = leverage_scores(A);
        EXPECT_EQ(lev.rank, A.cols());
        EXPECT_NEAR(lev.scores.sum(), double(lev.rank), 1e-8);
        EXPECT_GE(lev.scores.minCoeff(), 0.0);
        EXPECT_LE(lev.scores.maxCoeff(), 1.0 + 1e-12);
    }
}

TEST(LeverageScores, RankDeficientUsesPseudoinverse)
{
    DenseMatrix A = gaussian_matrix(15, 3, 4);
    A.col(2) = A.col(0) + 2.0 * A.col(1);
    const auto lev = leverage_scores(A);
    EXPECT_EQ(lev.rank, 2);
    EXPECT_NEAR(lev.scores.sum(), 2.0, 1e-8);
}

TEST(LeverageScores, InvariantUnderRightMultiplication)
{
    const DenseMatrix A = gaussian_matrix(40, 4, 5);
    const Eigen::MatrixXd R = gaussian_matrix(4, 4, 6);
    const DenseMatrix AR = A * R;
    const auto a = leverage_scores(A);
    const auto b = leverage_scores(AR);
    EXPECT_LT((a.scores - b.scores).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(LeverageScores, AllZeroMatrixThrows)
{
    EXPECT_THROW(leverage_scores(DenseMatrix(DenseMatrix::Zero(3, 2))), DegenerateInput);
}

TEST(LpNorm, KnownValues)
{
    EXPECT_DOUBLE_EQ(lp_norm(DenseVector(DenseVector::Zero(4)), 1.5), 0.0);
    DenseVector v(2);
    v << 3, 4;
    EXPECT_NEAR(lp_norm(v, 2.0), 5.0, 1e-15);
    DenseVector u(3);
    u << 1, -1, 1;
    EXPECT_NEAR(lp_norm(u, 1.0), 3.0, 1e-15);
    DenseVector w(2);
    w << 1, 1;
    EXPECT_NEAR(lp_norm(w, 1.5), std::pow(2.0, 2.0 / 3.0), 1e-14);
    EXPECT_NEAR(lp_norm(w, 1.5), 1.5874, 1e-4);
}

TEST(LpNorm, RejectsExponentOutsideRange)
{
    const DenseVector v = DenseVector::Ones(3);
    EXPECT_THROW(lp_norm(v, 0.5), DomainError);
    EXPECT_THROW(lp_norm(v, 2.5), DomainError);
    EXPECT_THROW(lp_norm(v, std::numeric_limits<double>::quiet_NaN()), DomainError);
}

TEST(LpNorm, TriangleInequalityAndHomogeneity)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const DenseVector x = gaussian_vector(25, seed);
        const DenseVector y = gaussian_vector(25, seed + 100);
        for (double p : {1.0, 1.25, 1.5, 1.75, 2.0}) {
            EXPECT_LE(lp_norm((x + y).eval(), p), lp_norm(x, p) + lp_norm(y, p) + 1e-12);
            EXPECT_NEAR(lp_norm((-3.5 * x).eval(), p), 3.5 * lp_norm(x, p), 1e-12 * lp_norm(x, p));
        }
    }
}

TEST(WeightedLoss, ExactFitIsZero)
{
    const DenseMatrix A = gaussian_matrix(10, 3, 1);
    const DenseVector beta = gaussian_vector(3, 2);
    const DenseVector y = A * beta;
    EXPECT_NEAR(weighted_lp_loss(A, y, beta, DenseVector::Ones(10).eval(), 1.0), 0.0, 1e-12);
}

TEST(WeightedLoss, SmallExamples)
{
    const DenseMatrix A = DenseMatrix::Ones(2, 1);
    DenseVector y(2);
    y << 0, 2;
    const DenseVector beta = DenseVector::Ones(1);
    DenseVector s(2);
    s << 1, 1;
    EXPECT_DOUBLE_EQ(weighted_lp_loss(A, y, beta, s, 1.0), 2.0);
    s << 2, 0;
    EXPECT_DOUBLE_EQ(weighted_lp_loss(A, y, beta, s, 1.0), 2.0);
}

TEST(WeightedLoss, OnesWeightsEqualUnweightedLoss)
{
    const DenseMatrix A = gaussian_matrix(12, 2, 3);
    const DenseVector y = gaussian_vector(12, 4);
    const DenseVector beta = gaussian_vector(2, 5);
    for (double p : {1.0, 1.3, 2.0})
        EXPECT_NEAR(weighted_lp_loss(A, y, beta, DenseVector::Ones(12).eval(), p), lp_loss(A, y, beta, p), 1e-12);
}

TEST(WeightedLoss, ErrorCases)
{
    const DenseMatrix A = DenseMatrix::Ones(3, 2);
    const DenseVector y = DenseVector::Zero(3);
    const DenseVector beta = DenseVector::Zero(2);
    EXPECT_THROW(weighted_lp_loss(A, y, beta, DenseVector::Ones(2).eval(), 1.0), DimensionMismatch);
    EXPECT_THROW(weighted_lp_loss(A, DenseVector::Zero(4).eval(), beta, DenseVector::Ones(3).eval(), 1.0),
                 DimensionMismatch);
    DenseVector s = DenseVector::Ones(3);
    s(1) = -1.0;
    EXPECT_THROW(weighted_lp_loss(A, y, beta, s, 1.0), DomainError);
}

TEST(Finite, RejectsNonFiniteEntries)
{
    DenseMatrix A = DenseMatrix::Ones(2, 2);
    EXPECT_TRUE(all_finite(A));
    A(1, 0) = std::numeric_limits<double>::infinity();
    EXPECT_FALSE(all_finite(A));
    EXPECT_THROW(require_finite(A, "A"), DomainError);
}

TEST(CoreTemplates, LongDoubleLeverage)
{
    using LMatrix = Matrix<long double>;
    LMatrix A = gaussian_matrix(10, 2, 9).cast<long double>();
    const auto lev = leverage_scores(A);
    EXPECT_NEAR(double(lev.scores.sum()), 2.0, 1e-12);
}
