#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lewisreg/lewis.hpp"
#include "test_support.hpp"

using namespace lewisreg;
using testing_support::gaussian_matrix;
using testing_support::gaussian_vector;

namespace {

// Residual of the defining equation with an explicit Gram inverse.
double explicit_residual(const DenseMatrix& A, double p, const DenseVector& w)
{
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(A.cols(), A.cols());
    for (Index i = 0; i < A.rows(); ++i)
        gram += std::pow(w(i), 1.0 - 2.0 / p) * A.row(i).transpose() * A.row(i);
    const Eigen::MatrixXd inv = gram.inverse();
    double res = 0.0;
    for (Index i = 0; i < A.rows(); ++i) {
        const double tau = A.row(i) * inv * A.row(i).transpose();
        res = std::max(res, std::abs(tau / std::pow(w(i), 2.0 / p) - 1.0));
    }
    return res;
}

// sup over the unit circle of |a_i^T beta|^p / ||A beta||_p^p by a dense
// angle grid followed by golden-section refinement around the best cell.
double angle_grid_sup(const DenseMatrix& A, double p, Index row)
{
    auto ratio = [&](double t) {
        Eigen::Vector2d b(std::cos(t), std::sin(t));
        const double num = std::pow(std::abs(A.row(row).dot(b)), p);
        double den = 0.0;
        for (Index j = 0; j < A.rows(); ++j)
            den += std::pow(std::abs(A.row(j).dot(b)), p);
        return num / den;
    };
    const int grid = 20000;
    double best = 0.0;
    double best_t = 0.0;
    for (int k = 0; k < grid; ++k) {
        const double t = std::numbers::pi * k / grid;
        const double r = ratio(t);
        if (r > best) {
            best = r;
            best_t = t;
        }
    }
    double lo = best_t - std::numbers::pi / grid, hi = best_t + std::numbers::pi / grid;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 100; ++it) {
        const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
        if (ratio(m1) > ratio(m2))
            hi = m2;
        else
            lo = m1;
    }
    return std::max(best, ratio(0.5 * (lo + hi)));
}

DenseMatrix sign_square()
{
    DenseMatrix A(4, 2);
    const double h = 1.0 / std::sqrt(2.0);
    A << h, h, h, -h, -h, h, -h, -h;
    return A;
}

} // namespace

TEST(LewisWeights, IdentityIsExactFixedPoint)
{
    for (double p : {1.0, 1.5, 2.0}) {
        const auto lw = lewis_weights(DenseMatrix(DenseMatrix::Identity(4, 4)), p);
        EXPECT_TRUE(lw.converged);
        EXPECT_EQ(lw.iterations, 0);
        EXPECT_NEAR(lw.residual, 0.0, 1e-15);
        for (Index i = 0; i < 4; ++i)
            EXPECT_NEAR(lw.w(i), 1.0, 1e-15);
        EXPECT_NEAR(lw.gamma, 1.0, 1e-14);
    }
}

TEST(LewisWeights, ConstantColumnIsUniform)
{
    for (double p : {1.0, 1.25, 2.0}) {
        const auto lw = lewis_weights(DenseMatrix(DenseMatrix::Ones(8, 1)), p);
        for (Index i = 0; i < 8; ++i)
            EXPECT_NEAR(lw.w(i), 1.0 / 8.0, 1e-12);
    }
}

TEST(LewisWeights, EqualLeverageScoresAtTwo)
{
    const DenseMatrix A = gaussian_matrix(50, 5, 21);
    const auto lw = lewis_weights(A, 2.0);
    const auto lev = leverage_scores(A);
    EXPECT_LT((lw.w - lev.scores).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(LewisWeights, FixedPointSumAndPositivity)
{
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const DenseMatrix A = gaussian_matrix(60 + 10 * Index(seed), 2 + Index(seed % 4), seed);
        for (double p : {1.0, 1.25, 1.5, 1.75, 2.0}) {
            const auto lw = lewis_weights(A, p);
            ASSERT_TRUE(lw.converged);
            EXPECT_LE(explicit_residual(A, p, lw.w), 1e-7);
            EXPECT_NEAR(lw.w.sum(), double(A.cols()), 1e-6);
            EXPECT_GT(lw.w.minCoeff(), 0.0);
            EXPECT_NEAR(lewis_residual(A, p, lw.w), lw.residual, 1e-12);
        }
    }
}

TEST(LewisWeights, RotationInvariance)
{
    const DenseMatrix A = gaussian_matrix(80, 4, 31);
    const Eigen::MatrixXd R = gaussian_matrix(4, 4, 32);
    const DenseMatrix AR = A * R;
    for (double p : {1.0, 1.5}) {
        const auto a = lewis_weights(A, p);
        const auto b = lewis_weights(AR, p);
        EXPECT_LT((a.w - b.w).cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(LewisWeights, ScaleInvariance)
{
    const DenseMatrix A = gaussian_matrix(40, 3, 41);
    const DenseMatrix B = 37.5 * A;
    const auto a = lewis_weights(A, 1.25);
    const auto b = lewis_weights(B, 1.25);
    EXPECT_LT((a.w - b.w).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(LewisWeights, ZeroRowsGetZeroWeight)
{
    DenseMatrix A = gaussian_matrix(20, 3, 51);
    A.row(4).setZero();
    A.row(11).setZero();
    const auto lw = lewis_weights(A, 1.0);
    EXPECT_EQ(lw.w(4), 0.0);
    EXPECT_EQ(lw.w(11), 0.0);
    EXPECT_NEAR(lw.w.sum(), 3.0, 1e-6);
}

TEST(LewisWeights, RankDeficientThrows)
{
    DenseMatrix A = gaussian_matrix(20, 3, 61);
    A.col(2) = A.col(1);
    EXPECT_THROW(lewis_weights(A, 1.0), DegenerateInput);
    EXPECT_THROW(lewis_weights(DenseMatrix(DenseMatrix::Ones(2, 3)), 1.0), DegenerateInput);
}

TEST(LewisWeights, RejectsExponentOutsideRange)
{
    EXPECT_THROW(lewis_weights(DenseMatrix(DenseMatrix::Identity(2, 2)), 3.0), DomainError);
}

TEST(LewisWeights, IterationCapReportsNonConvergence)
{
    const DenseMatrix A = gaussian_matrix(100, 5, 71);
    const auto lw = lewis_weights(A, 1.0, 1e-12, 2);
    EXPECT_FALSE(lw.converged);
    EXPECT_EQ(lw.iterations, 2);
    EXPECT_GT(lw.residual, 1e-12);
}

// The certified factor must bracket the converged weights.
TEST(LewisWeights, GammaBracketsConvergedWeights)
{
    const DenseMatrix A = gaussian_matrix(120, 4, 81);
    for (double p : {1.0, 1.5}) {
        const auto rough = lewis_weights(A, p, 1e-12, 3);
        const auto exact = lewis_weights(Matrix<long double>(A.cast<long double>()), (long double)p,
                                         (long double)1e-15, 2000);
        ASSERT_TRUE(exact.converged);
        ASSERT_GT(rough.gamma, 1.0);
        for (Index i = 0; i < A.rows(); ++i) {
            const double ratio = rough.w(i) / double(exact.w(i));
            EXPECT_LE(ratio, rough.gamma * (1 + 1e-12));
            EXPECT_GE(ratio, 1.0 / rough.gamma * (1 - 1e-12));
        }
    }
}

TEST(ImportanceOracle, SmallExamples)
{
    EXPECT_NEAR(importance_weight_oracle(DenseMatrix(DenseMatrix::Identity(3, 3)), 1.0, 0, 4, 1), 1.0, 1e-12);
    DenseMatrix col(2, 1);
    col << 1, 2;
    EXPECT_NEAR(importance_weight_oracle(col, 1.0, 1, 0, 1), 2.0 / 3.0, 1e-15);
    DenseMatrix zero_row = DenseMatrix::Identity(3, 2);
    EXPECT_EQ(importance_weight_oracle(zero_row, 1.0, 2, 4, 1), 0.0);
    EXPECT_THROW(importance_weight_oracle(zero_row, 1.0, 3, 4, 1), IndexError);
}

TEST(ImportanceOracle, SignSquareMatchesAngleGrid)
{
    const DenseMatrix A = sign_square();
    for (Index i = 0; i < 4; ++i) {
        const double grid = angle_grid_sup(A, 1.0, i);
        EXPECT_NEAR(grid, 0.5, 1e-9);
        EXPECT_NEAR(importance_weight_oracle(A, 1.0, i, 8, 3), grid, 1e-6);
    }
}

TEST(ImportanceOracle, RandomPlanarInstancesMatchAngleGrid)
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const DenseMatrix A = gaussian_matrix(12, 2, 100 + seed);
        for (double p : {1.0, 1.25, 1.5, 2.0}) {
            for (Index i = 0; i < A.rows(); i += 3) {
                const double grid = angle_grid_sup(A, p, i);
                const double u = importance_weight_oracle(A, p, i, 8, seed);
                EXPECT_LE(u, grid * (1 + 1e-9));
                EXPECT_NEAR(u, grid, 1e-6 * grid) << "seed " << seed << " p " << p << " row " << i;
            }
        }
    }
}

TEST(ImportanceOracle, EqualsLeverageAtTwo)
{
    // At p = 2 the sup is attained at (A^T A)^{-1} a_i and equals the leverage score.
    const DenseMatrix A = gaussian_matrix(25, 3, 9);
    const auto lev = leverage_scores(A);
    for (Index i = 0; i < A.rows(); ++i)
        EXPECT_NEAR(importance_weight_oracle(A, 2.0, i, 4, 1), lev.scores(i), 1e-9);
}

TEST(Sandwich, IdentityAndConstantColumn)
{
    const DenseMatrix I = DenseMatrix::Identity(3, 3);
    const auto lw = lewis_weights(I, 1.0);
    const auto iw = importance_weights(I, 1.0, 4, 0);
    const auto rep = sandwich_check(I, 1.0, lw, iw, 1e-3);
    EXPECT_TRUE(rep.ok());
    EXPECT_NEAR(rep.max_upper_ratio, 1.0, 1e-12);

    const DenseMatrix ones = DenseMatrix::Ones(4, 1);
    const auto lw1 = lewis_weights(ones, 1.0);
    const auto iw1 = importance_weights(ones, 1.0, 0, 0);
    EXPECT_EQ(iw1.method, ImportanceMethod::closed_form_1d);
    for (Index i = 0; i < 4; ++i)
        EXPECT_NEAR(iw1.u(i), 0.25, 1e-15);
    const auto rep1 = sandwich_check(ones, 1.0, lw1, iw1, 1e-3);
    EXPECT_TRUE(rep1.ok());
    EXPECT_NEAR(rep1.min_lower_ratio, 1.0, 1e-9);
}

TEST(Sandwich, SignSquare)
{
    const DenseMatrix A = sign_square();
    const auto lw = lewis_weights(A, 1.0);
    const auto iw = importance_weights(A, 1.0, 8, 0);
    for (Index i = 0; i < 4; ++i) {
        EXPECT_NEAR(lw.w(i), 0.5, 1e-9);
        EXPECT_NEAR(iw.u(i), 0.5, 1e-6);
    }
    const auto rep = sandwich_check(A, 1.0, lw, iw, 1e-3);
    EXPECT_TRUE(rep.ok());
    // lower end 2^{-1/2} * 0.5
    EXPECT_NEAR(rep.min_lower_ratio, 0.5 / (0.5 / std::sqrt(2.0)), 1e-5);
}

TEST(Sandwich, RequiresConvergedWeights)
{
    const DenseMatrix A = gaussian_matrix(30, 3, 3);
    const auto lw = lewis_weights(A, 1.0, 1e-14, 1);
    const auto iw = importance_weights(A, 1.0, 0, 0);
    EXPECT_THROW(sandwich_check(A, 1.0, lw, iw, 1e-3), PreconditionError);
}

TEST(SplitRow, SingleCopyIsIdentity)
{
    const DenseMatrix A = gaussian_matrix(6, 2, 4);
    EXPECT_EQ(split_row(A, 3, 1, 1.5), A);
    EXPECT_THROW(split_row(A, 6, 2, 1.0), IndexError);
    EXPECT_THROW(split_row(A, 0, 0, 1.0), DomainError);
}

TEST(SplitRow, TwoRowColumnExample)
{
    const DenseMatrix A = DenseMatrix::Ones(2, 1);
    const DenseMatrix B = split_row(A, 1, 2, 1.0);
    ASSERT_EQ(B.rows(), 3);
    EXPECT_DOUBLE_EQ(B(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(B(1, 0), 0.5);
    EXPECT_DOUBLE_EQ(B(2, 0), 0.5);
    const auto lw = lewis_weights(B, 1.0, 1e-13);
    EXPECT_NEAR(lw.w(0), 0.5, 1e-9);
    EXPECT_NEAR(lw.w(1), 0.25, 1e-9);
    EXPECT_NEAR(lw.w(2), 0.25, 1e-9);
    const auto iw = importance_weights(B, 1.0, 0, 0);
    EXPECT_NEAR(iw.u(0), 0.5, 1e-15);
    EXPECT_NEAR(iw.u(1), 0.25, 1e-15);
    EXPECT_NEAR(iw.u(2), 0.25, 1e-15);
}

TEST(SplitRow, PreservesEnergy)
{
    const DenseMatrix A = gaussian_matrix(10, 3, 8);
    for (double p : {1.0, 1.5, 2.0}) {
        const DenseMatrix B = split_row(A, 4, 5, p);
        ASSERT_EQ(B.rows(), 14);
        for (std::uint64_t s = 0; s < 5; ++s) {
            const DenseVector beta = gaussian_vector(3, s);
            const double ea = lp_energy((A * beta).eval(), p);
            EXPECT_NEAR(lp_energy((B * beta).eval(), p), ea, 1e-12 * ea);
        }
    }
}

TEST(Uniformity, TrivialCases)
{
    const DenseMatrix I = DenseMatrix::Identity(3, 3);
    const auto r = uniformity_report(I, 1.0, lewis_weights(I, 1.0));
    EXPECT_NEAR(r.lewis_alpha, 1.0, 1e-12);
    EXPECT_NEAR(r.c_p, 3.0, 1e-15);
    const DenseMatrix ones = DenseMatrix::Ones(5, 1);
    const auto r1 = uniformity_report(ones, 1.5, lewis_weights(ones, 1.5));
    EXPECT_NEAR(r1.lewis_alpha, 1.0, 1e-9);
    EXPECT_TRUE(r1.leverage_within_bound);
}

TEST(Uniformity, RandomNearOrthogonalDesign)
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const DenseMatrix A = gaussian_matrix(200, 4, 900 + seed);
        const auto lw = lewis_weights(A, 1.0);
        const auto r = uniformity_report(A, 1.0, lw);
        EXPECT_TRUE(std::isfinite(r.lewis_alpha));
        EXPECT_TRUE(r.leverage_within_bound) << r.leverage_alpha << " vs " << r.leverage_bound;
    }
}
