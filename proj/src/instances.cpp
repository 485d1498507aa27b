#include "lewisreg/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lewisreg/random.hpp"

namespace lewisreg {

RandomInstance gen_random(Index n, Index d, double p, const NoiseSpec& noise, const OutlierSpec& outliers,
                          std::uint64_t seed, bool coherent, double heavy_scale)
{
    if (d < 1 || n < d)
        throw ParameterError("gen_random: need n >= d >= 1");
    if (outliers.count < 0 || outliers.count > n)
        throw ParameterError("gen_random: outlier count out of range");
    require_p_in_range(p);

    DenseMatrix A(n, d);
    SplitMix64 a_rng = substream(seed, 0);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j)
            A(i, j) = a_rng.normal();
    if (coherent)
        A.row(0) *= heavy_scale;

    SplitMix64 b_rng = substream(seed, 1);
    DenseVector beta0(d);
    for (Index j = 0; j < d; ++j)
        beta0(j) = b_rng.normal();

    DenseVector y = A * beta0;
    SplitMix64 n_rng = substream(seed, 2);
    if (noise.kind == NoiseKind::gaussian) {
        for (Index i = 0; i < n; ++i)
            y(i) += noise.scale * n_rng.normal();
    } else if (noise.kind == NoiseKind::laplace) {
        for (Index i = 0; i < n; ++i)
            y(i) -= noise.scale * n_rng.sign() * std::log(n_rng.uniform_open());
    }

    const double scale = noise.kind == NoiseKind::none ? 1.0 : noise.scale;
    std::vector<Index> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), Index(0));
    SplitMix64 o_rng = substream(seed, 3);
    for (Index k = 0; k < outliers.count; ++k) {
        const auto j = k + Index(o_rng.below(std::uint64_t(n - k)));
        std::swap(rows[std::size_t(k)], rows[std::size_t(j)]);
        y(rows[std::size_t(k)]) = o_rng.sign() * outliers.magnitude * scale;
    }
    rows.resize(std::size_t(outliers.count));
    std::sort(rows.begin(), rows.end());

    return {RegressionInstance(std::move(A), std::move(y), p), std::move(beta0), std::move(rows)};
}

LowerBoundInstance gen_lower_bound(Index n, Index d, double eps, std::optional<Eigen::VectorXi> b,
                                   std::uint64_t seed)
{
    if (d < 1 || n < d || n % d != 0)
        throw ParameterError("gen_lower_bound: d must divide n");
    if (!(eps > 0.0 && eps <= 0.5))
        throw ParameterError("gen_lower_bound: eps must lie in (0, 1/2]");
    if (b) {
        if (b->size() != d)
            throw DimensionMismatch("gen_lower_bound: b must have d entries");
        for (Index j = 0; j < d; ++j)
            if ((*b)(j) != 1 && (*b)(j) != -1)
                throw ParameterError("gen_lower_bound: b must be a sign vector");
    } else {
        SplitMix64 rng = substream(seed, 0);
        b = Eigen::VectorXi(d);
        for (Index j = 0; j < d; ++j)
            (*b)(j) = rng.sign();
    }

    const Index block = n / d;
    DenseMatrix A = DenseMatrix::Zero(n, d);
    DenseVector y(n);
    SplitMix64 rng = substream(seed, 1);
    for (Index j = 0; j < d; ++j) {
        const double plus = 0.5 + (*b)(j) * eps;
        for (Index r = 0; r < block; ++r) {
            const Index i = j * block + r;
            A(i, j) = 1.0;
            y(i) = rng.uniform() < plus ? 1.0 : -1.0;
        }
    }
    return {n, d, eps, std::move(*b), RegressionInstance(std::move(A), std::move(y), 1.0)};
}

double sign_recovery_experiment(Index n_prime, double eps, Index m_queries, Index trials, std::uint64_t seed)
{
    if (m_queries < 0 || m_queries > n_prime)
        throw ParameterError("sign_recovery_experiment: need 0 <= m_queries <= n_prime");
    if (!(eps >= 0.0 && eps <= 0.5))
        throw ParameterError("sign_recovery_experiment: eps must lie in [0, 1/2]");
    if (trials <= 0)
        return 0.0;
    Index wins = 0;
    for (Index t = 0; t < trials; ++t) {
        SplitMix64 rng = substream(seed, std::uint64_t(t));
        const int alpha = rng.sign();
        const double plus = 0.5 + alpha * eps;
        // Labels are iid, so m distinct uniform positions read m fresh draws.
        Index vote = 0;
        for (Index k = 0; k < m_queries; ++k)
            vote += rng.uniform() < plus ? 1 : -1;
        const int guess = vote > 0 ? 1 : vote < 0 ? -1 : rng.sign();
        wins += guess == alpha;
    }
    return double(wins) / double(trials);
}

} // namespace lewisreg
