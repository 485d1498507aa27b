#pragma once

// Benchmark families: Gaussian designs with planted outliers, a coherent
// variant with one heavy row, and the block construction with biased +-1
// labels used for the query lower bound.

#include <cstdint>
#include <optional>
#include <vector>

#include "lewisreg/core.hpp"
#include "lewisreg/oracle.hpp"

namespace lewisreg {

enum class NoiseKind { none, gaussian, laplace };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::gaussian;
    double scale = 1.0;
};

struct OutlierSpec {
    Index count = 0;
    /// Outlier labels are +-magnitude * scale, where scale is the noise
    /// scale (1 without noise).
    double magnitude = 1e4;
};

struct RandomInstance {
    RegressionInstance instance;
    DenseVector beta0;
    /// Rows whose labels were replaced, increasing.
    std::vector<Index> outlier_rows;
};

/// A with iid N(0, 1) entries, y = A beta0 + noise, then `outliers.count`
/// labels replaced by +-M * scale. With `coherent` set, row 0 is multiplied
/// by `heavy_scale`, so it dominates the leverage and Lewis weights.
///
/// Streams: A from substream(seed, 0), beta0 from 1, noise from 2,
/// outlier placement and signs from 3.
RandomInstance gen_random(Index n, Index d, double p, const NoiseSpec& noise, const OutlierSpec& outliers,
                          std::uint64_t seed, bool coherent = false, double heavy_scale = 100.0);

struct LowerBoundInstance {
    Index n = 0;
    Index d = 0;
    double eps = 0.0;
    /// Hidden signs; block j has Pr[y = +1] = 1/2 + b_j eps.
    Eigen::VectorXi b;
    RegressionInstance instance;
};

/// d consecutive blocks of n/d copies of e_j with p = 1. Throws
/// ParameterError unless d divides n and eps lies in (0, 1/2].
/// b is drawn from substream(seed, 0) when not given; labels use
/// substream(seed, 1).
LowerBoundInstance gen_lower_bound(Index n, Index d, double eps, std::optional<Eigen::VectorXi> b,
                                   std::uint64_t seed);

/// One-dimensional coin game: alpha is +-1 uniformly, the learner reads
/// m_queries of n_prime labels (each +1 w.p. 1/2 + alpha eps) and guesses the
/// majority sign, ties broken by a fair coin. Returns the win rate.
/// Throws ParameterError when m_queries > n_prime.
double sign_recovery_experiment(Index n_prime, double eps, Index m_queries, Index trials, std::uint64_t seed);

} // namespace lewisreg
