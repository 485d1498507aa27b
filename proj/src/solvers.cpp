#include "lewisreg/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lewisreg {

std::string to_string(SolveStatus status)
{
    switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iter: return "max-iter";
    case SolveStatus::degenerate: return "degenerate";
    }
    return "unknown";
}

double approx_transfer_bound(double eps)
{
    if (!(eps >= 0.0 && eps < 1.0))
        throw DomainError("approx_transfer_bound: eps must lie in [0, 1)");
    return 1.0 + eps / (1.0 - eps);
}

double weighted_median(const DenseVector& values, const DenseVector& weights)
{
    if (values.size() != weights.size())
        throw DimensionMismatch("weighted_median: values and weights differ in length");
    std::vector<Index> order;
    double total = 0.0;
    for (Index i = 0; i < values.size(); ++i) {
        if (weights(i) < 0.0)
            throw DomainError("weighted_median: negative weight");
        if (weights(i) > 0.0) {
            order.push_back(i);
            total += weights(i);
        }
    }
    if (order.empty())
        throw DegenerateInput("weighted_median: no positive weights");
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        return values(a) < values(b) || (values(a) == values(b) && a < b);
    });
    double cum = 0.0;
    for (Index i : order) {
        cum += weights(i);
        if (2.0 * cum >= total)
            return values(i);
    }
    return values(order.back());
}

double lp_kkt_residual(const DenseMatrix& A, const DenseVector& y, const DenseVector& s,
                       const DenseVector& beta, double p)
{
    const DenseVector r = A * beta - y;
    DenseVector grad = DenseVector::Zero(A.cols());
    double denom = 0.0;
    for (Index i = 0; i < r.size(); ++i) {
        if (s(i) == 0.0 || r(i) == 0.0)
            continue;
        const double g = s(i) * p * std::pow(std::abs(r(i)), p - 1.0);
        grad += (g * sign(r(i))) * A.row(i).transpose();
        denom += g * A.row(i).norm();
    }
    return denom > 0.0 ? grad.norm() / denom : 0.0;
}

namespace {

struct Restricted {
    DenseMatrix A;
    DenseVector y;
    DenseVector s;
};

Restricted restrict_to_support(const DenseMatrix& A, const DenseVector& y, const DenseVector& s)
{
    std::vector<Index> rows;
    for (Index i = 0; i < s.size(); ++i) {
        if (s(i) < 0.0 || !std::isfinite(s(i)))
            throw DomainError("solver: weights must be finite and non-negative");
        if (s(i) > 0.0)
            rows.push_back(i);
    }
    Restricted out{DenseMatrix(Index(rows.size()), A.cols()), DenseVector(Index(rows.size())),
                   DenseVector(Index(rows.size()))};
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.A.row(Index(k)) = A.row(rows[k]);
        out.y(Index(k)) = y(rows[k]);
        out.s(Index(k)) = s(rows[k]);
    }
    return out;
}

void check_inputs(const DenseMatrix& A, const DenseVector& y, const DenseVector& s)
{
    if (y.size() != A.rows() || s.size() != A.rows())
        throw DimensionMismatch("solver: A has " + std::to_string(A.rows()) + " rows, y has " +
                                std::to_string(y.size()) + ", s has " + std::to_string(s.size()));
    if (A.cols() == 0)
        throw DimensionMismatch("solver: A has no columns");
    require_finite(A, "A");
    require_finite(y, "y");
}

double loss(const Restricted& R, const DenseVector& beta, double p)
{
    const DenseVector r = R.A * beta - R.y;
    double acc = 0.0;
    for (Index i = 0; i < r.size(); ++i)
        acc += R.s(i) * abs_pow(r(i), p);
    return acc;
}

/// argmin sum_i w_i (a_i^T beta - y_i)^2 via the d x d normal equations,
/// falling back to QR on the scaled rows when the Cholesky factor fails.
DenseVector weighted_least_squares(const DenseMatrix& A, const DenseVector& y, const DenseVector& w)
{
    const Eigen::MatrixXd gram = A.transpose() * w.asDiagonal() * A;
    const Eigen::VectorXd rhs = A.transpose() * w.cwiseProduct(y);
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() == Eigen::Success) {
        DenseVector beta = llt.solve(rhs);
        if (beta.allFinite())
            return beta;
    }
    const DenseVector sw = w.cwiseSqrt();
    const Eigen::MatrixXd scaled = sw.asDiagonal() * A;
    return scaled.colPivHouseholderQr().solve(Eigen::VectorXd(sw.cwiseProduct(y)));
}

SolveResult degenerate_result(const DenseMatrix& A, const DenseVector& y, const DenseVector& s, double p)
{
    SolveResult res;
    res.beta = DenseVector::Zero(A.cols());
    res.objective = weighted_lp_loss(A, y, res.beta, s, p);
    res.status = SolveStatus::degenerate;
    res.kkt_residual = std::numeric_limits<double>::infinity();
    return res;
}

bool full_column_rank(const DenseMatrix& A)
{
    if (A.rows() < A.cols())
        return false;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(kRankCutoff);
    return qr.rank() == A.cols();
}

/// Smoothed IRLS / damped Newton with a line search on the true objective,
/// so accepted iterates never increase it.
struct IrlsOutcome {
    DenseVector beta;
    double objective;
    int iterations;
};

IrlsOutcome irls(const Restricted& R, double p, DenseVector beta, double rscale, const SolveOptions& options,
                 std::vector<double>& history)
{
    double obj = loss(R, beta, p);
    int iterations = 0;
    const double first_step = p > 1.0 ? 1.0 / (p - 1.0) : 1.0;
    DenseVector w(R.A.rows());
    double floor = 1e-2 * rscale;
    for (int stage = 0; stage < 9; ++stage, floor *= 0.1) {
        for (int it = 0; it < options.max_iter; ++it) {
            const DenseVector r = R.y - R.A * beta;
            for (Index i = 0; i < r.size(); ++i)
                w(i) = R.s(i) * std::pow(std::max(std::abs(r(i)), floor), p - 2.0);
            const DenseVector target = weighted_least_squares(R.A, R.y, w);
            const DenseVector dir = target - beta;
            if (!dir.allFinite() || dir.norm() == 0.0)
                break;

            bool accepted = false;
            double t = first_step;
            DenseVector trial;
            double trial_obj = obj;
            for (int ls = 0; ls < 40; ++ls) {
                trial = beta + t * dir;
                trial_obj = loss(R, trial, p);
                if (trial_obj < obj) {
                    accepted = true;
                    break;
                }
                t = (ls == 0 && first_step != 1.0) ? 1.0 : 0.5 * t;
            }
            ++iterations;
            if (!accepted)
                break;
            const double decrease = obj - trial_obj;
            beta = trial;
            obj = trial_obj;
            history.push_back(obj);
            if (decrease <= 1e-15 * obj)
                break;
        }
    }
    return {beta, obj, iterations};
}

/// Picks up to d rows (smallest |r| first) with linearly independent a_i.
std::vector<Index> smallest_residual_basis(const DenseMatrix& A, const DenseVector& r)
{
    const Index d = A.cols();
    std::vector<Index> order(std::size_t(A.rows()));
    std::iota(order.begin(), order.end(), Index(0));
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        return std::abs(r(a)) < std::abs(r(b)) || (std::abs(r(a)) == std::abs(r(b)) && a < b);
    });
    std::vector<Index> basis;
    Eigen::MatrixXd Q(d, d);
    for (Index i : order) {
        Eigen::VectorXd v = A.row(i).transpose();
        const double norm0 = v.norm();
        if (norm0 == 0.0)
            continue;
        for (Index k = 0; k < Index(basis.size()); ++k)
            v -= Q.col(k).dot(v) * Q.col(k);
        for (Index k = 0; k < Index(basis.size()); ++k)
            v -= Q.col(k).dot(v) * Q.col(k);
        if (v.norm() > 1e-8 * norm0) {
            Q.col(Index(basis.size())) = v.normalized();
            basis.push_back(i);
            if (Index(basis.size()) == d)
                break;
        }
    }
    return basis;
}

struct VertexOutcome {
    DenseVector beta;
    double objective;
    int pivots;
    double kkt;
    bool ok;
};

/// Exact descent over vertices of the weighted l1 objective.
VertexOutcome vertex_descent(const Restricted& R, const DenseVector& start, double rscale)
{
    const Index d = R.A.cols();
    const Index n = R.A.rows();
    VertexOutcome out{start, loss(R, start, 1.0), 0, std::numeric_limits<double>::infinity(), false};

    DenseVector r = R.y - R.A * start;
    std::vector<Index> basis = smallest_residual_basis(R.A, r);
    if (Index(basis.size()) < d)
        return out;

    std::vector<char> in_basis(std::size_t(n), 0);
    for (Index i : basis)
        in_basis[std::size_t(i)] = 1;

    Eigen::MatrixXd B(d, d);
    Eigen::VectorXd yb(d);
    for (Index k = 0; k < d; ++k) {
        B.row(k) = R.A.row(basis[std::size_t(k)]);
        yb(k) = R.y(basis[std::size_t(k)]);
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    DenseVector beta = lu.solve(yb);
    double obj = loss(R, beta, 1.0);
    const double zero_tol = 1e-13 * std::max(rscale, std::numeric_limits<double>::min());

    const int max_pivots = int(50 + 20 * d);
    int pivots = 0;
    double kkt = 0.0;
    std::vector<std::pair<double, Index>> breaks;
    for (;;) {
        r = R.y - R.A * beta;
        Eigen::VectorXd h = Eigen::VectorXd::Zero(d);
        for (Index i = 0; i < n; ++i)
            if (!in_basis[std::size_t(i)] && std::abs(r(i)) > zero_tol)
                h += (R.s(i) * sign(r(i))) * R.A.row(i).transpose();
        // c_k = (B^{-T} h)_k; moving basic row k off zero changes the slope by
        // s_k - |c_k| along the edge direction sign(c_k) B^{-1} e_k.
        const Eigen::VectorXd c = lu.transpose().solve(h);
        kkt = 0.0;
        for (Index k = 0; k < d; ++k)
            kkt = std::max(kkt, std::abs(c(k)) / R.s(basis[std::size_t(k)]) - 1.0);
        if (kkt <= 1e-12 || pivots >= max_pivots)
            break;

        std::vector<Index> candidates;
        for (Index k = 0; k < d; ++k)
            if (std::abs(c(k)) > R.s(basis[std::size_t(k)]) * (1.0 + 1e-12))
                candidates.push_back(k);
        std::sort(candidates.begin(), candidates.end(), [&](Index a, Index b) {
            return std::abs(c(a)) / R.s(basis[std::size_t(a)]) > std::abs(c(b)) / R.s(basis[std::size_t(b)]);
        });

        bool moved = false;
        for (Index k : candidates) {
            Eigen::VectorXd ek = Eigen::VectorXd::Zero(d);
            ek(k) = sign(c(k));
            const Eigen::VectorXd delta = lu.solve(ek);
            const DenseVector v = R.A * delta;
            // slope of t -> sum s_i |r_i - t v_i| at t = 0+
            double slope = 0.0;
            breaks.clear();
            for (Index i = 0; i < n; ++i) {
                if (v(i) == 0.0)
                    continue;
                const bool at_zero = in_basis[std::size_t(i)] || std::abs(r(i)) <= zero_tol;
                if (at_zero) {
                    slope += R.s(i) * std::abs(v(i));
                } else {
                    slope -= R.s(i) * sign(r(i)) * v(i);
                    const double t = r(i) / v(i);
                    if (t > 0.0)
                        breaks.emplace_back(t, i);
                }
            }
            if (slope >= 0.0)
                continue;
            std::sort(breaks.begin(), breaks.end());
            Index entering = -1;
            double t_star = 0.0;
            for (const auto& [t, i] : breaks) {
                slope += 2.0 * R.s(i) * std::abs(v(i));
                if (slope >= 0.0) {
                    entering = i;
                    t_star = t;
                    break;
                }
            }
            if (entering < 0)
                continue; // unbounded below cannot happen for a full-rank basis
            const DenseVector next = beta + t_star * delta;
            const double next_obj = loss(R, next, 1.0);
            if (!(next_obj < obj))
                continue;
            in_basis[std::size_t(basis[std::size_t(k)])] = 0;
            basis[std::size_t(k)] = entering;
            in_basis[std::size_t(entering)] = 1;
            B.row(k) = R.A.row(entering);
            yb(k) = R.y(entering);
            lu.compute(B);
            beta = lu.solve(yb);
            obj = loss(R, beta, 1.0);
            ++pivots;
            moved = true;
            break;
        }
        if (!moved)
            break;
    }
    out.beta = beta;
    out.objective = obj;
    out.pivots = pivots;
    out.kkt = std::max(0.0, kkt);
    out.ok = true;
    return out;
}

} // namespace

SolveResult solve_weighted_l1(const DenseMatrix& A, const DenseVector& y, const DenseVector& s,
                              const SolveOptions& options)
{
    check_inputs(A, y, s);
    const Restricted R = restrict_to_support(A, y, s);
    const Index d = A.cols();
    if (R.A.rows() < d || !full_column_rank(R.A))
        return degenerate_result(A, y, s, 1.0);

    SolveResult res;
    if (d == 1) {
        DenseVector ratios(R.A.rows());
        DenseVector weights(R.A.rows());
        for (Index i = 0; i < R.A.rows(); ++i) {
            const double a = R.A(i, 0);
            ratios(i) = a != 0.0 ? R.y(i) / a : 0.0;
            weights(i) = R.s(i) * std::abs(a);
        }
        res.beta = DenseVector::Constant(1, weighted_median(ratios, weights));
        res.objective = weighted_lp_loss(A, y, res.beta, s, 1.0);
        res.status = SolveStatus::converged;
        res.kkt_residual = 0.0;
        res.history.push_back(res.objective);
        return res;
    }

    DenseVector beta = weighted_least_squares(R.A, R.y, R.s);
    double obj = loss(R, beta, 1.0);
    res.history.push_back(obj);
    if (obj == 0.0) {
        res.beta = beta;
        res.objective = weighted_lp_loss(A, y, beta, s, 1.0);
        res.status = SolveStatus::converged;
        return res;
    }
    const double rscale = obj / R.s.sum();

    IrlsOutcome smooth = irls(R, 1.0, beta, rscale, options, res.history);
    VertexOutcome vertex = vertex_descent(R, smooth.beta, rscale);

    res.iterations = smooth.iterations + vertex.pivots;
    if (vertex.ok && vertex.objective <= smooth.objective) {
        res.beta = vertex.beta;
        res.kkt_residual = vertex.kkt;
    } else {
        res.beta = smooth.beta;
        res.kkt_residual = vertex.ok ? vertex.kkt : std::numeric_limits<double>::infinity();
    }
    res.objective = weighted_lp_loss(A, y, res.beta, s, 1.0);
    res.status = res.kkt_residual <= options.tol ? SolveStatus::converged : SolveStatus::max_iter;
    return res;
}

SolveResult solve_weighted_lp(const DenseMatrix& A, const DenseVector& y, const DenseVector& s, double p,
                              const SolveOptions& options)
{
    if (!(p > 1.0 && p <= 2.0))
        throw DomainError("solve_weighted_lp: p must lie in (1, 2]");
    check_inputs(A, y, s);
    const Restricted R = restrict_to_support(A, y, s);
    const Index d = A.cols();
    if (R.A.rows() < d || !full_column_rank(R.A))
        return degenerate_result(A, y, s, p);

    SolveResult res;
    DenseVector beta = weighted_least_squares(R.A, R.y, R.s);
    double obj = loss(R, beta, p);
    res.history.push_back(obj);
    if (obj > 0.0 && p < 2.0) {
        const double rscale = std::pow(obj / R.s.sum(), 1.0 / p);
        IrlsOutcome out = irls(R, p, beta, rscale, options, res.history);
        beta = out.beta;
        res.iterations = out.iterations;
    }
    res.beta = beta;
    res.objective = weighted_lp_loss(A, y, beta, s, p);
    res.kkt_residual = res.objective == 0.0 ? 0.0 : lp_kkt_residual(R.A, R.y, R.s, beta, p);
    res.status = res.kkt_residual <= options.tol ? SolveStatus::converged : SolveStatus::max_iter;
    return res;
}

SolveResult solve_weighted(const DenseMatrix& A, const DenseVector& y, const DenseVector& s, double p,
                           const SolveOptions& options)
{
    require_p_in_range(p);
    return p == 1.0 ? solve_weighted_l1(A, y, s, options) : solve_weighted_lp(A, y, s, p, options);
}

DenseVector maximize_linear_over_lp_ball(const DenseMatrix& A, const DenseVector& c, double p)
{
    require_p_in_range(p);
    const Index d = A.cols();
    if (c.size() != d)
        throw DimensionMismatch("maximize_linear_over_lp_ball: c has wrong length");
    const double cn2 = c.squaredNorm();
    if (cn2 == 0.0)
        throw DegenerateInput("maximize_linear_over_lp_ball: c = 0");

    DenseVector beta = c / cn2;
    if (d > 1) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr{Eigen::MatrixXd(c)};
        const Eigen::MatrixXd Q = qr.householderQ();
        const Eigen::MatrixXd N = Q.rightCols(d - 1);
        const DenseMatrix AN = A * N;
        const DenseVector target = -(A * beta);
        const SolveResult sub = solve_weighted(AN, target, DenseVector::Ones(A.rows()), p);
        if (sub.status == SolveStatus::degenerate)
            throw DegenerateInput("maximize_linear_over_lp_ball: A is rank deficient");
        beta += N * sub.beta;
    }
    const double norm = lp_norm((A * beta).eval(), p);
    if (!(norm > 0.0))
        throw DegenerateInput("maximize_linear_over_lp_ball: A beta vanishes");
    return beta / norm;
}

} // namespace lewisreg
