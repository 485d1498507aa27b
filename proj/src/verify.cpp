#include "lewisreg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lewisreg/random.hpp"
#include "lewisreg/solvers.hpp"

namespace lewisreg {

void RucReport::merge(const RucReport& other)
{
    if (trials == 0) {
        eps_target = other.eps_target;
        betas_per_trial = other.betas_per_trial;
    }
    delta_value.insert(delta_value.end(), other.delta_value.begin(), other.delta_value.end());
    max_rel_violation.insert(max_rel_violation.end(), other.max_rel_violation.begin(), other.max_rel_violation.end());
    max_uncorrected.insert(max_uncorrected.end(), other.max_uncorrected.begin(), other.max_uncorrected.end());
    trials = Index(max_rel_violation.size());
    if (trials == 0) {
        pass_fraction = 0.0;
        uncorrected_fail_fraction = 0.0;
        return;
    }
    const auto passes = std::count_if(max_rel_violation.begin(), max_rel_violation.end(),
                                      [&](double v) { return v <= eps_target; });
    const auto unc_fail = std::count_if(max_uncorrected.begin(), max_uncorrected.end(),
                                        [&](double v) { return v > eps_target; });
    pass_fraction = double(passes) / double(trials);
    uncorrected_fail_fraction = double(unc_fail) / double(trials);
}

namespace {

Eigen::RowVectorXd column_energies(const Eigen::MatrixXd& R, double p)
{
    if (p == 1.0)
        return R.cwiseAbs().colwise().sum();
    if (p == 2.0)
        return R.colwise().squaredNorm();
    return R.array().abs().pow(p).matrix().colwise().sum();
}

Eigen::RowVectorXd weighted_column_energies(const Eigen::MatrixXd& R, const DenseVector& s, double p)
{
    if (p == 1.0)
        return s.transpose() * R.cwiseAbs();
    if (p == 2.0)
        return s.transpose() * R.cwiseAbs2();
    return s.transpose() * R.array().abs().pow(p).matrix();
}

DenseVector gaussian_vector(SplitMix64& rng, Index d)
{
    DenseVector v(d);
    for (Index j = 0; j < d; ++j)
        v(j) = rng.normal();
    return v;
}

} // namespace

RucEvaluator::RucEvaluator(const RegressionInstance& instance, const Sketch& sketch, DenseVector beta_star)
    : A_(instance.A()), y_(instance.reveal_for_analysis()), p_(instance.p()), beta_star_(std::move(beta_star))
{
    if (sketch.n != instance.rows())
        throw DimensionMismatch("RucEvaluator: sketch and instance differ in size");
    if (beta_star_.size() != instance.cols())
        throw DimensionMismatch("RucEvaluator: beta* has wrong length");
    const auto k = Index(sketch.support());
    As_.resize(k, A_.cols());
    ys_.resize(k);
    ss_.resize(k);
    for (Index j = 0; j < k; ++j) {
        const auto& e = sketch.entries[std::size_t(j)];
        As_.row(j) = A_.row(e.row);
        ys_(j) = y_(e.row);
        ss_(j) = e.weight;
    }
    const RucPoint star = at(beta_star_);
    full_star_ = star.full_loss;
    sketched_star_ = star.sketched_loss;
}

std::vector<RucPoint> RucEvaluator::batch(const Eigen::MatrixXd& betas) const
{
    Eigen::MatrixXd R = A_ * betas;
    R.colwise() -= y_;
    const Eigen::RowVectorXd full = column_energies(R, p_);
    Eigen::MatrixXd Rs = As_ * betas;
    Rs.colwise() -= ys_;
    const Eigen::RowVectorXd sketched = weighted_column_energies(Rs, ss_, p_);

    std::vector<RucPoint> out(std::size_t(betas.cols()));
    for (Index j = 0; j < betas.cols(); ++j) {
        RucPoint& pt = out[std::size_t(j)];
        pt.full_loss = full(j);
        pt.sketched_loss = sketched(j);
        if (pt.full_loss > 0.0) {
            const double diff = (pt.sketched_loss - sketched_star_) - (pt.full_loss - full_star_);
            pt.corrected = std::abs(diff) / pt.full_loss;
            pt.uncorrected = std::abs(pt.sketched_loss - pt.full_loss) / pt.full_loss;
        }
    }
    return out;
}

RucPoint RucEvaluator::at(const DenseVector& beta) const
{
    return batch(Eigen::MatrixXd(beta)).front();
}

RucReport ruc_check(const RegressionInstance& instance, const Sketch& sketch, const DenseVector& beta_star,
                    const BetaSampling& sampling, double eps)
{
    const RucEvaluator ev(instance, sketch, beta_star);
    const DenseMatrix& A = instance.A();
    const double p = instance.p();
    const Index d = A.cols();
    const double lstar = ev.full_loss_at_star();
    const double base = lstar > 0.0 ? lstar : 1.0;

    const double outer = 25.0 / (eps * sampling.delta);
    const double band_lo[3] = {1e-3, 3.0, outer};
    const double band_hi[3] = {3.0, outer, 100.0 * outer};

    SplitMix64 rng(mix64(sampling.seed));
    const int total = std::max(0, sampling.betas);

    double worst = 0.0;
    double worst_unc = lstar > 0.0 ? std::abs(ev.delta()) / lstar : 0.0;
    std::vector<std::pair<double, DenseVector>> seeds;

    constexpr int kChunk = 128;
    for (int start = 0; start < total; start += kChunk) {
        const int k = std::min(kChunk, total - start);
        Eigen::MatrixXd V(d, k);
        for (int j = 0; j < k; ++j)
            V.col(j) = gaussian_vector(rng, d);
        const Eigen::MatrixXd AV = A * V;
        const Eigen::RowVectorXd norms = column_energies(AV, p).array().pow(1.0 / p);
        Eigen::MatrixXd B(d, k);
        for (int j = 0; j < k; ++j) {
            const int band = (start + j) % 3;
            const double t = std::exp(std::log(band_lo[band]) +
                                      rng.uniform() * (std::log(band_hi[band]) - std::log(band_lo[band])));
            const double radius = std::pow(t * base, 1.0 / p);
            B.col(j) = beta_star + (radius / norms(j)) * V.col(j);
        }
        const auto pts = ev.batch(B);
        for (int j = 0; j < k; ++j) {
            const auto& pt = pts[std::size_t(j)];
            worst = std::max(worst, pt.corrected);
            worst_unc = std::max(worst_unc, pt.uncorrected);
            seeds.emplace_back(pt.corrected, B.col(j));
            std::sort(seeds.begin(), seeds.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
            if (int(seeds.size()) > sampling.ascent_starts)
                seeds.pop_back();
        }
    }

    // Pattern search on the corrected deviation from the worst samples.
    for (auto& [value, beta] : seeds) {
        double step = 0.3;
        for (int it = 0; it < sampling.ascent_steps; ++it) {
            const DenseVector offset = beta - beta_star;
            const double radius = offset.norm();
            if (radius == 0.0)
                break;
            DenseVector dir = gaussian_vector(rng, d);
            dir *= radius / dir.norm();
            const DenseVector trial = beta + step * dir;
            const RucPoint pt = ev.at(trial);
            worst_unc = std::max(worst_unc, pt.uncorrected);
            if (pt.corrected > value) {
                value = pt.corrected;
                beta = trial;
                step = std::min(1.0, step * 1.5);
            } else {
                step *= 0.7;
            }
        }
        worst = std::max(worst, value);
    }

    RucReport rep;
    rep.eps_target = eps;
    rep.betas_per_trial = total;
    rep.trials = 1;
    rep.delta_value = {ev.delta()};
    rep.max_rel_violation = {worst};
    rep.max_uncorrected = {worst_unc};
    rep.pass_fraction = worst <= eps ? 1.0 : 0.0;
    rep.uncorrected_fail_fraction = worst_unc > eps ? 1.0 : 0.0;
    return rep;
}

EmbedReport embedding_check(const DenseMatrix& A, const Sketch& sketch, double p, double eps, int directions,
                            std::uint64_t seed)
{
    require_p_in_range(p);
    if (sketch.n != A.rows())
        throw DimensionMismatch("embedding_check: sketch and matrix differ in size");
    const Index d = A.cols();
    const auto k = Index(sketch.support());
    DenseMatrix As(k, d);
    DenseVector s(k);
    for (Index j = 0; j < k; ++j) {
        As.row(j) = A.row(sketch.entries[std::size_t(j)].row);
        s(j) = sketch.entries[std::size_t(j)].weight;
    }

    const Index total = d + std::max(0, directions);
    Eigen::MatrixXd V(d, total);
    V.leftCols(d).setIdentity();
    SplitMix64 rng(mix64(seed));
    for (Index j = d; j < total; ++j)
        V.col(j) = gaussian_vector(rng, d).normalized();

    EmbedReport rep;
    rep.p = p;
    const Eigen::RowVectorXd full = column_energies(A * V, p);
    const Eigen::RowVectorXd sketched = weighted_column_energies(As * V, s, p);
    for (Index j = 0; j < total; ++j) {
        if (full(j) == 0.0)
            continue;
        ++rep.directions;
        rep.max_ratio_dev = std::max(rep.max_ratio_dev, std::abs(sketched(j) / full(j) - 1.0));
    }
    rep.pass = rep.max_ratio_dev <= eps;
    return rep;
}

CrossTermReport cross_term_check(const DenseMatrix& A, const DenseVector& y_centered, const Sketch& sketch, double p,
                                 int betas, std::uint64_t seed, double gamma, double delta, double m)
{
    if (!(p > 1.0 && p <= 2.0))
        throw DomainError("cross_term_check: p must lie in (1, 2]");
    if (y_centered.size() != A.rows() || sketch.n != A.rows())
        throw DimensionMismatch("cross_term_check: sizes differ");
    const Index d = A.cols();

    DenseVector coeff(A.rows());
    for (Index i = 0; i < A.rows(); ++i)
        coeff(i) = p * std::pow(std::abs(y_centered(i)), p - 1.0) * sign(y_centered(i));

    CrossTermReport rep;
    rep.p = p;
    const DenseVector full_grad = A.transpose() * coeff;
    double denom = 0.0;
    for (Index i = 0; i < A.rows(); ++i)
        denom += std::abs(coeff(i)) * A.row(i).norm();
    rep.optimality_residual = denom > 0.0 ? full_grad.norm() / denom : 0.0;
    if (rep.optimality_residual > 1e-6)
        throw PreconditionError("cross_term_check: y_centered is not the residual of the lp minimizer (violation " +
                                std::to_string(rep.optimality_residual) + ")");

    DenseVector g = DenseVector::Zero(d);
    for (const auto& e : sketch.entries)
        g += (e.weight * coeff(e.row)) * A.row(e.row).transpose();

    const double ynorm = std::pow(lp_norm(y_centered, p), p - 1.0);
    if (g.norm() > 0.0 && ynorm > 0.0) {
        const DenseVector best = maximize_linear_over_lp_ball(A, g, p);
        rep.max_ratio = std::abs(g.dot(best)) / ynorm;
        SplitMix64 rng(mix64(seed));
        for (int j = 0; j < betas; ++j) {
            const DenseVector beta = gaussian_vector(rng, d);
            const double norm = lp_norm((A * beta).eval(), p);
            if (norm > 0.0)
                rep.max_ratio = std::max(rep.max_ratio, std::abs(g.dot(beta)) / (norm * ynorm));
        }
    }
    rep.bound_scale = std::sqrt(gamma * std::pow(double(d), 2.0 / p) / (delta * m));
    rep.fitted_constant = rep.bound_scale > 0.0 ? rep.max_ratio / rep.bound_scale : 0.0;
    return rep;
}

double taylor_remainder(double a, double b, double p)
{
    if (b == 0.0)
        return 0.0;
    if (a == 0.0)
        return std::pow(std::abs(b), p);
    if (std::abs(b) <= 0.1 * std::abs(a)) {
        // |a|^p [ (1 - x)^p - 1 + p x ] with x = b / a, expanded as
        // sum_{k >= 2} C(p, k) (-x)^k.
        const double x = b / a;
        double coeff = p; // C(p, 1)
        double power = -x;
        double sum = 0.0;
        for (int k = 2; k < 80; ++k) {
            coeff *= (p - double(k) + 1.0) / double(k);
            power *= -x;
            const double term = coeff * power;
            sum += term;
            if (std::abs(term) <= 1e-18 * std::abs(sum))
                break;
        }
        return std::pow(std::abs(a), p) * sum;
    }
    return std::pow(std::abs(a - b), p) - std::pow(std::abs(a), p) +
           p * std::pow(std::abs(a), p - 1.0) * sign(a) * b;
}

TaylorReport taylor_claim_check(double p, Index samples, std::uint64_t seed)
{
    if (!(p > 1.0 && p <= 2.0))
        throw DomainError("taylor_claim_check: p must lie in (1, 2]");
    TaylorReport rep;
    rep.p = p;
    rep.samples = samples;
    SplitMix64 rng(mix64(seed));
    const double ln10 = std::log(10.0);
    for (Index k = 0; k < samples; ++k) {
        const double a = rng.sign() * std::exp(ln10 * (12.0 * rng.uniform() - 6.0));
        const double b = rng.sign() * std::exp(ln10 * (12.0 * rng.uniform() - 6.0));
        const double ratio = std::abs(taylor_remainder(a, b, p)) / std::pow(std::abs(b), p);
        if (!std::isfinite(ratio)) {
            rep.finite = false;
            continue;
        }
        if (ratio > rep.sup_ratio) {
            rep.sup_ratio = ratio;
            rep.argmax_ratio = a / b;
        }
    }
    return rep;
}

} // namespace lewisreg
