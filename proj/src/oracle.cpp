#include "lewisreg/oracle.hpp"

#include <stdexcept>

namespace lewisreg {

RegressionInstance::RegressionInstance(DenseMatrix A, DenseVector hidden_y, double p)
    : A_(std::move(A)), y_(std::move(hidden_y)), p_(p)
{
    if (y_.size() != A_.rows())
        throw DimensionMismatch("RegressionInstance: A has " + std::to_string(A_.rows()) + " rows but y has " +
                                std::to_string(y_.size()) + " entries");
    require_p_in_range(p_);
    require_finite(A_, "A");
    require_finite(y_, "y");
}

std::vector<Index> QueryLedger::queried() const
{
    std::vector<Index> out;
    out.reserve(answers_.size());
    for (const auto& [i, _] : answers_)
        out.push_back(i);
    return out;
}

double query(const RegressionInstance& instance, QueryLedger& ledger, Index i)
{
    if (i < 0 || i >= instance.rows())
        throw IndexError("query: row " + std::to_string(i) + " out of range");
    if (auto it = ledger.answers_.find(i); it != ledger.answers_.end())
        return it->second;
    if (ledger.budget_ && ledger.size() >= *ledger.budget_)
        throw BudgetExceeded("query budget of " + std::to_string(*ledger.budget_) + " labels exhausted");
    const double value = instance.y_(i);
    ledger.answers_.emplace(i, value);
    return value;
}

ActiveSolveResult active_solve(const RegressionInstance& instance, const SamplePlan& plan, std::uint64_t seed,
                               std::optional<Index> budget, const SolveOptions& options)
{
    if (plan.n != instance.rows())
        throw DimensionMismatch("active_solve: plan covers " + std::to_string(plan.n) + " rows, instance has " +
                                std::to_string(instance.rows()));
    ActiveSolveResult out{SolveResult{}, QueryLedger(budget), realize(plan, seed)};
    const auto support = Index(out.sketch.support());
    DenseMatrix As(support, instance.cols());
    DenseVector ys(support);
    DenseVector ss(support);
    for (Index k = 0; k < support; ++k) {
        const auto& e = out.sketch.entries[std::size_t(k)];
        As.row(k) = instance.A().row(e.row);
        ys(k) = query(instance, out.ledger, e.row);
        ss(k) = e.weight;
    }
    if (out.ledger.size() != support)
        throw std::logic_error("active_solve: ledger does not match the sketch support");
    out.solve = solve_weighted(As, ys, ss, instance.p(), options);
    return out;
}

} // namespace lewisreg
