#pragma once

// Hidden labels behind a metered query interface. The only way to read
// labels on the query-limited path is query(), and every distinct row read
// is recorded in a QueryLedger.

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "lewisreg/core.hpp"
#include "lewisreg/sampling.hpp"
#include "lewisreg/solvers.hpp"

namespace lewisreg {

class QueryLedger;

class RegressionInstance {
public:
    RegressionInstance(DenseMatrix A, DenseVector hidden_y, double p);

    const DenseMatrix& A() const { return A_; }
    double p() const { return p_; }
    Index rows() const { return A_.rows(); }
    Index cols() const { return A_.cols(); }

    /// Full label vector for analysis-side references only (the full-data
    /// minimizer, the Delta correction, generated-file output). The
    /// query-limited solver never calls this.
    const DenseVector& reveal_for_analysis() const { return y_; }

private:
    friend double query(const RegressionInstance& instance, QueryLedger& ledger, Index i);

    DenseMatrix A_;
    DenseVector y_;
    double p_;
};

class QueryLedger {
public:
    explicit QueryLedger(std::optional<Index> budget = std::nullopt) : budget_(budget) {}

    std::optional<Index> budget() const { return budget_; }
    /// Distinct rows queried so far.
    Index size() const { return Index(answers_.size()); }
    /// Queried rows in increasing order.
    std::vector<Index> queried() const;
    bool contains(Index i) const { return answers_.count(i) != 0; }

private:
    friend double query(const RegressionInstance& instance, QueryLedger& ledger, Index i);

    std::optional<Index> budget_;
    std::map<Index, double> answers_;
};

/// Returns y_i and records i. Repeated queries of a row are served from the
/// ledger and not counted again. Throws BudgetExceeded when a new row would
/// exceed the budget and IndexError for an invalid row.
double query(const RegressionInstance& instance, QueryLedger& ledger, Index i);

struct ActiveSolveResult {
    SolveResult solve;
    QueryLedger ledger;
    Sketch sketch;
};

/// Realizes the plan, queries exactly the rows in the sketch support and
/// minimizes the sketched loss over those rows. A degenerate support is
/// reported through the solve status.
ActiveSolveResult active_solve(const RegressionInstance& instance, const SamplePlan& plan, std::uint64_t seed,
                               std::optional<Index> budget = std::nullopt, const SolveOptions& options = {});

} // namespace lewisreg
