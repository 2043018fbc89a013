#pragma once

#include <utility>
#include <vector>

#include "opch/errors.hpp"
#include "opch/rational.hpp"

namespace opch {

// Sparse vector: (column, coefficient) pairs, columns strictly increasing,
// no zero coefficients.
using SparseVec = std::vector<std::pair<int, Rat>>;

// a += c * b, keeping the representation canonical.
void sv_axpy(SparseVec& a, const Rat& c, const SparseVec& b);
void sv_scale(SparseVec& a, const Rat& c);

// Incrementally maintained reduced row-echelon basis of a subspace of Q^dim.
// Pivots are 1, pivot columns strictly increase row by row, and every pivot
// column is zero in the other rows. The row set depends only on the span, so
// any insertion order yields the same basis.
class SpanBasis {
public:
    explicit SpanBasis(int dim);

    int dim() const { return dim_; }
    int rank() const { return static_cast<int>(rows_.size()); }
    const std::vector<SparseVec>& rows() const { return rows_; }
    const std::vector<int>& pivot_columns() const { return pivots_; }

    // Residual of v after eliminating all pivot columns.
    SparseVec reduce(SparseVec v) const;
    bool contains(const SparseVec& v) const { return reduce(v).empty(); }

    // Adds v to the span; returns true when the rank grew.
    bool insert(SparseVec v);

    // Index of the row with this pivot column, or -1.
    int pivot_row(int col) const;

private:
    void check(const SparseVec& v) const;

    int dim_;
    std::vector<SparseVec> rows_;
    std::vector<int> pivots_;
};

SpanBasis echelonize(const std::vector<SparseVec>& vectors, int dim);

// Solves sum_j c[j]*columns[j] = target for many targets over one column set.
// Columns are eliminated left to right; a column lying in the span of earlier
// columns is free and always gets coefficient 0, so solutions are canonical.
class PreimageSolver {
public:
    PreimageSolver(const std::vector<SparseVec>& columns, int dim);

    int dim() const { return basis_.dim(); }
    int rank() const { return basis_.rank(); }

    // Throws NotInImage when target is outside the column span.
    std::vector<Rat> solve(const SparseVec& target) const;

private:
    SparseVec reduce_tracking(SparseVec v, SparseVec& recipe) const;

    std::size_t ncols_;
    SpanBasis basis_;
    std::vector<SparseVec> recipes_;  // recipes_[r] indexes into the columns
};

// One-shot convenience wrapper around PreimageSolver.
std::vector<Rat> solve_preimage(const std::vector<SparseVec>& columns, const SparseVec& target,
                                int dim);

} // namespace opch
