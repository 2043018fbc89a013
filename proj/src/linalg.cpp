#include "opch/linalg.hpp"

#include <algorithm>

namespace opch {

void sv_axpy(SparseVec& a, const Rat& c, const SparseVec& b) {
    if (c == 0 || b.empty()) return;
    SparseVec out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j >= b.size() || (i < a.size() && a[i].first < b[j].first)) {
            out.push_back(a[i++]);
        } else if (i >= a.size() || b[j].first < a[i].first) {
            Rat v = c * b[j].second;
            out.emplace_back(b[j].first, std::move(v));
            ++j;
        } else {
            Rat v = a[i].second + c * b[j].second;
            if (v != 0) out.emplace_back(a[i].first, std::move(v));
            ++i;
            ++j;
        }
    }
    a = std::move(out);
}

void sv_scale(SparseVec& a, const Rat& c) {
    if (c == 0) {
        a.clear();
        return;
    }
    for (auto& [col, v] : a) v *= c;
}

SpanBasis::SpanBasis(int dim) : dim_(dim) {
    if (dim < 0) fail(ErrorCode::InvalidArgument, "ambient dimension must be >= 0");
}

void SpanBasis::check(const SparseVec& v) const {
    if (!v.empty() && (v.front().first < 0 || v.back().first >= dim_))
        fail(ErrorCode::DimensionMismatch,
             "vector index outside the ambient dimension " + std::to_string(dim_));
}

int SpanBasis::pivot_row(int col) const {
    auto it = std::lower_bound(pivots_.begin(), pivots_.end(), col);
    if (it == pivots_.end() || *it != col) return -1;
    return static_cast<int>(it - pivots_.begin());
}

SparseVec SpanBasis::reduce(SparseVec v) const {
    check(v);
    std::size_t i = 0;
    while (i < v.size()) {
        int r = pivot_row(v[i].first);
        if (r < 0) {
            ++i;
            continue;
        }
        Rat c = -v[i].second;
        sv_axpy(v, c, rows_[static_cast<std::size_t>(r)]);
        // the pivot entry cancelled; entries before position i are untouched
    }
    return v;
}

bool SpanBasis::insert(SparseVec v) {
    v = reduce(std::move(v));
    if (v.empty()) return false;
    Rat inv = 1 / v.front().second;
    sv_scale(v, inv);
    int pivot = v.front().first;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        auto& row = rows_[r];
        auto it = std::lower_bound(row.begin(), row.end(), pivot,
                                   [](const auto& e, int c) { return e.first < c; });
        if (it != row.end() && it->first == pivot) {
            Rat c = -it->second;
            sv_axpy(row, c, v);
        }
    }
    auto pos = std::lower_bound(pivots_.begin(), pivots_.end(), pivot);
    std::size_t idx = static_cast<std::size_t>(pos - pivots_.begin());
    pivots_.insert(pos, pivot);
    rows_.insert(rows_.begin() + static_cast<std::ptrdiff_t>(idx), std::move(v));
    return true;
}

SpanBasis echelonize(const std::vector<SparseVec>& vectors, int dim) {
    SpanBasis b(dim);
    for (const auto& v : vectors) b.insert(v);
    return b;
}

SparseVec PreimageSolver::reduce_tracking(SparseVec v, SparseVec& recipe) const {
    std::size_t i = 0;
    while (i < v.size()) {
        int r = basis_.pivot_row(v[i].first);
        if (r < 0) {
            ++i;
            continue;
        }
        Rat c = -v[i].second;
        sv_axpy(v, c, basis_.rows()[static_cast<std::size_t>(r)]);
        sv_axpy(recipe, c, recipes_[static_cast<std::size_t>(r)]);
    }
    return v;
}

PreimageSolver::PreimageSolver(const std::vector<SparseVec>& columns, int dim)
    : ncols_(columns.size()), basis_(dim) {
    // Eliminate over the column vectors left to right, tracking for each basis
    // row the combination of original columns that produced it.
    for (std::size_t j = 0; j < columns.size(); ++j) {
        SparseVec recipe{{static_cast<int>(j), Rat(1)}};
        SparseVec v = reduce_tracking(columns[j], recipe);
        if (v.empty()) continue;  // dependent column: free, coefficient 0
        Rat inv = 1 / v.front().second;
        sv_scale(v, inv);
        sv_scale(recipe, inv);
        int pivot = v.front().first;
        // Back-reduce existing recipes against the new pivot before the basis
        // rows themselves are back-reduced inside insert().
        for (std::size_t r = 0; r < basis_.rows().size(); ++r) {
            const auto& row = basis_.rows()[r];
            auto it = std::lower_bound(row.begin(), row.end(), pivot,
                                       [](const auto& e, int c) { return e.first < c; });
            if (it != row.end() && it->first == pivot) {
                Rat c = it->second;
                sv_axpy(recipes_[r], -c, recipe);
            }
        }
        // Insert mirrors SpanBasis::insert, so row r and recipes_[r] stay
        // paired by pivot order.
        auto pos = std::lower_bound(basis_.pivot_columns().begin(), basis_.pivot_columns().end(),
                                    pivot);
        std::size_t idx =
            static_cast<std::size_t>(pos - basis_.pivot_columns().begin());
        basis_.insert(std::move(v));
        recipes_.insert(recipes_.begin() + static_cast<std::ptrdiff_t>(idx), std::move(recipe));
    }
}

std::vector<Rat> PreimageSolver::solve(const SparseVec& target) const {
    SparseVec combo;
    SparseVec residual = reduce_tracking(target, combo);
    if (!residual.empty())
        fail(ErrorCode::NotInImage, "target vector is not in the span of the columns");

    std::vector<Rat> out(ncols_, Rat(0));
    // combo holds -c_j at this point: target - sum c_j columns_j reduced to 0.
    for (const auto& [j, c] : combo) out[static_cast<std::size_t>(j)] = -c;
    return out;
}

std::vector<Rat> solve_preimage(const std::vector<SparseVec>& columns, const SparseVec& target,
                                int dim) {
    return PreimageSolver(columns, dim).solve(target);
}

} // namespace opch
