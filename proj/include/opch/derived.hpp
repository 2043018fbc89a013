#pragma once

#include <string>
#include <vector>

#include "opch/varieties.hpp"

namespace opch {

// tau images of all arity-n di-monomials, written in the coordinates of the
// weight -1 component of v. Column order follows enumerate_di_monomials(n).
struct ExpansionMatrix {
    std::vector<DiMonomial> di_ambient;
    std::vector<SparseVec> columns;
    int rank = 0;
    int component_dim = 0;
};
ExpansionMatrix expansion_matrix(Workspace& ws, const VarietySpec& v, int n);

// Dimension of the arity-n component of the derived variety: the rank of the
// tau image inside the weight -1 component.
int dim_dervar(Workspace& ws, const VarietySpec& v, int n);

// True iff every weight -1 multilinear class is a tau image at arity n.
bool check_weight_criterion(Workspace& ws, const VarietySpec& v, int n);

// Verification data for a two-operation identity set against its
// one-operation counterpart.
struct DiIdentityReport {
    struct Entry {
        std::string label;
        bool vanishes = false;
    };
    std::vector<Entry> identities;  // tau(identity at x1,x2,x3) reduces to 0?
    int kernel_rank = 0;            // arity-3 consequence rank of the identities
    int expected_kernel = 0;        // di-span dim minus dim_dervar(base, 3)
    bool all_vanish = false;
    bool kernel_matches = false;
    bool ok() const { return all_vanish && kernel_matches; }
};

// Errors: PairMismatch unless dv is the two-operation partner of base.
DiIdentityReport check_di_identities(Workspace& ws, const VarietySpec& dv,
                                     const VarietySpec& base);

// Reads every product of an undecorated monomial as the "a times d(b)"
// operation.
DiMonomial all_prec(const Monomial& m);

// True iff each Novikov identity, read with its product as "a times d(b)",
// expands to zero in the weight -1 commutative-associative component.
bool check_novikov_embedding(Workspace& ws);

} // namespace opch
