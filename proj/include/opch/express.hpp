#pragma once

#include <utility>
#include <vector>

#include "opch/diterm.hpp"
#include "opch/term.hpp"
#include "opch/varieties.hpp"

namespace opch {

enum class OpSide { L, R };

// A monomial seen as a chain of one-generator multiplications applied to a
// core generator: ops.front() is the outermost multiplication, (L, a) puts a
// on the left, (R, a) on the right.
struct OperatorWord {
    Generator core;
    std::vector<std::pair<OpSide, Generator>> ops;

    Monomial to_monomial() const;
    int arity() const { return static_cast<int>(ops.size()) + 1; }
    bool operator==(const OperatorWord& o) const;
};

using WordSum = std::vector<std::pair<Rat, OperatorWord>>;

// Counters for the constructive rewriters; solver_fallbacks counts subterms
// the recursion handed to the linear solver instead of rewriting itself.
struct ExpressStats {
    int solver_fallbacks = 0;
};

// Linear-algebra route: solve for a combination of two-operation monomials
// whose expansion lands in f's class. The result zeroes all free columns of
// the expansion matrix, so it is canonical for a given component.
// Errors: InvalidWeight unless weight(f) == -1; ArityMismatch; ArityTooLarge;
// NotInImage when f's class has no preimage.
DiExpr express_solver(Workspace& ws, const VarietySpec& v, const Expr& f);

// Constructive route for the two commutativity-style identities: arity <= 3
// by table, larger arities by peeling derivations off a caterpillar form.
// Pure recursion; never needs the solver.
DiExpr express_bicom(const Expr& f);

// Constructive routes for the alternative and assosymmetric identity sets.
// The recursion occasionally delegates an irregular subterm to the solver
// (counted in stats); the workspace supplies those solves.
DiExpr express_alt(Workspace& ws, const Expr& f, ExpressStats* stats = nullptr);
DiExpr express_assos(Workspace& ws, const Expr& f, ExpressStats* stats = nullptr);

// Rewrites m, modulo the alternative-algebra identities, into a sum whose
// every monomial has derived generators in both top-level factors.
// Errors: NoDerivation if no leaf is derived; InvalidArgument on a single
// derived leaf (both factors can then never be covered).
Expr distribute_derivations_alt(const Monomial& m);

// Rewrites m, modulo the alternative-algebra identities, into a sum of
// operator words (each multiplication by a single generator).
WordSum operator_form_alt(const Monomial& m);

// Rewrites the word, modulo the alternative-algebra identities, into a sum of
// operator words all cored at the leaf with the given variable index.
WordSum refocus_alt(const OperatorWord& w, int target_var);

} // namespace opch
