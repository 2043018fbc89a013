#pragma once

#include <map>
#include <vector>

#include "opch/term.hpp"

namespace opch {

// The two derived products. In text form '>' is ≻ (left factor derived) and
// '<' is ≺ (right factor derived); '>' sorts before '<'.
enum class DiOp { Succ, Prec };

// Binary tree over undecorated variables, internal nodes labelled ≻ or ≺.
// Immutable; cheap to copy.
//
// Total order: arity ascending; tree shape (smaller left subtree first,
// recursively); leaf var_index sequence lex ascending; operation sequence in
// preorder with ≻ before ≺.
class DiMonomial {
public:
    DiMonomial();  // x1
    static DiMonomial leaf(int var_index);
    static DiMonomial node(DiOp op, const DiMonomial& l, const DiMonomial& r);

    bool is_leaf() const { return node_->is_leaf; }
    int var_index() const;   // leaf only
    DiOp op() const;         // node only
    DiMonomial left() const;  // node only
    DiMonomial right() const; // node only
    int arity() const { return node_->arity; }

    int compare(const DiMonomial& o) const;
    bool operator==(const DiMonomial& o) const { return compare(o) == 0; }
    bool operator<(const DiMonomial& o) const { return compare(o) < 0; }

private:
    struct Node {
        bool is_leaf;
        int var;
        DiOp op;
        std::shared_ptr<const Node> l, r;
        int arity;
    };
    explicit DiMonomial(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

using DiExpr = std::map<DiMonomial, Rat>;

void add_di_term(DiExpr& e, const DiMonomial& m, const Rat& c);
DiExpr di_expr_of(const DiMonomial& m, const Rat& c = Rat(1));
DiExpr add(const DiExpr& a, const DiExpr& b);
DiExpr sub(const DiExpr& a, const DiExpr& b);
DiExpr scale(const DiExpr& a, const Rat& c);
inline bool is_zero(const DiExpr& e) { return e.empty(); }

// Expansion into the derivation alphabet:
//   tau(leaf) = the undecorated leaf, tau(s ≻ t) = d(tau(s))·tau(t),
//   tau(s ≺ t) = tau(s)·d(tau(t)).
// Every monomial of tau(t) for a multilinear arity-n input has weight −1.
Expr tau(const DiMonomial& m);
Expr tau(const DiExpr& e);

// All multilinear ≻/≺ monomials on x_1..x_n: every shape, every operation
// labelling, every leaf permutation; sorted; count C_{n−1}·2^{n−1}·n!.
std::vector<DiMonomial> enumerate_di_monomials(int n);

// Variables present at the leaves, left to right.
std::vector<int> di_leaves(const DiMonomial& m);
bool is_multilinear(const DiMonomial& m, int n);

// Renames variables; every leaf must be a key of the map.
DiMonomial di_relabel(const DiMonomial& m, const std::map<int, int>& var_map);
DiExpr di_relabel(const DiExpr& e, const std::map<int, int>& var_map);

// Grafts `repl` in place of every leaf `var` (at most one in multilinear use).
DiExpr di_subst_var(const DiMonomial& m, int var, const DiExpr& repl);
DiExpr di_subst_var(const DiExpr& e, int var, const DiExpr& repl);

// Reverses every product and swaps ≻ with ≺, so that
// tau(di_mirror(t)) = mirror(tau(t)).
DiMonomial di_mirror(const DiMonomial& m);
DiExpr di_mirror(const DiExpr& e);

} // namespace opch
