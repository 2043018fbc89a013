#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "opch/errors.hpp"
#include "opch/rational.hpp"

namespace opch {

// A decorated variable x_i^{(j)}: var_index i >= 1, derivation order j >= 0.
// Weight of a single generator is j - 1.
struct Generator {
    int var_index = 1;
    int der_order = 0;

    friend auto operator<=>(const Generator&, const Generator&) = default;
};

// Global cap on derivation orders produced by derive()/parsing. Default 16.
int max_der_order();
void set_max_der_order(int cap);

// Non-associative monomial: a binary tree whose leaves are Generators.
// Immutable; cheap to copy (shared structure).
//
// Total order (used everywhere a canonical sequence is needed):
//   1. arity ascending;
//   2. tree shape, smaller left subtree first, recursively;
//   3. leaf var_index sequence, lexicographic ascending;
//   4. leaf der_order sequence: at the first differing position the higher
//      derivation order sorts first.
class Monomial {
public:
    Monomial();  // x1
    static Monomial leaf(Generator g);
    static Monomial leaf(int var_index, int der_order = 0);
    static Monomial pair(const Monomial& l, const Monomial& r);

    bool is_leaf() const { return node_->is_leaf; }
    const Generator& gen() const;  // leaf only
    Monomial left() const;         // pair only
    Monomial right() const;        // pair only

    int arity() const { return node_->arity; }
    int total_der_order() const { return node_->total_der; }
    // wt(x^{(j)}) = j - 1, additive over the tree.
    int weight() const { return node_->total_der - node_->arity; }

    int compare(const Monomial& o) const;
    bool operator==(const Monomial& o) const { return compare(o) == 0; }
    bool operator<(const Monomial& o) const { return compare(o) < 0; }

private:
    struct Node {
        bool is_leaf;
        Generator g;
        std::shared_ptr<const Node> l, r;
        int arity;
        int total_der;
    };
    explicit Monomial(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

// Finite linear combination of monomials with rational coefficients.
// Canonical form: keys in the total Monomial order, no zero coefficients.
using Expr = std::map<Monomial, Rat>;

// Accumulates c * m into e, dropping the term if the coefficient cancels.
void add_term(Expr& e, const Monomial& m, const Rat& c);
Expr expr_of(const Monomial& m, const Rat& c = Rat(1));
Expr add(const Expr& a, const Expr& b);
Expr sub(const Expr& a, const Expr& b);
Expr scale(const Expr& a, const Rat& c);
inline bool is_zero(const Expr& e) { return e.empty(); }

// Weight of a homogeneous expression.
// Errors: ZeroExpr on the empty sum, MixedWeight if terms disagree.
int weight(const Expr& e);

// Formal derivation: Leibniz over products, bumps der_order at leaves.
// Errors: DerOrderCap when a leaf would exceed the configured cap.
Expr derive(const Monomial& m);
Expr derive(const Expr& e);

// Bilinear product.
Expr product(const Expr& a, const Expr& b);

// Leaves in left-to-right order.
std::vector<Generator> leaves(const Monomial& m);
// True if the leaf variables are exactly {1..n}, each occurring once.
bool is_multilinear(const Monomial& m, int n);

// All multilinear monomials on x_1..x_n of total weight w: every binary tree
// shape, every leaf permutation, every decoration vector with sum n + w.
// Sorted in the total Monomial order.
// Errors: InvalidWeight if n + w < 0; DerOrderCap if n + w exceeds the cap.
std::vector<Monomial> enumerate_multilinear(int n, int w);
// Undecorated variant (all derivation orders zero).
std::vector<Monomial> enumerate_multilinear_plain(int n);

// Binary tree shapes with n leaves labelled x_1..x_n positionally.
std::vector<Monomial> tree_shapes(int n);
// Rebuilds m with its i-th leaf (left-to-right) replaced by gens[i].
Monomial assign_leaves(const Monomial& shape, const std::vector<Generator>& gens);

// Renames variables; every leaf's var_index must be a key of the map.
Monomial relabel(const Monomial& m, const std::map<int, int>& var_map);
Expr relabel(const Expr& e, const std::map<int, int>& var_map);

// Replaces the leaf with var_index `var` (derivation order k) by derive^k(repl).
// Monomials not containing `var` pass through unchanged.
Expr subst_var(const Monomial& m, int var, const Expr& repl);
Expr subst_var(const Expr& e, int var, const Expr& repl);

// Reverses every product in the tree.
Monomial mirror(const Monomial& m);
Expr mirror(const Expr& e);

// Number of binary trees with k leaves (the (k-1)-st Catalan number).
long catalan(int k);
// Rank of the tree shape within all shapes of the same arity (order above).
long shape_rank(const Monomial& m);

} // namespace opch
