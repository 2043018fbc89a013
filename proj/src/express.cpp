#include "opch/express.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <optional>

#include "opch/errors.hpp"
#include "opch/parse.hpp"

namespace opch {

namespace {

// ---------------------------------------------------------------------------
// Word plumbing
// ---------------------------------------------------------------------------

Monomial wrap_ops(const Monomial& core,
                  const std::vector<std::pair<OpSide, Generator>>& ops) {
    Monomial cur = core;
    for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
        Monomial arg = Monomial::leaf(it->second);
        cur = it->first == OpSide::L ? Monomial::pair(arg, cur) : Monomial::pair(cur, arg);
    }
    return cur;
}

OperatorWord bare_word(const Generator& g) { return OperatorWord{g, {}}; }

OperatorWord with_outer(std::pair<OpSide, Generator> op, const OperatorWord& w) {
    OperatorWord out{w.core, {}};
    out.ops.reserve(w.ops.size() + 1);
    out.ops.push_back(std::move(op));
    out.ops.insert(out.ops.end(), w.ops.begin(), w.ops.end());
    return out;
}

// Word minus its outermost operator.
OperatorWord inner_word(const OperatorWord& w) {
    OperatorWord out{w.core, {}};
    out.ops.assign(w.ops.begin() + 1, w.ops.end());
    return out;
}

void add_word(WordSum& sum, const Rat& c, const OperatorWord& w) {
    if (c == Rat(0)) return;
    for (auto& [coeff, word] : sum) {
        if (word == w) {
            coeff += c;
            return;
        }
    }
    sum.emplace_back(c, w);
}

void add_scaled(WordSum& sum, const Rat& c, const WordSum& part) {
    for (const auto& [pc, pw] : part) add_word(sum, c * pc, pw);
}

WordSum map_outer(std::pair<OpSide, Generator> op, const WordSum& part, const Rat& c = Rat(1)) {
    WordSum out;
    for (const auto& [pc, pw] : part) add_word(out, c * pc, with_outer(op, pw));
    return out;
}

// ---------------------------------------------------------------------------
// Three-term rewrites of a product against the variety's two identities.
//
// right rule: a(bc) = r1 (ab)c + r2 (ba)c + r3 b(ac)
// left rule:  (ab)c = l1 a(bc) + l2 (ac)b + l3 a(cb)
// ---------------------------------------------------------------------------

struct Splits {
    std::array<int, 3> right;
    std::array<int, 3> left;
};

constexpr Splits kAltSplits{{1, 1, -1}, {1, -1, 1}};
constexpr Splits kAssosSplits{{1, -1, 1}, {1, 1, -1}};

Expr right_split(const Splits& s, const Monomial& a, const Monomial& b, const Monomial& c) {
    Expr e;
    add_term(e, Monomial::pair(Monomial::pair(a, b), c), Rat(s.right[0]));
    add_term(e, Monomial::pair(Monomial::pair(b, a), c), Rat(s.right[1]));
    add_term(e, Monomial::pair(b, Monomial::pair(a, c)), Rat(s.right[2]));
    return e;
}

Expr left_split(const Splits& s, const Monomial& a, const Monomial& b, const Monomial& c) {
    Expr e;
    add_term(e, Monomial::pair(a, Monomial::pair(b, c)), Rat(s.left[0]));
    add_term(e, Monomial::pair(Monomial::pair(a, c), b), Rat(s.left[1]));
    add_term(e, Monomial::pair(a, Monomial::pair(c, b)), Rat(s.left[2]));
    return e;
}

// ---------------------------------------------------------------------------
// Leaf bookkeeping
// ---------------------------------------------------------------------------

void collect_leaves(const Monomial& m, std::vector<Generator>& out) {
    if (m.is_leaf()) {
        out.push_back(m.gen());
        return;
    }
    collect_leaves(m.left(), out);
    collect_leaves(m.right(), out);
}

int derived_count(const Monomial& m) {
    std::vector<Generator> leaves;
    collect_leaves(m, leaves);
    int n = 0;
    for (const auto& g : leaves)
        if (g.der_order > 0) ++n;
    return n;
}

int max_var(const Monomial& m) {
    std::vector<Generator> leaves;
    collect_leaves(m, leaves);
    int v = 0;
    for (const auto& g : leaves) v = std::max(v, g.var_index);
    return v;
}

// ---------------------------------------------------------------------------
// Operator form: m as a sum of operator words
// ---------------------------------------------------------------------------

WordSum operator_form(const Monomial& m, const Splits& s, OpSide preferred = OpSide::R);
WordSum mix_left(const Monomial& x, const OperatorWord& w, const Splits& s);
WordSum mix_right(const OperatorWord& w, const Monomial& x, const Splits& s);

// `preferred` settles the ambiguous two-leaf product (a b), which reads as
// L_a b or R_b a: a chain keeps peeling in its own direction.
WordSum operator_form(const Monomial& m, const Splits& s, OpSide preferred) {
    if (m.is_leaf()) return {{Rat(1), bare_word(m.gen())}};
    Monomial a = m.left(), b = m.right();
    if (a.is_leaf() && b.is_leaf())
        return {{Rat(1), preferred == OpSide::L ? with_outer({OpSide::L, a.gen()}, bare_word(b.gen()))
                                                : with_outer({OpSide::R, b.gen()}, bare_word(a.gen()))}};
    if (b.is_leaf()) return map_outer({OpSide::R, b.gen()}, operator_form(a, s, OpSide::R));
    if (a.is_leaf()) return map_outer({OpSide::L, a.gen()}, operator_form(b, s, OpSide::L));
    WordSum out;
    for (const auto& [c, wb] : operator_form(b, s)) add_scaled(out, c, mix_left(a, wb, s));
    return out;
}

// x times (the monomial of w), as operator words. Recursion peels w's
// outermost operator; the word length strictly decreases.
WordSum mix_left(const Monomial& x, const OperatorWord& w, const Splits& s) {
    if (w.ops.empty()) return map_outer({OpSide::R, w.core}, operator_form(x, s));
    auto [side, arg] = w.ops.front();
    OperatorWord rest = inner_word(w);
    Monomial arg_m = Monomial::leaf(arg);
    WordSum out;
    if (side == OpSide::L) {
        // x(p C) -> r1 (xp)C + r2 (px)C + r3 p(xC)
        add_scaled(out, Rat(s.right[0]), mix_left(Monomial::pair(x, arg_m), rest, s));
        add_scaled(out, Rat(s.right[1]), mix_left(Monomial::pair(arg_m, x), rest, s));
        add_scaled(out, Rat(s.right[2]), map_outer({OpSide::L, arg}, mix_left(x, rest, s)));
    } else {
        // x(Cj) -> r1 (xC)j + r2 (Cx)j + r3 C(xj)
        add_scaled(out, Rat(s.right[0]), map_outer({OpSide::R, arg}, mix_left(x, rest, s)));
        add_scaled(out, Rat(s.right[1]), map_outer({OpSide::R, arg}, mix_right(rest, x, s)));
        add_scaled(out, Rat(s.right[2]), mix_right(rest, Monomial::pair(x, arg_m), s));
    }
    return out;
}

// (the monomial of w) times x.
WordSum mix_right(const OperatorWord& w, const Monomial& x, const Splits& s) {
    if (w.ops.empty()) return map_outer({OpSide::L, w.core}, operator_form(x, s));
    auto [side, arg] = w.ops.front();
    OperatorWord rest = inner_word(w);
    Monomial arg_m = Monomial::leaf(arg);
    WordSum out;
    if (side == OpSide::L) {
        // (pC)x -> l1 p(Cx) + l2 (px)C + l3 p(xC)
        add_scaled(out, Rat(s.left[0]), map_outer({OpSide::L, arg}, mix_right(rest, x, s)));
        add_scaled(out, Rat(s.left[1]), mix_left(Monomial::pair(arg_m, x), rest, s));
        add_scaled(out, Rat(s.left[2]), map_outer({OpSide::L, arg}, mix_left(x, rest, s)));
    } else {
        // (Cj)x -> l1 C(jx) + l2 (Cx)j + l3 C(xj)
        add_scaled(out, Rat(s.left[0]), mix_right(rest, Monomial::pair(arg_m, x), s));
        add_scaled(out, Rat(s.left[1]), map_outer({OpSide::R, arg}, mix_right(rest, x, s)));
        add_scaled(out, Rat(s.left[2]), mix_right(rest, Monomial::pair(x, arg_m), s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Refocusing: move a designated leaf into core position
// ---------------------------------------------------------------------------

WordSum cat_left(const OperatorWord& m, const OperatorWord& v, const Splits& s);
WordSum cat_right(const OperatorWord& v, const OperatorWord& m, const Splits& s);

// (monomial of m) times (monomial of v), cored at m's core throughout.
WordSum cat_left(const OperatorWord& m, const OperatorWord& v, const Splits& s) {
    if (v.ops.empty()) return {{Rat(1), with_outer({OpSide::R, v.core}, m)}};
    auto [side, arg] = v.ops.front();
    OperatorWord rest = inner_word(v);
    WordSum out;
    if (side == OpSide::L) {
        // M(aV) -> r1 (Ma)V + r2 (aM)V + r3 a(MV)
        add_scaled(out, Rat(s.right[0]), cat_left(with_outer({OpSide::R, arg}, m), rest, s));
        add_scaled(out, Rat(s.right[1]), cat_left(with_outer({OpSide::L, arg}, m), rest, s));
        add_scaled(out, Rat(s.right[2]), map_outer({OpSide::L, arg}, cat_left(m, rest, s)));
    } else {
        // M(Vj) -> r1 (MV)j + r2 (VM)j + r3 V(Mj)
        add_scaled(out, Rat(s.right[0]), map_outer({OpSide::R, arg}, cat_left(m, rest, s)));
        add_scaled(out, Rat(s.right[1]), map_outer({OpSide::R, arg}, cat_right(rest, m, s)));
        add_scaled(out, Rat(s.right[2]), cat_right(rest, with_outer({OpSide::R, arg}, m), s));
    }
    return out;
}

// (monomial of v) times (monomial of m), cored at m's core throughout.
WordSum cat_right(const OperatorWord& v, const OperatorWord& m, const Splits& s) {
    if (v.ops.empty()) return {{Rat(1), with_outer({OpSide::L, v.core}, m)}};
    auto [side, arg] = v.ops.front();
    OperatorWord rest = inner_word(v);
    WordSum out;
    if (side == OpSide::L) {
        // (aV)M -> l1 a(VM) + l2 (aM)V + l3 a(MV)
        add_scaled(out, Rat(s.left[0]), map_outer({OpSide::L, arg}, cat_right(rest, m, s)));
        add_scaled(out, Rat(s.left[1]), cat_left(with_outer({OpSide::L, arg}, m), rest, s));
        add_scaled(out, Rat(s.left[2]), map_outer({OpSide::L, arg}, cat_left(m, rest, s)));
    } else {
        // (Vj)M -> l1 V(jM) + l2 (VM)j + l3 V(Mj)
        add_scaled(out, Rat(s.left[0]), cat_right(rest, with_outer({OpSide::L, arg}, m), s));
        add_scaled(out, Rat(s.left[1]), map_outer({OpSide::R, arg}, cat_right(rest, m, s)));
        add_scaled(out, Rat(s.left[2]), cat_right(rest, with_outer({OpSide::R, arg}, m), s));
    }
    return out;
}

WordSum refocus(const OperatorWord& w, int target_var, const Splits& s) {
    if (w.core.var_index == target_var) return {{Rat(1), w}};
    if (w.ops.empty())
        fail(ErrorCode::InvalidArgument,
             "refocus: variable x" + std::to_string(target_var) + " is not a leaf of the word");
    auto [side, arg] = w.ops.front();
    OperatorWord rest = inner_word(w);
    if (arg.var_index == target_var)
        return side == OpSide::L ? cat_left(bare_word(arg), rest, s)
                                 : cat_right(rest, bare_word(arg), s);
    return map_outer(w.ops.front(), refocus(rest, target_var, s));
}

// ---------------------------------------------------------------------------
// Exact preimages and structural searches
// ---------------------------------------------------------------------------

// The cases where a monomial is literally the expansion of one two-operation
// monomial: underived leaves, (x' B), (A x').
std::optional<DiMonomial> exact_preimage(const Monomial& m) {
    if (m.is_leaf()) {
        if (m.gen().der_order != 0) return std::nullopt;
        return DiMonomial::leaf(m.gen().var_index);
    }
    Monomial a = m.left(), b = m.right();
    if (a.is_leaf() && a.gen().der_order == 1) {
        auto sub = exact_preimage(b);
        if (sub)
            return DiMonomial::node(DiOp::Succ, DiMonomial::leaf(a.gen().var_index), *sub);
        return std::nullopt;
    }
    if (b.is_leaf() && b.gen().der_order == 1) {
        auto sub = exact_preimage(a);
        if (sub)
            return DiMonomial::node(DiOp::Prec, *sub, DiMonomial::leaf(b.gen().var_index));
        return std::nullopt;
    }
    return std::nullopt;
}

// Smallest (by arity, then leftmost) proper subtree of weight -1 and arity
// >= 2; isolating it shrinks both halves of the problem.
void proper_w1_subtrees(const Monomial& m, bool is_root, std::vector<Monomial>& out) {
    if (m.is_leaf()) return;
    if (!is_root && m.weight() == -1) out.push_back(m);
    proper_w1_subtrees(m.left(), false, out);
    proper_w1_subtrees(m.right(), false, out);
}

std::optional<Monomial> find_w1_subtree(const Monomial& m) {
    std::vector<Monomial> found;
    proper_w1_subtrees(m, true, found);
    if (found.empty()) return std::nullopt;
    // Preorder collection preserves left-to-right order; stable pick by arity.
    auto best = found.begin();
    for (auto it = found.begin(); it != found.end(); ++it)
        if (it->arity() < best->arity()) best = it;
    return *best;
}

// Multilinearity makes the subtree unique, so replacing the first match is
// replacing the only match.
Monomial replace_subtree(const Monomial& m, const Monomial& what, const Monomial& with,
                         bool& done) {
    if (done) return m;
    if (m == what) {
        done = true;
        return with;
    }
    if (m.is_leaf()) return m;
    Monomial l = replace_subtree(m.left(), what, with, done);
    Monomial r = replace_subtree(m.right(), what, with, done);
    return Monomial::pair(l, r);
}

// ---------------------------------------------------------------------------
// Principal two-operation word of an operator word
// ---------------------------------------------------------------------------

// For a word whose operator arguments are all underived, the two-operation
// copy (R -> "cur followed by arg", L -> "arg before cur") expands to the
// word's own monomial plus terms of strictly lower core derivation order:
// each step differentiates the accumulated inner factor, and only the branch
// that always hits the core reproduces the word.
DiMonomial principal_word(const OperatorWord& w) {
    DiMonomial cur = DiMonomial::leaf(w.core.var_index);
    for (auto it = w.ops.rbegin(); it != w.ops.rend(); ++it) {
        if (it->second.der_order != 0)
            fail(ErrorCode::Internal, "principal_word: derived operator argument");
        DiMonomial arg = DiMonomial::leaf(it->second.var_index);
        cur = it->first == OpSide::R ? DiMonomial::node(DiOp::Succ, cur, arg)
                                     : DiMonomial::node(DiOp::Prec, arg, cur);
    }
    return cur;
}

// ---------------------------------------------------------------------------
// Shared recursion driver
// ---------------------------------------------------------------------------

struct RewriteCtx {
    const Splits* splits = nullptr;      // null for the closed-form branch
    Workspace* ws = nullptr;             // solver fallback (alt/assos only)
    const VarietySpec* variety = nullptr;
    ExpressStats* stats = nullptr;
    int depth = 0;
};

constexpr int kMaxDepth = 256;

DiExpr express_monomial_bicom(const Monomial& m, RewriteCtx& ctx);
DiExpr express_monomial_general(const Monomial& m, RewriteCtx& ctx);

DiExpr express_expr(const Expr& e, RewriteCtx& ctx, bool bicom) {
    DiExpr out;
    for (const auto& [m, c] : e) {
        DiExpr part = bicom ? express_monomial_bicom(m, ctx) : express_monomial_general(m, ctx);
        for (const auto& [dm, dc] : part) add_di_term(out, dm, dc * c);
    }
    return out;
}

struct DepthGuard {
    RewriteCtx& ctx;
    explicit DepthGuard(RewriteCtx& c) : ctx(c) {
        if (++ctx.depth > kMaxDepth)
            fail(ErrorCode::Internal, "rewriting recursion exceeded depth bound");
    }
    ~DepthGuard() { --ctx.depth; }
};

// Isolate the subtree (already known to have weight -1 and arity >= 2):
// rewrite the rest with a fresh underived atom in its place, rewrite the
// subtree, and graft the two answers.
DiExpr atomize(const Monomial& m, const Monomial& subtree, RewriteCtx& ctx, bool bicom) {
    int z = max_var(m) + 1;
    bool done = false;
    Monomial outer = replace_subtree(m, subtree, Monomial::leaf(z), done);
    if (!done) fail(ErrorCode::Internal, "atomize: subtree not found");
    DiExpr t_outer =
        bicom ? express_monomial_bicom(outer, ctx) : express_monomial_general(outer, ctx);
    DiExpr t_inner =
        bicom ? express_monomial_bicom(subtree, ctx) : express_monomial_general(subtree, ctx);
    return di_subst_var(t_outer, z, t_inner);
}

// Single derived leaf carrying every derivation: pass through operator form,
// refocus each word onto that leaf, then replace each word by its principal
// two-operation copy minus the lower-order expansion remainder.
DiExpr express_single_derived(const Monomial& m, int core_var, RewriteCtx& ctx) {
    DiExpr out;
    Expr remainder;
    WordSum words;
    for (const auto& [c, w] : operator_form(m, *ctx.splits))
        add_scaled(words, c, refocus(w, core_var, *ctx.splits));
    for (const auto& [c, w] : words) {
        DiMonomial principal = principal_word(w);
        add_di_term(out, principal, c);
        Expr expanded = tau(principal);
        add_term(expanded, w.to_monomial(), Rat(-1));
        for (const auto& [rm, rc] : expanded) add_term(remainder, rm, rc * c);
    }
    DiExpr rest = express_expr(remainder, ctx, false);
    for (const auto& [dm, dc] : rest) add_di_term(out, dm, -dc);
    return out;
}

// ---------------------------------------------------------------------------
// Arity-3 tables (right-caterpillar shapes; left caterpillars go through the
// mirror, which swaps each identity pair onto itself)
// ---------------------------------------------------------------------------

const std::map<std::array<int, 3>, DiExpr>& bicom_table() {
    static const std::map<std::array<int, 3>, DiExpr> table = {
        {{0, 1, 1}, parse_di_term("(x2 > (x1 < x3))")},
        {{1, 0, 1}, parse_di_term("(x1 > (x2 < x3))")},
        {{1, 1, 0}, parse_di_term("(x2 > (x1 > x3))")},
        {{2, 0, 0}, parse_di_term("(x2 < (x1 > x3)) - (x1 > (x2 < x3))")},
        {{0, 2, 0}, parse_di_term("(x1 < (x2 > x3)) - (x2 > (x1 < x3))")},
        {{0, 0, 2}, parse_di_term("(x1 < (x2 < x3)) - (x2 > (x1 < x3))")},
    };
    return table;
}

const std::map<std::array<int, 3>, DiExpr>& alt_table() {
    static const std::map<std::array<int, 3>, DiExpr> table = {
        {{0, 1, 1},
         parse_di_term("((x1 < x2) < x3) + ((x2 > x1) < x3) - (x2 > (x1 < x3))")},
        {{1, 0, 1}, parse_di_term("(x1 > (x2 < x3))")},
        // Exact: expanding x1 > (x2 > x3) gives x1'(x2'x3) on the nose. (The
        // row x2 > (x1 > x3) sometimes quoted here expands to x2'(x1'x3),
        // which is a different class: u(vw) = v(uw) is not an alternative-
        // algebra consequence.)
        {{1, 1, 0}, parse_di_term("(x1 > (x2 > x3))")},
        {{2, 0, 0},
         parse_di_term("((x1 > x2) > x3) - (x1 > (x2 > x3)) + ((x1 > x3) < x2)"
                       " - (x1 > (x3 < x2)) + ((x2 < x1) > x3) - (x2 > (x1 > x3))"
                       " + ((x2 > x3) < x1) - (x2 > (x3 < x1)) - (x2 < (x1 > x3))"
                       " + ((x2 < x1) < x3) + ((x1 > x2) < x3) - (x1 > (x2 < x3))")},
        {{0, 2, 0},
         parse_di_term("(x1 < (x2 > x3)) - ((x1 < x2) < x3) - ((x2 > x1) < x3)"
                       " + (x2 > (x1 < x3))")},
        {{0, 0, 2},
         parse_di_term("(x1 < (x2 < x3)) - ((x1 < x2) < x3) - ((x2 > x1) < x3)"
                       " + (x2 > (x1 < x3))")},
    };
    return table;
}

// Looks up an arity-3 monomial (either caterpillar shape, any variables) in a
// table written for the shape x1(x2 x3).
DiExpr table_lookup(const Monomial& m, const std::map<std::array<int, 3>, DiExpr>& table) {
    Monomial probe = m;
    bool mirrored = false;
    if (!probe.left().is_leaf()) {
        // shape (a b) c -> mirror to c (b a)
        probe = mirror(probe);
        mirrored = true;
    }
    Generator a = probe.left().gen();
    Generator b = probe.right().left().gen();
    Generator c = probe.right().right().gen();
    auto it = table.find({a.der_order, b.der_order, c.der_order});
    if (it == table.end())
        fail(ErrorCode::Internal, "table_lookup: unexpected derivation pattern");
    DiExpr row = di_relabel(it->second, {{1, a.var_index}, {2, b.var_index}, {3, c.var_index}});
    return mirrored ? di_mirror(row) : row;
}

// ---------------------------------------------------------------------------
// Closed-form recursion for the two commutativity-style identities
// ---------------------------------------------------------------------------

// A caterpillar word with the given left-child and right-child generator
// sets: right multipliers innermost (ascending from the inside), left
// multipliers outside (ascending from the outside).
std::vector<std::pair<OpSide, Generator>> caterpillar_ops(std::vector<Generator> lefts,
                                                          std::vector<Generator> rights) {
    std::sort(lefts.begin(), lefts.end());
    std::sort(rights.begin(), rights.end());
    std::vector<std::pair<OpSide, Generator>> ops;
    for (const auto& g : lefts) ops.emplace_back(OpSide::L, g);
    for (auto it = rights.rbegin(); it != rights.rend(); ++it) ops.emplace_back(OpSide::R, *it);
    return ops;
}

DiExpr express_monomial_bicom(const Monomial& m, RewriteCtx& ctx) {
    DepthGuard guard(ctx);
    int n = m.arity();
    if (n <= 2) {
        auto exact = exact_preimage(m);
        if (!exact) fail(ErrorCode::Internal, "weight -1 at arity <= 2 is always exact");
        return di_expr_of(*exact);
    }
    if (n == 3) return table_lookup(m, bicom_table());
    if (auto exact = exact_preimage(m)) return di_expr_of(*exact);

    std::vector<Generator> lefts, rights;
    bicom_class_split(m, lefts, rights);

    std::vector<Generator> derived;
    for (const auto& g : lefts)
        if (g.der_order > 0) derived.push_back(g);
    for (const auto& g : rights)
        if (g.der_order > 0) derived.push_back(g);

    auto on_left = [&](const Generator& g) {
        return std::find(lefts.begin(), lefts.end(), g) != lefts.end();
    };
    auto erase_one = [](std::vector<Generator>& v, const Generator& g) {
        v.erase(std::find(v.begin(), v.end(), g));
    };

    if (derived.size() == 1) {
        // Rebuild the class as a word cored at the derived leaf and peel it.
        // The innermost operator must put the core on its recorded side, so
        // the opposite side's multipliers go innermost.
        Generator z = derived[0];
        bool z_left = on_left(z);
        std::vector<Generator> l2 = lefts, r2 = rights;
        erase_one(z_left ? l2 : r2, z);
        std::sort(l2.begin(), l2.end());
        std::sort(r2.begin(), r2.end());
        std::vector<std::pair<OpSide, Generator>> ops;
        if (z_left) {
            for (const auto& g : l2) ops.emplace_back(OpSide::L, g);
            for (auto it = r2.rbegin(); it != r2.rend(); ++it)
                ops.emplace_back(OpSide::R, *it);
        } else {
            for (auto it = r2.rbegin(); it != r2.rend(); ++it)
                ops.emplace_back(OpSide::R, *it);
            for (const auto& g : l2) ops.emplace_back(OpSide::L, g);
        }
        OperatorWord w{z, ops};
        if (ops.empty() || ops.back().first != (z_left ? OpSide::R : OpSide::L))
            fail(ErrorCode::Internal, "class has no multiplier opposite the core");
        DiMonomial principal = principal_word(w);
        Expr remainder = tau(principal);
        add_term(remainder, w.to_monomial(), Rat(-1));
        DiExpr out = di_expr_of(principal);
        DiExpr rest = express_expr(remainder, ctx, true);
        for (const auto& [dm, dc] : rest) add_di_term(out, dm, -dc);
        return out;
    }

    // Several derived leaves: pair the first derived leaf (highest derivation
    // order, then smallest variable) that has an underived leaf across the
    // root with the smallest such, express the pair as one two-operation
    // product, and recurse on the shorter monomial with the pair atomized.
    std::sort(derived.begin(), derived.end(), [](const Generator& a, const Generator& b) {
        if (a.der_order != b.der_order) return a.der_order > b.der_order;
        return a.var_index < b.var_index;
    });
    std::optional<Generator> star, partner;
    for (const auto& d : derived) {
        const std::vector<Generator>& opposite = on_left(d) ? rights : lefts;
        for (const auto& u : opposite) {
            if (u.der_order != 0) continue;
            if (!partner || u.var_index < partner->var_index) partner = u;
        }
        if (partner) {
            star = d;
            break;
        }
    }
    if (!star)
        fail(ErrorCode::Internal, "no derived leaf faces an underived one across the root");

    bool star_left = on_left(*star);
    int k = star->der_order - 1;
    Generator bare_star{star->var_index, 0};
    Monomial pair_m = star_left
                          ? Monomial::pair(Monomial::leaf(*star), Monomial::leaf(*partner))
                          : Monomial::pair(Monomial::leaf(*partner), Monomial::leaf(*star));
    Monomial seed = star_left ? Monomial::pair(Monomial::leaf(bare_star.var_index, 1),
                                               Monomial::leaf(*partner))
                              : Monomial::pair(Monomial::leaf(*partner),
                                               Monomial::leaf(bare_star.var_index, 1));
    DiMonomial pair_di =
        star_left ? DiMonomial::node(DiOp::Succ, DiMonomial::leaf(star->var_index),
                                     DiMonomial::leaf(partner->var_index))
                  : DiMonomial::node(DiOp::Prec, DiMonomial::leaf(partner->var_index),
                                     DiMonomial::leaf(star->var_index));

    std::vector<Generator> l2 = lefts, r2 = rights;
    erase_one(star_left ? l2 : r2, *star);
    erase_one(star_left ? r2 : l2, *partner);
    auto ops = caterpillar_ops(l2, r2);
    int z = max_var(m) + 1;
    Monomial hole = wrap_ops(Monomial::leaf(z, k), ops);
    Monomial paired = wrap_ops(pair_m, ops);

    // seed expands to the pair plus binomial cross terms of lower derivation
    // order on the starred leaf; subtracting them reduces the measure.
    Expr remainder = subst_var(expr_of(hole), z, expr_of(seed));
    add_term(remainder, paired, Rat(-1));

    DiExpr t_hole = express_monomial_bicom(hole, ctx);
    DiExpr out = di_subst_var(t_hole, z, di_expr_of(pair_di));
    DiExpr rest = express_expr(remainder, ctx, true);
    for (const auto& [dm, dc] : rest) add_di_term(out, dm, -dc);
    return out;
}

// ---------------------------------------------------------------------------
// General recursion (alternative / assosymmetric identity sets)
// ---------------------------------------------------------------------------

// Both top-level factors must carry a derivation; rewrite against the
// identities until they do.
Expr ensure_both_derived(const Monomial& m, const Splits& s) {
    Monomial a = m.left(), b = m.right();
    int da = derived_count(a), db = derived_count(b);
    if (da >= 1 && db >= 1) return expr_of(m);
    Expr out;
    if (da == 0) {
        for (const auto& [pq, c] : ensure_both_derived(b, s)) {
            Expr split = right_split(s, a, pq.left(), pq.right());
            for (const auto& [sm, sc] : split) add_term(out, sm, sc * c);
        }
    } else {
        for (const auto& [pq, c] : ensure_both_derived(a, s)) {
            Expr split = left_split(s, pq.left(), pq.right(), b);
            for (const auto& [sm, sc] : split) add_term(out, sm, sc * c);
        }
    }
    return out;
}

// A word usable for isolation: some strict inner segment (the innermost i
// operators plus the core, 2 <= i+1 <= arity-1) forms a weight -1 subtree.
bool has_w1_segment(const OperatorWord& w) {
    int weight = w.core.der_order - 1;
    int size = static_cast<int>(w.ops.size());
    for (int i = 1; i + 1 < size + 1; ++i) {
        weight += w.ops[static_cast<std::size_t>(size - i)].second.der_order - 1;
        if (weight == -1) return true;
    }
    return false;
}

DiExpr solver_fallback(const Monomial& m, RewriteCtx& ctx);

DiExpr express_monomial_general(const Monomial& m, RewriteCtx& ctx) {
    DepthGuard guard(ctx);
    int n = m.arity();
    if (n <= 2) {
        auto exact = exact_preimage(m);
        if (!exact) fail(ErrorCode::Internal, "weight -1 at arity <= 2 is always exact");
        return di_expr_of(*exact);
    }
    if (n == 3 && ctx.splits == &kAltSplits) return table_lookup(m, alt_table());
    if (auto exact = exact_preimage(m)) return di_expr_of(*exact);

    if (auto subtree = find_w1_subtree(m)) return atomize(m, *subtree, ctx, false);

    std::vector<Generator> leaves;
    collect_leaves(m, leaves);
    std::vector<Generator> derived;
    for (const auto& g : leaves)
        if (g.der_order > 0) derived.push_back(g);

    if (derived.size() == 1) return express_single_derived(m, derived[0].var_index, ctx);

    // Several derived leaves and no isolable subtree yet. First balance the
    // top factors, then look for a refocus target whose words all expose a
    // weight -1 segment to isolate.
    if (derived_count(m.left()) == 0 || derived_count(m.right()) == 0)
        return express_expr(ensure_both_derived(m, *ctx.splits), ctx, false);

    std::sort(derived.begin(), derived.end(), [](const Generator& a, const Generator& b) {
        if (a.der_order != b.der_order) return a.der_order > b.der_order;
        return a.var_index < b.var_index;
    });
    std::vector<int> targets;
    for (const auto& g : derived) targets.push_back(g.var_index);
    for (const auto& g : leaves)
        if (g.der_order == 0) targets.push_back(g.var_index);
    std::sort(targets.begin() + static_cast<long>(derived.size()), targets.end());

    WordSum base = operator_form(m, *ctx.splits);
    for (int target : targets) {
        WordSum refocused;
        for (const auto& [c, w] : base) add_scaled(refocused, c, refocus(w, target, *ctx.splits));
        bool ok = !refocused.empty();
        for (const auto& [c, w] : refocused)
            if (!has_w1_segment(w)) {
                ok = false;
                break;
            }
        if (!ok) continue;
        DiExpr out;
        for (const auto& [c, w] : refocused) {
            Monomial wm = w.to_monomial();
            auto subtree = find_w1_subtree(wm);
            if (!subtree) fail(ErrorCode::Internal, "segment check promised a subtree");
            DiExpr part = atomize(wm, *subtree, ctx, false);
            for (const auto& [dm, dc] : part) add_di_term(out, dm, dc * c);
        }
        return out;
    }

    return solver_fallback(m, ctx);
}

DiExpr solver_fallback(const Monomial& m, RewriteCtx& ctx) {
    if (!ctx.ws || !ctx.variety)
        fail(ErrorCode::Internal, "rewriting dead end with no solver available");
    if (ctx.stats) ++ctx.stats->solver_fallbacks;
    // The solver wants variables 1..n; rename, solve, rename back.
    std::vector<Generator> leaves;
    collect_leaves(m, leaves);
    std::vector<int> vars;
    for (const auto& g : leaves) vars.push_back(g.var_index);
    std::sort(vars.begin(), vars.end());
    std::map<int, int> to_dense, from_dense;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        to_dense[vars[i]] = static_cast<int>(i) + 1;
        from_dense[static_cast<int>(i) + 1] = vars[i];
    }
    Expr dense = expr_of(relabel(m, to_dense));
    DiExpr solved = express_solver(*ctx.ws, *ctx.variety, dense);
    return di_relabel(solved, from_dense);
}

// ---------------------------------------------------------------------------
// Input validation shared by the public entry points
// ---------------------------------------------------------------------------

int validate_input(const Expr& f) {
    int w = weight(f);  // throws ZeroExpr on empty, MixedWeight when inconsistent
    if (w != -1)
        fail(ErrorCode::InvalidWeight,
             "only weight -1 elements can be expressed, got weight " + std::to_string(w));
    int n = f.begin()->first.arity();
    for (const auto& [m, c] : f)
        if (!is_multilinear(m, n))
            fail(ErrorCode::ArityMismatch,
                 "input must be multilinear in x1..x" + std::to_string(n));
    return n;
}

} // namespace

// ---------------------------------------------------------------------------
// Public surface
// ---------------------------------------------------------------------------

Monomial OperatorWord::to_monomial() const { return wrap_ops(Monomial::leaf(core), ops); }

bool OperatorWord::operator==(const OperatorWord& o) const {
    return core == o.core && ops == o.ops;
}

DiExpr express_solver(Workspace& ws, const VarietySpec& v, const Expr& f) {
    int n = validate_input(f);
    const Component& comp = ws.component(v.name, n, -1);
    std::vector<Rat> sol = ws.solve_expansion(v.name, n, comp.coords(f));
    const std::vector<DiMonomial>& ambient = ws.expansion(v.name, n).di_ambient;
    DiExpr out;
    for (std::size_t j = 0; j < sol.size(); ++j)
        if (sol[j] != Rat(0)) add_di_term(out, ambient[j], sol[j]);
    return out;
}

DiExpr express_bicom(const Expr& f) {
    validate_input(f);
    RewriteCtx ctx;
    return express_expr(f, ctx, true);
}

DiExpr express_alt(Workspace& ws, const Expr& f, ExpressStats* stats) {
    int n = validate_input(f);
    if (n > ws.max_arity())
        fail(ErrorCode::ArityTooLarge,
             "arity " + std::to_string(n) + " exceeds the workspace bound");
    RewriteCtx ctx;
    ctx.splits = &kAltSplits;
    ctx.ws = &ws;
    ctx.variety = &catalog("Alt");
    ctx.stats = stats;
    return express_expr(f, ctx, false);
}

DiExpr express_assos(Workspace& ws, const Expr& f, ExpressStats* stats) {
    int n = validate_input(f);
    if (n > ws.max_arity())
        fail(ErrorCode::ArityTooLarge,
             "arity " + std::to_string(n) + " exceeds the workspace bound");
    RewriteCtx ctx;
    ctx.splits = &kAssosSplits;
    ctx.ws = &ws;
    ctx.variety = &catalog("Assos");
    ctx.stats = stats;
    return express_expr(f, ctx, false);
}

Expr distribute_derivations_alt(const Monomial& m) {
    int d = derived_count(m);
    if (d == 0)
        fail(ErrorCode::NoDerivation, "no derived generator to distribute");
    if (d == 1)
        fail(ErrorCode::InvalidArgument,
             "a single derived generator cannot reach both top-level factors");
    return ensure_both_derived(m, kAltSplits);
}

WordSum operator_form_alt(const Monomial& m) { return operator_form(m, kAltSplits); }

WordSum refocus_alt(const OperatorWord& w, int target_var) {
    return refocus(w, target_var, kAltSplits);
}

} // namespace opch
