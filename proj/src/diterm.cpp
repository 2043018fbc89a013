#include "opch/diterm.hpp"

#include <algorithm>
#include <functional>

namespace opch {

DiMonomial::DiMonomial() : DiMonomial(leaf(1)) {}

DiMonomial DiMonomial::leaf(int var_index) {
    if (var_index < 1) fail(ErrorCode::InvalidArgument, "var_index must be >= 1");
    auto n = std::make_shared<Node>();
    n->is_leaf = true;
    n->var = var_index;
    n->op = DiOp::Succ;
    n->arity = 1;
    return DiMonomial(std::move(n));
}

DiMonomial DiMonomial::node(DiOp op, const DiMonomial& l, const DiMonomial& r) {
    auto n = std::make_shared<Node>();
    n->is_leaf = false;
    n->var = 0;
    n->op = op;
    n->l = l.node_;
    n->r = r.node_;
    n->arity = l.arity() + r.arity();
    return DiMonomial(std::move(n));
}

int DiMonomial::var_index() const {
    if (!node_->is_leaf) fail(ErrorCode::Internal, "var_index() on an operation node");
    return node_->var;
}

DiOp DiMonomial::op() const {
    if (node_->is_leaf) fail(ErrorCode::Internal, "op() on a leaf");
    return node_->op;
}

DiMonomial DiMonomial::left() const {
    if (node_->is_leaf) fail(ErrorCode::Internal, "left() on a leaf");
    return DiMonomial(node_->l);
}

DiMonomial DiMonomial::right() const {
    if (node_->is_leaf) fail(ErrorCode::Internal, "right() on a leaf");
    return DiMonomial(node_->r);
}

namespace {

int di_shape_cmp(const DiMonomial& a, const DiMonomial& b) {
    if (a.is_leaf()) return 0;
    int la = a.left().arity(), lb = b.left().arity();
    if (la != lb) return la < lb ? -1 : 1;
    if (int c = di_shape_cmp(a.left(), b.left())) return c;
    return di_shape_cmp(a.right(), b.right());
}

void collect_di_leaves(const DiMonomial& m, std::vector<int>& out) {
    if (m.is_leaf()) {
        out.push_back(m.var_index());
        return;
    }
    collect_di_leaves(m.left(), out);
    collect_di_leaves(m.right(), out);
}

void collect_ops(const DiMonomial& m, std::vector<DiOp>& out) {
    if (m.is_leaf()) return;
    out.push_back(m.op());
    collect_ops(m.left(), out);
    collect_ops(m.right(), out);
}

} // namespace

int DiMonomial::compare(const DiMonomial& o) const {
    if (node_ == o.node_) return 0;
    if (arity() != o.arity()) return arity() < o.arity() ? -1 : 1;
    if (int c = di_shape_cmp(*this, o)) return c;
    std::vector<int> a, b;
    collect_di_leaves(*this, a);
    collect_di_leaves(o, b);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    std::vector<DiOp> oa, ob;
    collect_ops(*this, oa);
    collect_ops(o, ob);
    for (std::size_t i = 0; i < oa.size(); ++i)
        if (oa[i] != ob[i]) return oa[i] == DiOp::Succ ? -1 : 1;
    return 0;
}

void add_di_term(DiExpr& e, const DiMonomial& m, const Rat& c) {
    if (c == 0) return;
    auto [it, inserted] = e.try_emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0) e.erase(it);
    }
}

DiExpr di_expr_of(const DiMonomial& m, const Rat& c) {
    DiExpr e;
    add_di_term(e, m, c);
    return e;
}

DiExpr add(const DiExpr& a, const DiExpr& b) {
    DiExpr r = a;
    for (const auto& [m, c] : b) add_di_term(r, m, c);
    return r;
}

DiExpr sub(const DiExpr& a, const DiExpr& b) {
    DiExpr r = a;
    for (const auto& [m, c] : b) add_di_term(r, m, -c);
    return r;
}

DiExpr scale(const DiExpr& a, const Rat& c) {
    DiExpr r;
    if (c == 0) return r;
    for (const auto& [m, k] : a) r.emplace(m, k * c);
    return r;
}

Expr tau(const DiMonomial& m) {
    if (m.is_leaf()) return expr_of(Monomial::leaf(m.var_index()));
    Expr l = tau(m.left());
    Expr r = tau(m.right());
    if (m.op() == DiOp::Succ) return product(derive(l), r);
    return product(l, derive(r));
}

Expr tau(const DiExpr& e) {
    Expr r;
    for (const auto& [m, c] : e)
        for (const auto& [tm, tc] : tau(m)) add_term(r, tm, c * tc);
    return r;
}

std::vector<DiMonomial> enumerate_di_monomials(int n) {
    if (n < 1) fail(ErrorCode::InvalidArgument, "arity must be >= 1");
    // All op-labelled shapes over positional leaves 1..n, then permute leaves.
    std::function<std::vector<DiMonomial>(int, int)> gen = [&](int first, int count) {
        std::vector<DiMonomial> out;
        if (count == 1) {
            out.push_back(DiMonomial::leaf(first));
            return out;
        }
        for (int k = 1; k < count; ++k)
            for (const DiMonomial& l : gen(first, k))
                for (const DiMonomial& r : gen(first + k, count - k)) {
                    out.push_back(DiMonomial::node(DiOp::Succ, l, r));
                    out.push_back(DiMonomial::node(DiOp::Prec, l, r));
                }
        return out;
    };
    std::vector<DiMonomial> out;
    std::vector<int> p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i + 1;
    auto labelled = gen(1, n);
    std::map<int, int> var_map;
    do {
        for (int i = 0; i < n; ++i) var_map[i + 1] = p[static_cast<std::size_t>(i)];
        for (const DiMonomial& t : labelled) out.push_back(di_relabel(t, var_map));
    } while (std::next_permutation(p.begin(), p.end()));
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> di_leaves(const DiMonomial& m) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(m.arity()));
    collect_di_leaves(m, out);
    return out;
}

bool is_multilinear(const DiMonomial& m, int n) {
    if (m.arity() != n) return false;
    std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);
    for (int v : di_leaves(m)) {
        if (v < 1 || v > n) return false;
        if (seen[static_cast<std::size_t>(v)]) return false;
        seen[static_cast<std::size_t>(v)] = true;
    }
    return true;
}

DiMonomial di_relabel(const DiMonomial& m, const std::map<int, int>& var_map) {
    if (m.is_leaf()) {
        auto it = var_map.find(m.var_index());
        if (it == var_map.end())
            fail(ErrorCode::InvalidArgument,
                 "di_relabel: no image for x" + std::to_string(m.var_index()));
        return DiMonomial::leaf(it->second);
    }
    DiMonomial l = di_relabel(m.left(), var_map);
    DiMonomial r = di_relabel(m.right(), var_map);
    return DiMonomial::node(m.op(), l, r);
}

DiExpr di_relabel(const DiExpr& e, const std::map<int, int>& var_map) {
    DiExpr r;
    for (const auto& [m, c] : e) add_di_term(r, di_relabel(m, var_map), c);
    return r;
}

DiExpr di_subst_var(const DiMonomial& m, int var, const DiExpr& repl) {
    if (m.is_leaf()) {
        if (m.var_index() != var) return di_expr_of(m);
        return repl;
    }
    DiExpr l = di_subst_var(m.left(), var, repl);
    DiExpr r = di_subst_var(m.right(), var, repl);
    DiExpr out;
    for (const auto& [lm, lc] : l)
        for (const auto& [rm, rc] : r)
            add_di_term(out, DiMonomial::node(m.op(), lm, rm), lc * rc);
    return out;
}

DiExpr di_subst_var(const DiExpr& e, int var, const DiExpr& repl) {
    DiExpr out;
    for (const auto& [m, c] : e)
        for (const auto& [sm, sc] : di_subst_var(m, var, repl)) add_di_term(out, sm, c * sc);
    return out;
}

DiMonomial di_mirror(const DiMonomial& m) {
    if (m.is_leaf()) return m;
    DiMonomial l = di_mirror(m.left());
    DiMonomial r = di_mirror(m.right());
    DiOp flipped = m.op() == DiOp::Succ ? DiOp::Prec : DiOp::Succ;
    return DiMonomial::node(flipped, r, l);
}

DiExpr di_mirror(const DiExpr& e) {
    DiExpr r;
    for (const auto& [m, c] : e) add_di_term(r, di_mirror(m), c);
    return r;
}

} // namespace opch
