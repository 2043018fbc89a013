#include "opch/term.hpp"

#include <algorithm>
#include <atomic>
#include <functional>

namespace opch {

namespace {
std::atomic<int> g_max_der_order{16};
} // namespace

int max_der_order() { return g_max_der_order.load(); }

void set_max_der_order(int cap) {
    if (cap < 1) fail(ErrorCode::InvalidArgument, "derivation cap must be positive");
    g_max_der_order.store(cap);
}

Monomial::Monomial() : Monomial(leaf(1, 0)) {}

Monomial Monomial::leaf(Generator g) {
    if (g.var_index < 1) fail(ErrorCode::InvalidArgument, "var_index must be >= 1");
    if (g.der_order < 0) fail(ErrorCode::InvalidArgument, "der_order must be >= 0");
    auto n = std::make_shared<Node>();
    n->is_leaf = true;
    n->g = g;
    n->arity = 1;
    n->total_der = g.der_order;
    return Monomial(std::move(n));
}

Monomial Monomial::leaf(int var_index, int der_order) {
    return leaf(Generator{var_index, der_order});
}

Monomial Monomial::pair(const Monomial& l, const Monomial& r) {
    auto n = std::make_shared<Node>();
    n->is_leaf = false;
    n->l = l.node_;
    n->r = r.node_;
    n->arity = l.arity() + r.arity();
    n->total_der = l.total_der_order() + r.total_der_order();
    return Monomial(std::move(n));
}

const Generator& Monomial::gen() const {
    if (!node_->is_leaf) fail(ErrorCode::Internal, "gen() on a product node");
    return node_->g;
}

Monomial Monomial::left() const {
    if (node_->is_leaf) fail(ErrorCode::Internal, "left() on a leaf");
    return Monomial(node_->l);
}

Monomial Monomial::right() const {
    if (node_->is_leaf) fail(ErrorCode::Internal, "right() on a leaf");
    return Monomial(node_->r);
}

namespace {

// Shape order: smaller left subtree first, then left shape, then right shape.
int shape_cmp(const Monomial& a, const Monomial& b) {
    if (a.is_leaf()) return 0;  // equal arity: both leaves or both pairs
    int la = a.left().arity(), lb = b.left().arity();
    if (la != lb) return la < lb ? -1 : 1;
    if (int c = shape_cmp(a.left(), b.left())) return c;
    return shape_cmp(a.right(), b.right());
}

void collect_leaves(const Monomial& m, std::vector<Generator>& out) {
    if (m.is_leaf()) {
        out.push_back(m.gen());
        return;
    }
    collect_leaves(m.left(), out);
    collect_leaves(m.right(), out);
}

} // namespace

int Monomial::compare(const Monomial& o) const {
    if (node_ == o.node_) return 0;
    if (arity() != o.arity()) return arity() < o.arity() ? -1 : 1;
    if (int c = shape_cmp(*this, o)) return c;
    std::vector<Generator> a, b;
    collect_leaves(*this, a);
    collect_leaves(o, b);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].var_index != b[i].var_index)
            return a[i].var_index < b[i].var_index ? -1 : 1;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].der_order != b[i].der_order)
            return a[i].der_order > b[i].der_order ? -1 : 1;  // higher order first
    }
    return 0;
}

void add_term(Expr& e, const Monomial& m, const Rat& c) {
    if (c == 0) return;
    auto [it, inserted] = e.try_emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0) e.erase(it);
    }
}

Expr expr_of(const Monomial& m, const Rat& c) {
    Expr e;
    add_term(e, m, c);
    return e;
}

Expr add(const Expr& a, const Expr& b) {
    Expr r = a;
    for (const auto& [m, c] : b) add_term(r, m, c);
    return r;
}

Expr sub(const Expr& a, const Expr& b) {
    Expr r = a;
    for (const auto& [m, c] : b) add_term(r, m, -c);
    return r;
}

Expr scale(const Expr& a, const Rat& c) {
    Expr r;
    if (c == 0) return r;
    for (const auto& [m, k] : a) r.emplace(m, k * c);
    return r;
}

int weight(const Expr& e) {
    if (e.empty()) fail(ErrorCode::ZeroExpr, "weight of the zero expression is undefined");
    int w = e.begin()->first.weight();
    for (const auto& [m, c] : e) {
        if (m.weight() != w)
            fail(ErrorCode::MixedWeight, "expression mixes weights " + std::to_string(w) +
                                             " and " + std::to_string(m.weight()));
    }
    return w;
}

namespace {

Expr derive_node(const Monomial& m) {
    if (m.is_leaf()) {
        Generator g = m.gen();
        if (g.der_order + 1 > max_der_order())
            fail(ErrorCode::DerOrderCap,
                 "derivation order would exceed the cap of " + std::to_string(max_der_order()));
        ++g.der_order;
        return expr_of(Monomial::leaf(g));
    }
    Expr r;
    for (const auto& [dm, c] : derive_node(m.left()))
        add_term(r, Monomial::pair(dm, m.right()), c);
    for (const auto& [dm, c] : derive_node(m.right()))
        add_term(r, Monomial::pair(m.left(), dm), c);
    return r;
}

} // namespace

Expr derive(const Monomial& m) { return derive_node(m); }

Expr derive(const Expr& e) {
    Expr r;
    for (const auto& [m, c] : e)
        for (const auto& [dm, dc] : derive_node(m)) add_term(r, dm, c * dc);
    return r;
}

Expr product(const Expr& a, const Expr& b) {
    Expr r;
    for (const auto& [ma, ca] : a)
        for (const auto& [mb, cb] : b) add_term(r, Monomial::pair(ma, mb), ca * cb);
    return r;
}

std::vector<Generator> leaves(const Monomial& m) {
    std::vector<Generator> out;
    out.reserve(static_cast<std::size_t>(m.arity()));
    collect_leaves(m, out);
    return out;
}

bool is_multilinear(const Monomial& m, int n) {
    if (m.arity() != n) return false;
    std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);
    for (const Generator& g : leaves(m)) {
        if (g.var_index < 1 || g.var_index > n) return false;
        if (seen[static_cast<std::size_t>(g.var_index)]) return false;
        seen[static_cast<std::size_t>(g.var_index)] = true;
    }
    return true;
}

std::vector<Monomial> tree_shapes(int n) {
    if (n < 1) fail(ErrorCode::InvalidArgument, "arity must be >= 1");
    // shapes over leaf slots; label slots afterwards so sub-results are reusable
    std::function<std::vector<Monomial>(int, int)> gen = [&](int first, int count) {
        std::vector<Monomial> out;
        if (count == 1) {
            out.push_back(Monomial::leaf(first));
            return out;
        }
        for (int k = 1; k < count; ++k) {
            for (const Monomial& l : gen(first, k))
                for (const Monomial& r : gen(first + k, count - k))
                    out.push_back(Monomial::pair(l, r));
        }
        return out;
    };
    auto shapes = gen(1, n);
    std::sort(shapes.begin(), shapes.end());
    return shapes;
}

Monomial assign_leaves(const Monomial& shape, const std::vector<Generator>& gens) {
    if (static_cast<int>(gens.size()) != shape.arity())
        fail(ErrorCode::InvalidArgument, "leaf count mismatch in assign_leaves");
    std::size_t pos = 0;
    std::function<Monomial(const Monomial&)> walk = [&](const Monomial& m) -> Monomial {
        if (m.is_leaf()) return Monomial::leaf(gens[pos++]);
        Monomial l = walk(m.left());
        Monomial r = walk(m.right());
        return Monomial::pair(l, r);
    };
    return walk(shape);
}

namespace {

// Compositions of total into parts non-negative summands, in place.
void compositions(int total, int parts, std::vector<int>& cur,
                  const std::function<void(const std::vector<int>&)>& emit) {
    if (parts == 1) {
        cur.push_back(total);
        emit(cur);
        cur.pop_back();
        return;
    }
    for (int k = 0; k <= total; ++k) {
        cur.push_back(k);
        compositions(total - k, parts - 1, cur, emit);
        cur.pop_back();
    }
}

} // namespace

std::vector<Monomial> enumerate_multilinear(int n, int w) {
    if (n < 1) fail(ErrorCode::InvalidArgument, "arity must be >= 1");
    int total_der = n + w;
    if (total_der < 0)
        fail(ErrorCode::InvalidWeight,
             "no monomials of arity " + std::to_string(n) + " and weight " + std::to_string(w));
    if (total_der > max_der_order())
        fail(ErrorCode::DerOrderCap, "total derivation order " + std::to_string(total_der) +
                                         " exceeds the cap of " + std::to_string(max_der_order()));
    std::vector<Monomial> out;
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i + 1;
    std::vector<std::vector<int>> decos;
    std::vector<int> cur;
    compositions(total_der, n, cur, [&](const std::vector<int>& d) { decos.push_back(d); });
    for (const Monomial& shape : tree_shapes(n)) {
        std::vector<int> p = perm;
        do {
            for (const auto& deco : decos) {
                std::vector<Generator> gens(static_cast<std::size_t>(n));
                for (int i = 0; i < n; ++i) {
                    int v = p[static_cast<std::size_t>(i)];
                    gens[static_cast<std::size_t>(i)] = Generator{v, deco[static_cast<std::size_t>(v - 1)]};
                }
                out.push_back(assign_leaves(shape, gens));
            }
        } while (std::next_permutation(p.begin(), p.end()));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Monomial> enumerate_multilinear_plain(int n) {
    return enumerate_multilinear(n, -n);
}

Monomial relabel(const Monomial& m, const std::map<int, int>& var_map) {
    if (m.is_leaf()) {
        Generator g = m.gen();
        auto it = var_map.find(g.var_index);
        if (it == var_map.end())
            fail(ErrorCode::InvalidArgument,
                 "relabel: no image for x" + std::to_string(g.var_index));
        g.var_index = it->second;
        return Monomial::leaf(g);
    }
    Monomial l = relabel(m.left(), var_map);
    Monomial r = relabel(m.right(), var_map);
    return Monomial::pair(l, r);
}

Expr relabel(const Expr& e, const std::map<int, int>& var_map) {
    Expr r;
    for (const auto& [m, c] : e) add_term(r, relabel(m, var_map), c);
    return r;
}

Expr subst_var(const Monomial& m, int var, const Expr& repl) {
    if (m.is_leaf()) {
        const Generator& g = m.gen();
        if (g.var_index != var) return expr_of(m);
        Expr r = repl;
        for (int k = 0; k < g.der_order; ++k) r = derive(r);
        return r;
    }
    Expr l = subst_var(m.left(), var, repl);
    Expr r = subst_var(m.right(), var, repl);
    return product(l, r);
}

Expr subst_var(const Expr& e, int var, const Expr& repl) {
    Expr out;
    for (const auto& [m, c] : e)
        for (const auto& [sm, sc] : subst_var(m, var, repl)) add_term(out, sm, c * sc);
    return out;
}

Monomial mirror(const Monomial& m) {
    if (m.is_leaf()) return m;
    Monomial r = mirror(m.right());
    Monomial l = mirror(m.left());
    return Monomial::pair(r, l);
}

Expr mirror(const Expr& e) {
    Expr r;
    for (const auto& [m, c] : e) add_term(r, mirror(m), c);
    return r;
}

long catalan(int k) {
    if (k < 1) fail(ErrorCode::InvalidArgument, "catalan(k) needs k >= 1");
    // number of binary trees with k leaves
    long c = 1;
    for (int i = 0; i < k - 1; ++i) c = c * 2 * (2 * i + 1) / (i + 2);
    return c;
}

long shape_rank(const Monomial& m) {
    if (m.is_leaf()) return 0;
    int n = m.arity();
    int k = m.left().arity();
    long rank = 0;
    for (int j = 1; j < k; ++j) rank += catalan(j) * catalan(n - j);
    rank += shape_rank(m.left()) * catalan(n - k);
    rank += shape_rank(m.right());
    return rank;
}

} // namespace opch
