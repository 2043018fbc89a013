#include "opch/varieties.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include "json.hpp"
#include "opch/parse.hpp"

namespace opch {

namespace {

Monomial lf(int v) { return Monomial::leaf(v); }
Monomial pr(const Monomial& a, const Monomial& b) { return Monomial::pair(a, b); }

Expr combo(std::initializer_list<std::pair<int, Monomial>> terms) {
    Expr e;
    for (const auto& [c, m] : terms) add_term(e, m, Rat(c));
    return e;
}

DiMonomial dl(int v) { return DiMonomial::leaf(v); }
DiMonomial sn(const DiMonomial& a, const DiMonomial& b) {
    return DiMonomial::node(DiOp::Succ, a, b);
}
DiMonomial pn(const DiMonomial& a, const DiMonomial& b) {
    return DiMonomial::node(DiOp::Prec, a, b);
}

DiExpr di_combo(std::initializer_list<std::pair<int, DiMonomial>> terms) {
    DiExpr e;
    for (const auto& [c, m] : terms) add_di_term(e, m, Rat(c));
    return e;
}

Identity one_op(std::string label, int count, Expr r) {
    Identity id;
    id.label = std::move(label);
    id.num_ops = NumOps::One;
    id.placeholder_count = count;
    id.relation = std::move(r);
    return id;
}

Identity two_op(std::string label, DiExpr r) {
    Identity id;
    id.label = std::move(label);
    id.num_ops = NumOps::Two;
    id.placeholder_count = 3;
    id.di_relation = std::move(r);
    return id;
}

std::map<std::string, VarietySpec> build_catalog() {
    const Monomial a = lf(1), b = lf(2), c = lf(3);
    const DiMonomial da = dl(1), db = dl(2), dc = dl(3);

    // Shared one-operation relations, all written as "left side - right side".
    Expr comm = combo({{1, pr(a, b)}, {-1, pr(b, a)}});
    Expr assoc = combo({{1, pr(pr(a, b), c)}, {-1, pr(a, pr(b, c))}});
    // (ab)c - a(bc) = -(ba)c + b(ac)
    Expr lasym = combo({{1, pr(pr(a, b), c)},
                        {-1, pr(a, pr(b, c))},
                        {1, pr(pr(b, a), c)},
                        {-1, pr(b, pr(a, c))}});
    // (ab)c - a(bc) = -(ac)b + a(cb)
    Expr rasym = combo({{1, pr(pr(a, b), c)},
                        {-1, pr(a, pr(b, c))},
                        {1, pr(pr(a, c), b)},
                        {-1, pr(a, pr(c, b))}});
    // associator symmetries (a,b,c) = (b,a,c) and (a,b,c) = (a,c,b)
    Expr assos_l = combo({{1, pr(pr(a, b), c)},
                          {-1, pr(a, pr(b, c))},
                          {-1, pr(pr(b, a), c)},
                          {1, pr(b, pr(a, c))}});
    Expr assos_r = combo({{1, pr(pr(a, b), c)},
                          {-1, pr(a, pr(b, c))},
                          {-1, pr(pr(a, c), b)},
                          {1, pr(a, pr(c, b))}});
    // a(bc) = b(ac) and (ab)c = (ac)b
    Expr lcom = combo({{1, pr(a, pr(b, c))}, {-1, pr(b, pr(a, c))}});
    Expr rcom = combo({{1, pr(pr(a, b), c)}, {-1, pr(pr(a, c), b)}});
    // (ab)c = a(bc) + a(cb)
    Expr zinb = combo({{1, pr(pr(a, b), c)}, {-1, pr(a, pr(b, c))}, {-1, pr(a, pr(c, b))}});

    std::map<std::string, VarietySpec> cat;
    auto put = [&cat](VarietySpec v) { cat.emplace(v.name, std::move(v)); };

    {
        VarietySpec v;
        v.name = "Com";
        v.identities = {one_op("comm", 2, comm), one_op("assoc", 3, assoc)};
        put(std::move(v));
    }
    {
        VarietySpec v;
        v.name = "As";
        v.identities = {one_op("assoc", 3, assoc)};
        put(std::move(v));
    }
    {
        VarietySpec v;
        v.name = "Alt";
        v.identities = {one_op("left-alternative", 3, lasym),
                        one_op("right-alternative", 3, rasym)};
        v.partner = "DerAlt";
        put(std::move(v));
    }
    {
        VarietySpec v;
        v.name = "Assos";
        v.identities = {one_op("assoc-left-sym", 3, assos_l),
                        one_op("assoc-right-sym", 3, assos_r)};
        v.partner = "DerAssos";
        put(std::move(v));
    }
    {
        VarietySpec v;
        v.name = "BiCom";
        v.strategy = NfStrategy::ClosedFormBiCom;
        v.identities = {one_op("left-comm", 3, lcom), one_op("right-comm", 3, rcom)};
        v.partner = "DerBiCom";
        put(std::move(v));
    }
    {
        VarietySpec v;
        v.name = "Nov";
        v.identities = {one_op("right-comm", 3, rcom), one_op("left-sym", 3, assos_l)};
        put(std::move(v));
    }
    {
        VarietySpec v;
        v.name = "Zinb";
        v.identities = {one_op("zinbiel", 3, zinb)};
        put(std::move(v));
    }

    {
        VarietySpec v;
        v.name = "DerAlt";
        v.num_ops = NumOps::Two;
        v.partner = "Alt";
        // (a>b)<c - a>(b<c) = -(c>b)<a + c>(b<a)
        DiExpr shrt = di_combo({{1, pn(sn(da, db), dc)},
                                {-1, sn(da, pn(db, dc))},
                                {1, pn(sn(dc, db), da)},
                                {-1, sn(dc, pn(db, da))}});
        // (a<b)>c - a>(b>c) + (a>c)<b - a>(c<b) - a<(b>c) + (a<b)<c
        //   + (b>a)<c - b>(a<c)
        // = -(c<b)>a + c>(b>a) - (c>a)<b + c>(a<b) + c<(b>a) - (c<b)<a
        //   - (b>c)<a + b>(c<a)
        DiExpr lng = di_combo({{1, sn(pn(da, db), dc)},
                               {-1, sn(da, sn(db, dc))},
                               {1, pn(sn(da, dc), db)},
                               {-1, sn(da, pn(dc, db))},
                               {-1, pn(da, sn(db, dc))},
                               {1, pn(pn(da, db), dc)},
                               {1, pn(sn(db, da), dc)},
                               {-1, sn(db, pn(da, dc))},
                               {1, sn(pn(dc, db), da)},
                               {-1, sn(dc, sn(db, da))},
                               {1, pn(sn(dc, da), db)},
                               {-1, sn(dc, pn(da, db))},
                               {-1, pn(dc, sn(db, da))},
                               {1, pn(pn(dc, db), da)},
                               {1, pn(sn(db, dc), da)},
                               {-1, sn(db, pn(dc, da))}});
        v.identities = {two_op("mixed-short", shrt), two_op("mixed-long", lng)};
        put(std::move(v));
    }
    {
        VarietySpec v;
        v.name = "DerAssos";
        v.num_ops = NumOps::Two;
        v.partner = "Assos";
        // (a>c)<b - a>(c<b) = (b>c)<a - b>(c<a)
        DiExpr shrt = di_combo({{1, pn(sn(da, dc), db)},
                                {-1, sn(da, pn(dc, db))},
                                {-1, pn(sn(db, dc), da)},
                                {1, sn(db, pn(dc, da))}});
        // (a<c)>b - a>(c>b) - (a>b)<c + a>(b<c) - a<(c>b) + (a<c)<b
        //   - (c>a)<b + c>(a<b)
        // = (b<c)>a - b>(c>a) - (b>a)<c + b>(a<c) - b<(c>a) + (b<c)<a
        //   - (c>b)<a + c>(b<a)
        DiExpr lng = di_combo({{1, sn(pn(da, dc), db)},
                               {-1, sn(da, sn(dc, db))},
                               {-1, pn(sn(da, db), dc)},
                               {1, sn(da, pn(db, dc))},
                               {-1, pn(da, sn(dc, db))},
                               {1, pn(pn(da, dc), db)},
                               {-1, pn(sn(dc, da), db)},
                               {1, sn(dc, pn(da, db))},
                               {-1, sn(pn(db, dc), da)},
                               {1, sn(db, sn(dc, da))},
                               {1, pn(sn(db, da), dc)},
                               {-1, sn(db, pn(da, dc))},
                               {1, pn(db, sn(dc, da))},
                               {-1, pn(pn(db, dc), da)},
                               {1, pn(sn(dc, db), da)},
                               {-1, sn(dc, pn(db, da))}});
        v.identities = {two_op("mixed-short", shrt), two_op("mixed-long", lng)};
        put(std::move(v));
    }
    {
        VarietySpec v;
        v.name = "DerBiCom";
        v.num_ops = NumOps::Two;
        v.partner = "BiCom";
        // (a<b)<c = (a<c)<b
        DiExpr prec2 = di_combo({{1, pn(pn(da, db), dc)}, {-1, pn(pn(da, dc), db)}});
        // a>(b>c) = b>(a>c)
        DiExpr succ2 = di_combo({{1, sn(da, sn(db, dc))}, {-1, sn(db, sn(da, dc))}});
        // (a>b)>c - (a>c)<b = (a>c)>b - (a>b)<c
        DiExpr mix1 = di_combo({{1, sn(sn(da, db), dc)},
                                {-1, pn(sn(da, dc), db)},
                                {-1, sn(sn(da, dc), db)},
                                {1, pn(sn(da, db), dc)}});
        // a<(b<c) - b>(a<c) = b<(a<c) - a>(b<c)
        DiExpr mix2 = di_combo({{1, pn(da, pn(db, dc))},
                                {-1, sn(db, pn(da, dc))},
                                {-1, pn(db, pn(da, dc))},
                                {1, sn(da, pn(db, dc))}});
        v.identities = {two_op("prec-right-comm", prec2), two_op("succ-left-comm", succ2),
                        two_op("mixed-succ", mix1), two_op("mixed-prec", mix2)};
        put(std::move(v));
    }
    return cat;
}

const std::map<std::string, VarietySpec>& catalog_map() {
    static const std::map<std::string, VarietySpec> cat = build_catalog();
    return cat;
}

std::string lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return out;
}

// Variables used by identity placeholders are shifted out of the way before
// argument substitution, so arguments may freely mention x1..x3.
constexpr int kPlaceholderShift = 1000000;

void collect_vars(const Monomial& m, std::set<int>& out) {
    for (const auto& g : leaves(m)) out.insert(g.var_index);
}

void collect_di_vars(const DiMonomial& m, std::set<int>& out) {
    for (int v : di_leaves(m)) out.insert(v);
}

void check_args_disjoint(const std::vector<std::set<int>>& var_sets) {
    std::set<int> seen;
    for (const auto& vs : var_sets) {
        for (int v : vs) {
            if (!seen.insert(v).second)
                fail(ErrorCode::VariableClash,
                     "substitution arguments share variable x" + std::to_string(v));
        }
    }
}

std::vector<std::vector<int>> compositions(int total, int parts) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(parts), 0);
    std::function<void(int, int)> rec = [&](int pos, int rem) {
        if (pos == parts - 1) {
            cur[static_cast<std::size_t>(pos)] = rem;
            out.push_back(cur);
            return;
        }
        for (int k = 0; k <= rem; ++k) {
            cur[static_cast<std::size_t>(pos)] = k;
            rec(pos + 1, rem - k);
        }
    };
    if (parts > 0)
        rec(0, total);
    else if (total == 0)
        out.push_back({});
    return out;
}

// Applies the decoration vector d (indexed by var_index - 1) to the leaves of
// an undecorated monomial.
Monomial decorate(const Monomial& m, const std::vector<int>& d) {
    if (m.is_leaf()) {
        int v = m.gen().var_index;
        return Monomial::leaf(v, d[static_cast<std::size_t>(v - 1)]);
    }
    return Monomial::pair(decorate(m.left(), d), decorate(m.right(), d));
}

Monomial strip(const Monomial& m) {
    if (m.is_leaf()) return Monomial::leaf(m.gen().var_index, 0);
    return Monomial::pair(strip(m.left()), strip(m.right()));
}

void deco_vector(const Monomial& m, std::vector<int>& d) {
    if (m.is_leaf()) {
        d[static_cast<std::size_t>(m.gen().var_index - 1)] = m.gen().der_order;
        return;
    }
    deco_vector(m.left(), d);
    deco_vector(m.right(), d);
}

Expr rows_to_expr(const SparseVec& row, const std::vector<Monomial>& ambient) {
    Expr e;
    for (const auto& [idx, c] : row) add_term(e, ambient[static_cast<std::size_t>(idx)], c);
    return e;
}

DiExpr rows_to_di_expr(const SparseVec& row, const std::vector<DiMonomial>& ambient) {
    DiExpr e;
    for (const auto& [idx, c] : row) add_di_term(e, ambient[static_cast<std::size_t>(idx)], c);
    return e;
}

} // namespace

const VarietySpec& catalog(const std::string& name) {
    static const std::map<std::string, const VarietySpec*> by_lower = [] {
        std::map<std::string, const VarietySpec*> m;
        for (const auto& [k, v] : catalog_map()) m.emplace(lower(k), &v);
        return m;
    }();
    auto it = by_lower.find(lower(name));
    if (it == by_lower.end()) {
        std::string names;
        for (const auto& [k, v] : catalog_map()) {
            if (!names.empty()) names += ", ";
            names += k;
        }
        fail(ErrorCode::UnknownVariety, "unknown variety '" + name + "' (known: " + names + ")");
    }
    return *it->second;
}

std::vector<std::string> catalog_names() {
    std::vector<std::string> out;
    for (const auto& [k, v] : catalog_map()) out.push_back(k);
    return out;
}

Expr instantiate(const Identity& id, const std::vector<Monomial>& args) {
    if (id.num_ops != NumOps::One)
        fail(ErrorCode::InvalidArgument, "identity '" + id.label + "' uses two operations");
    if (static_cast<int>(args.size()) != id.placeholder_count)
        fail(ErrorCode::ArityMismatch,
             "identity '" + id.label + "' takes " + std::to_string(id.placeholder_count) +
                 " arguments, got " + std::to_string(args.size()));
    std::vector<std::set<int>> var_sets;
    for (const auto& m : args) {
        std::set<int> vs;
        collect_vars(m, vs);
        var_sets.push_back(std::move(vs));
    }
    check_args_disjoint(var_sets);

    std::map<int, int> shift;
    for (int i = 1; i <= id.placeholder_count; ++i) shift[i] = kPlaceholderShift + i;
    Expr e = relabel(id.relation, shift);
    for (int i = 1; i <= id.placeholder_count; ++i)
        e = subst_var(e, kPlaceholderShift + i, expr_of(args[static_cast<std::size_t>(i - 1)]));
    return e;
}

DiExpr di_instantiate(const Identity& id, const std::vector<DiMonomial>& args) {
    if (id.num_ops != NumOps::Two)
        fail(ErrorCode::InvalidArgument, "identity '" + id.label + "' uses one operation");
    if (static_cast<int>(args.size()) != id.placeholder_count)
        fail(ErrorCode::ArityMismatch,
             "identity '" + id.label + "' takes " + std::to_string(id.placeholder_count) +
                 " arguments, got " + std::to_string(args.size()));
    std::vector<std::set<int>> var_sets;
    for (const auto& m : args) {
        std::set<int> vs;
        collect_di_vars(m, vs);
        var_sets.push_back(std::move(vs));
    }
    check_args_disjoint(var_sets);

    std::map<int, int> shift;
    for (int i = 1; i <= id.placeholder_count; ++i) shift[i] = kPlaceholderShift + i;
    DiExpr e = di_relabel(id.di_relation, shift);
    for (int i = 1; i <= id.placeholder_count; ++i)
        e = di_subst_var(e, kPlaceholderShift + i, di_expr_of(args[static_cast<std::size_t>(i - 1)]));
    return e;
}

std::vector<Expr> consequence_step(const VarietySpec& v, int n, const std::vector<Expr>& prev) {
    if (v.num_ops != NumOps::One)
        fail(ErrorCode::InvalidArgument, "variety " + v.name + " uses two operations");
    if (n < 1) fail(ErrorCode::InvalidArgument, "arity must be >= 1");
    std::vector<Expr> out;

    for (const auto& id : v.identities) {
        if (id.placeholder_count != n) continue;
        std::vector<int> p(static_cast<std::size_t>(n));
        std::iota(p.begin(), p.end(), 1);
        do {
            std::vector<Monomial> args;
            for (int var : p) args.push_back(lf(var));
            out.push_back(instantiate(id, args));
        } while (std::next_permutation(p.begin(), p.end()));
    }

    if (n < 2) return out;
    for (int f = 1; f <= n; ++f) {
        std::map<int, int> onto;
        for (int i = 1; i < n; ++i) onto[i] = i < f ? i : i + 1;
        for (const auto& row : prev) {
            if (row.empty()) continue;
            Expr rho = relabel(row, onto);
            for (int var = 1; var <= n; ++var) {
                if (var == f) continue;
                out.push_back(subst_var(rho, var, expr_of(pr(lf(var), lf(f)))));
                out.push_back(subst_var(rho, var, expr_of(pr(lf(f), lf(var)))));
            }
            out.push_back(product(expr_of(lf(f)), rho));
            out.push_back(product(rho, expr_of(lf(f))));
        }
    }
    return out;
}

std::vector<DiExpr> di_consequence_step(const VarietySpec& v, int n,
                                        const std::vector<DiExpr>& prev) {
    if (v.num_ops != NumOps::Two)
        fail(ErrorCode::InvalidArgument, "variety " + v.name + " uses one operation");
    if (n < 1) fail(ErrorCode::InvalidArgument, "arity must be >= 1");
    std::vector<DiExpr> out;

    for (const auto& id : v.identities) {
        if (id.placeholder_count != n) continue;
        std::vector<int> p(static_cast<std::size_t>(n));
        std::iota(p.begin(), p.end(), 1);
        do {
            std::vector<DiMonomial> args;
            for (int var : p) args.push_back(dl(var));
            out.push_back(di_instantiate(id, args));
        } while (std::next_permutation(p.begin(), p.end()));
    }

    if (n < 2) return out;
    for (int f = 1; f <= n; ++f) {
        std::map<int, int> onto;
        for (int i = 1; i < n; ++i) onto[i] = i < f ? i : i + 1;
        for (const auto& row : prev) {
            if (row.empty()) continue;
            DiExpr rho = di_relabel(row, onto);
            for (int var = 1; var <= n; ++var) {
                if (var == f) continue;
                out.push_back(di_subst_var(rho, var, di_expr_of(sn(dl(var), dl(f)))));
                out.push_back(di_subst_var(rho, var, di_expr_of(pn(dl(var), dl(f)))));
                out.push_back(di_subst_var(rho, var, di_expr_of(sn(dl(f), dl(var)))));
                out.push_back(di_subst_var(rho, var, di_expr_of(pn(dl(f), dl(var)))));
            }
            for (DiOp op : {DiOp::Succ, DiOp::Prec}) {
                DiExpr lm, rm;
                for (const auto& [m, c] : rho) {
                    add_di_term(lm, DiMonomial::node(op, dl(f), m), c);
                    add_di_term(rm, DiMonomial::node(op, m, dl(f)), c);
                }
                out.push_back(std::move(lm));
                out.push_back(std::move(rm));
            }
        }
    }
    return out;
}

std::vector<Expr> consequences(const VarietySpec& v, int n, std::optional<int> w) {
    if (v.num_ops != NumOps::One)
        fail(ErrorCode::InvalidArgument, "variety " + v.name + " uses two operations");
    if (n < 1) fail(ErrorCode::InvalidArgument, "arity must be >= 1");
    std::vector<Expr> rows;
    for (int k = 2; k <= n; ++k) {
        std::vector<Expr> gen = consequence_step(v, k, rows);
        std::vector<Monomial> ambient = enumerate_multilinear_plain(k);
        std::map<Monomial, int> index;
        for (std::size_t i = 0; i < ambient.size(); ++i)
            index.emplace(ambient[i], static_cast<int>(i));
        SpanBasis basis(static_cast<int>(ambient.size()));
        for (const auto& g : gen) {
            SparseVec vec;
            for (const auto& [m, c] : g) vec.emplace_back(index.at(m), c);
            basis.insert(std::move(vec));
        }
        rows.clear();
        for (const auto& r : basis.rows()) rows.push_back(rows_to_expr(r, ambient));
    }
    if (!w) return rows;

    int total = n + *w;
    if (total < 0) fail(ErrorCode::InvalidWeight, "weight below -arity");
    if (total > max_der_order())
        fail(ErrorCode::DerOrderCap,
             "total derivation order " + std::to_string(total) + " exceeds the cap");
    std::vector<Expr> out;
    for (const auto& d : compositions(total, n)) {
        for (const auto& row : rows) {
            Expr e;
            for (const auto& [m, c] : row) add_term(e, decorate(m, d), c);
            out.push_back(std::move(e));
        }
    }
    return out;
}

std::vector<DiExpr> di_consequences(const VarietySpec& v, int n) {
    if (v.num_ops != NumOps::Two)
        fail(ErrorCode::InvalidArgument, "variety " + v.name + " uses one operation");
    if (n < 1) fail(ErrorCode::InvalidArgument, "arity must be >= 1");
    std::vector<DiExpr> rows;
    for (int k = 2; k <= n; ++k) {
        std::vector<DiExpr> gen = di_consequence_step(v, k, rows);
        std::vector<DiMonomial> ambient = enumerate_di_monomials(k);
        std::map<DiMonomial, int> index;
        for (std::size_t i = 0; i < ambient.size(); ++i)
            index.emplace(ambient[i], static_cast<int>(i));
        SpanBasis basis(static_cast<int>(ambient.size()));
        for (const auto& g : gen) {
            SparseVec vec;
            for (const auto& [m, c] : g) vec.emplace_back(index.at(m), c);
            basis.insert(std::move(vec));
        }
        rows.clear();
        for (const auto& r : basis.rows()) rows.push_back(rows_to_di_expr(r, ambient));
    }
    return rows;
}

void bicom_class_split(const Monomial& m, std::vector<Generator>& left,
                       std::vector<Generator>& right) {
    if (m.arity() < 2)
        fail(ErrorCode::InvalidArgument, "left/right split needs arity >= 2");
    left.clear();
    right.clear();
    std::function<void(const Monomial&, bool)> walk = [&](const Monomial& t, bool is_left) {
        if (t.is_leaf()) {
            (is_left ? left : right).push_back(t.gen());
            return;
        }
        walk(t.left(), true);
        walk(t.right(), false);
    };
    walk(m.left(), true);
    walk(m.right(), false);
}

Monomial bicom_canonical(const Monomial& m) {
    if (m.arity() < 2) return m;
    std::vector<Generator> left, right;
    bicom_class_split(m, left, right);
    std::sort(left.begin(), left.end());
    std::sort(right.begin(), right.end());
    // Core is the largest left-child generator; the remaining left multipliers
    // wrap the core-and-right comb smallest-outermost, right multipliers apply
    // smallest-innermost.
    Generator core = left.back();
    left.pop_back();
    Monomial t = Monomial::leaf(core);
    for (const auto& g : right) t = Monomial::pair(t, Monomial::leaf(g));
    for (auto it = left.rbegin(); it != left.rend(); ++it)
        t = Monomial::pair(Monomial::leaf(*it), t);
    return t;
}

Expr bicom_normal_form(const Expr& e) {
    Expr out;
    for (const auto& [m, c] : e) add_term(out, bicom_canonical(m), c);
    return out;
}

int Component::index_of(const Monomial& m) const {
    auto it = index_.find(m);
    return it == index_.end() ? -1 : it->second;
}

int Component::consequence_rank() const {
    if (basis_) return basis_->rank();
    int blocks = ambient_dim() / plain_->ambient_dim();
    return plain_->consequence_rank() * blocks;
}

SparseVec Component::coords(const Expr& e) const {
    if (e.empty()) return {};
    for (const auto& [m, c] : e) {
        if (!is_multilinear(m, arity_))
            fail(ErrorCode::ArityMismatch,
                 "term " + format_term(m) + " is not multilinear of arity " +
                     std::to_string(arity_));
    }
    int expected = weight_ ? *weight_ : -arity_;
    int got = opch::weight(e);
    if (got != expected)
        fail(ErrorCode::MixedWeight, "expression has weight " + std::to_string(got) +
                                         ", component expects " + std::to_string(expected));

    if (basis_) {
        SparseVec vec;
        for (const auto& [m, c] : e) {
            auto it = index_.find(m);
            if (it == index_.end())
                fail(ErrorCode::Internal, "monomial missing from ambient: " + format_term(m));
            vec.emplace_back(it->second, c);
        }
        std::sort(vec.begin(), vec.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        return basis_->reduce(std::move(vec));
    }

    // Decorated case: identities never move decorations, so the consequence
    // space splits into one block per decoration vector and each block is the
    // decorated image of the undecorated echelon basis.
    std::map<std::vector<int>, Expr> groups;
    for (const auto& [m, c] : e) {
        std::vector<int> d(static_cast<std::size_t>(arity_), 0);
        deco_vector(m, d);
        add_term(groups[d], strip(m), c);
    }
    SparseVec out;
    for (const auto& [d, ex] : groups) {
        if (ex.empty()) continue;
        SparseVec pv;
        for (const auto& [m, c] : ex) {
            auto it = plain_->index_.find(m);
            if (it == plain_->index_.end())
                fail(ErrorCode::Internal, "monomial missing from ambient: " + format_term(m));
            pv.emplace_back(it->second, c);
        }
        std::sort(pv.begin(), pv.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        SparseVec rv = plain_->basis_->reduce(std::move(pv));
        for (const auto& [pi, c] : rv) {
            Monomial dm = decorate(plain_->ambient_[static_cast<std::size_t>(pi)], d);
            auto it = index_.find(dm);
            if (it == index_.end())
                fail(ErrorCode::Internal, "decorated monomial missing from ambient");
            out.emplace_back(it->second, c);
        }
    }
    std::sort(out.begin(), out.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    return out;
}

Expr Component::residual(const Expr& e) const {
    SparseVec v = coords(e);
    Expr out;
    for (const auto& [idx, c] : v) add_term(out, ambient_[static_cast<std::size_t>(idx)], c);
    return out;
}

int DiComponent::index_of(const DiMonomial& m) const {
    auto it = index_.find(m);
    return it == index_.end() ? -1 : it->second;
}

SparseVec DiComponent::coords(const DiExpr& e) const {
    if (e.empty()) return {};
    SparseVec vec;
    for (const auto& [m, c] : e) {
        if (!is_multilinear(m, arity_))
            fail(ErrorCode::ArityMismatch,
                 "term " + format_di_term(m) + " is not multilinear of arity " +
                     std::to_string(arity_));
        auto it = index_.find(m);
        if (it == index_.end())
            fail(ErrorCode::Internal, "monomial missing from ambient: " + format_di_term(m));
        vec.emplace_back(it->second, c);
    }
    std::sort(vec.begin(), vec.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    return basis_->reduce(std::move(vec));
}

struct Workspace::Solver {
    PreimageSolver ps;
    Solver(const std::vector<SparseVec>& cols, int dim) : ps(cols, dim) {}
};

Workspace::~Workspace() = default;

Workspace::Workspace(std::string cache_dir) {
    if (cache_dir.empty()) {
        const char* env = std::getenv("OPCH_CACHE_DIR");
        cache_dir = env && *env ? env : ".opch-cache";
    }
    cache_dir_ = std::move(cache_dir);
    std::error_code ec;
    std::filesystem::create_directories(cache_dir_, ec);
    if (ec)
        fail(ErrorCode::Io, "cannot create cache directory " + cache_dir_ + ": " + ec.message());
}

void Workspace::set_max_arity(int n) {
    if (n < 1) fail(ErrorCode::InvalidArgument, "max arity must be >= 1");
    max_arity_ = n;
}

const Component& Workspace::component(const std::string& variety, int n) {
    const VarietySpec& v = catalog(variety);
    if (v.num_ops != NumOps::One)
        fail(ErrorCode::InvalidArgument,
             "variety " + v.name + " uses two operations; query its own quotient instead");
    if (n < 1) fail(ErrorCode::InvalidArgument, "arity must be >= 1");
    // Undecorated bases get one extra arity: they are small and they feed the
    // decorated components at the boundary.
    if (n > max_arity_ + 1)
        fail(ErrorCode::ArityTooLarge, "arity " + std::to_string(n) +
                                           " exceeds the configured bound " +
                                           std::to_string(max_arity_ + 1));
    return plain_component(v, n);
}

const Component& Workspace::plain_component(const VarietySpec& v, int n) {
    auto key = std::make_pair(v.name, n);
    auto it = plain_.find(key);
    if (it == plain_.end()) it = plain_.emplace(key, build_plain(v, n)).first;
    return *it->second;
}

std::shared_ptr<Component> Workspace::build_plain(const VarietySpec& v, int n) {
    auto c = std::shared_ptr<Component>(new Component());
    c->variety_ = v.name;
    c->arity_ = n;
    c->weight_ = std::nullopt;
    c->ambient_ = enumerate_multilinear_plain(n);
    for (std::size_t i = 0; i < c->ambient_.size(); ++i)
        c->index_.emplace(c->ambient_[i], static_cast<int>(i));

    SpanBasis basis(static_cast<int>(c->ambient_.size()));
    if (n >= 2 && !load_cached(v, n, c->ambient_, basis)) {
        const Component& prev = plain_component(v, n - 1);
        std::vector<Expr> prev_rows;
        if (prev.basis_)
            for (const auto& r : prev.basis_->rows()) prev_rows.push_back(rows_to_expr(r, prev.ambient_));
        std::vector<Expr> gen = consequence_step(v, n, prev_rows);
        for (const auto& g : gen) {
            SparseVec vec;
            for (const auto& [m, coef] : g) vec.emplace_back(c->index_.at(m), coef);
            basis.insert(std::move(vec));
        }
        store_cache(v, n, c->ambient_, basis);
    }
    c->basis_ = std::make_shared<const SpanBasis>(std::move(basis));
    return c;
}

bool Workspace::load_cached(const VarietySpec& v, int n, const std::vector<Monomial>& ambient,
                            SpanBasis& basis) {
    namespace fs = std::filesystem;
    fs::path path = fs::path(cache_dir_) / (v.name + "_" + std::to_string(n) + "_none.json");
    std::ifstream in(path);
    if (!in) return false;
    try {
        nlohmann::json doc = nlohmann::json::parse(in);
        if (doc.value("schema", 0) != 1) return false;
        if (doc.value("variety", "") != v.name) return false;
        if (doc.value("arity", -1) != n) return false;
        const auto& amb = doc.at("ambient");
        if (amb.size() != ambient.size()) return false;
        for (std::size_t i = 0; i < ambient.size(); ++i)
            if (amb.at(i).get<std::string>() != format_term(ambient[i])) return false;
        for (const auto& row : doc.at("rows")) {
            SparseVec vec;
            for (const auto& entry : row) {
                int idx = entry.at(0).get<int>();
                if (idx < 0 || idx >= static_cast<int>(ambient.size())) return false;
                vec.emplace_back(idx, rat_from_string(entry.at(1).get<std::string>()));
            }
            basis.insert(std::move(vec));
        }
        return true;
    } catch (const nlohmann::json::exception&) {
        return false;
    } catch (const Error&) {
        return false;
    }
}

void Workspace::store_cache(const VarietySpec& v, int n, const std::vector<Monomial>& ambient,
                            const SpanBasis& basis) {
    // Best-effort: a failed cache write only costs recomputation next run.
    namespace fs = std::filesystem;
    fs::path path = fs::path(cache_dir_) / (v.name + "_" + std::to_string(n) + "_none.json");
    fs::path lock_path = path;
    lock_path += ".lock";

    nlohmann::json doc;
    doc["schema"] = 1;
    doc["variety"] = v.name;
    doc["arity"] = n;
    doc["weight"] = nullptr;
    auto& amb = doc["ambient"] = nlohmann::json::array();
    for (const auto& m : ambient) amb.push_back(format_term(m));
    auto& rows = doc["rows"] = nlohmann::json::array();
    for (const auto& r : basis.rows()) {
        nlohmann::json row = nlohmann::json::array();
        for (const auto& [idx, c] : r) row.push_back({idx, rat_to_string(c)});
        rows.push_back(std::move(row));
    }

    int lock_fd = ::open(lock_path.c_str(), O_CREAT | O_RDWR, 0644);
    if (lock_fd < 0) return;
    if (::flock(lock_fd, LOCK_EX) != 0) {
        ::close(lock_fd);
        return;
    }
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp);
        if (out) out << doc.dump() << '\n';
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            ::flock(lock_fd, LOCK_UN);
            ::close(lock_fd);
            return;
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) fs::remove(tmp, ec);
    ::flock(lock_fd, LOCK_UN);
    ::close(lock_fd);
}

const Component& Workspace::component(const std::string& variety, int n, int w) {
    const VarietySpec& v = catalog(variety);
    if (v.num_ops != NumOps::One)
        fail(ErrorCode::InvalidArgument,
             "variety " + v.name + " uses two operations; query its own quotient instead");
    if (n < 1) fail(ErrorCode::InvalidArgument, "arity must be >= 1");
    if (n > max_arity_)
        fail(ErrorCode::ArityTooLarge, "arity " + std::to_string(n) +
                                           " exceeds the configured bound " +
                                           std::to_string(max_arity_));
    if (n + w < 0) fail(ErrorCode::InvalidWeight, "weight below -arity");
    if (n + w > max_der_order())
        fail(ErrorCode::DerOrderCap,
             "total derivation order " + std::to_string(n + w) + " exceeds the cap");

    auto key = std::make_tuple(v.name, n, w);
    auto it = decorated_.find(key);
    if (it != decorated_.end()) return *it->second;

    const Component& plain = plain_component(v, n);
    auto c = std::unique_ptr<Component>(new Component());
    c->variety_ = v.name;
    c->arity_ = n;
    c->weight_ = w;
    if (n + w == 0) {
        // All-zero decorations: same ambient and basis as the undecorated one.
        c->ambient_ = plain.ambient_;
        c->index_ = plain.index_;
        c->basis_ = plain.basis_;
    } else {
        c->ambient_ = enumerate_multilinear(n, w);
        for (std::size_t i = 0; i < c->ambient_.size(); ++i)
            c->index_.emplace(c->ambient_[i], static_cast<int>(i));
        c->plain_ = plain_.at(std::make_pair(v.name, n));
    }
    it = decorated_.emplace(key, std::move(c)).first;
    return *it->second;
}

const DiComponent& Workspace::di_component(const std::string& variety, int n) {
    const VarietySpec& v = catalog(variety);
    if (v.num_ops != NumOps::Two)
        fail(ErrorCode::UnknownVariety,
             "variety " + v.name + " uses one operation; no two-operation quotient");
    if (n < 1) fail(ErrorCode::InvalidArgument, "arity must be >= 1");
    if (n > max_arity_)
        fail(ErrorCode::ArityTooLarge, "arity " + std::to_string(n) +
                                           " exceeds the configured bound " +
                                           std::to_string(max_arity_));

    auto key = std::make_pair(v.name, n);
    auto it = di_.find(key);
    if (it != di_.end()) return *it->second;

    auto c = std::unique_ptr<DiComponent>(new DiComponent());
    c->variety_ = v.name;
    c->arity_ = n;
    c->ambient_ = enumerate_di_monomials(n);
    for (std::size_t i = 0; i < c->ambient_.size(); ++i)
        c->index_.emplace(c->ambient_[i], static_cast<int>(i));
    SpanBasis basis(static_cast<int>(c->ambient_.size()));
    if (n >= 2) {
        const DiComponent& prev = di_component(variety, n - 1);
        std::vector<DiExpr> prev_rows;
        for (const auto& r : prev.basis_->rows())
            prev_rows.push_back(rows_to_di_expr(r, prev.ambient_));
        std::vector<DiExpr> gen = di_consequence_step(v, n, prev_rows);
        for (const auto& g : gen) {
            SparseVec vec;
            for (const auto& [m, coef] : g) vec.emplace_back(c->index_.at(m), coef);
            basis.insert(std::move(vec));
        }
    }
    c->basis_ = std::make_shared<const SpanBasis>(std::move(basis));
    it = di_.emplace(key, std::move(c)).first;
    return *it->second;
}

const Workspace::Expansion& Workspace::expansion(const std::string& variety, int n) {
    const VarietySpec& v = catalog(variety);
    auto key = std::make_pair(v.name, n);
    auto it = expansions_.find(key);
    if (it != expansions_.end()) return *it->second;

    const Component& comp = component(v.name, n, -1);
    auto ex = std::make_unique<Expansion>();
    ex->di_ambient = enumerate_di_monomials(n);
    SpanBasis b(comp.ambient_dim());
    for (const auto& dm : ex->di_ambient) {
        SparseVec col = comp.coords(tau(dm));
        b.insert(col);
        ex->columns.push_back(std::move(col));
    }
    ex->rank = b.rank();
    it = expansions_.emplace(key, std::move(ex)).first;
    return *it->second;
}

std::vector<Rat> Workspace::solve_expansion(const std::string& variety, int n,
                                            const SparseVec& target) {
    const VarietySpec& v = catalog(variety);
    auto key = std::make_pair(v.name, n);
    auto it = solvers_.find(key);
    if (it == solvers_.end()) {
        const Expansion& ex = expansion(variety, n);
        const Component& comp = component(v.name, n, -1);
        it = solvers_.emplace(key, std::make_unique<Solver>(ex.columns, comp.ambient_dim()))
                 .first;
    }
    return it->second->ps.solve(target);
}

SparseVec quotient_normal_form(Workspace& ws, const VarietySpec& v, int n, int w, const Expr& e) {
    return ws.component(v.name, n, w).coords(e);
}

} // namespace opch
