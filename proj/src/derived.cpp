#include "opch/derived.hpp"

#include "opch/diterm.hpp"
#include "opch/errors.hpp"

namespace opch {

ExpansionMatrix expansion_matrix(Workspace& ws, const VarietySpec& v, int n) {
    const Workspace::Expansion& e = ws.expansion(v.name, n);
    ExpansionMatrix out;
    out.di_ambient = e.di_ambient;
    out.columns = e.columns;
    out.rank = e.rank;
    out.component_dim = ws.component(v.name, n, -1).dim();
    return out;
}

int dim_dervar(Workspace& ws, const VarietySpec& v, int n) {
    return ws.expansion(v.name, n).rank;
}

bool check_weight_criterion(Workspace& ws, const VarietySpec& v, int n) {
    return ws.expansion(v.name, n).rank == ws.component(v.name, n, -1).dim();
}

DiIdentityReport check_di_identities(Workspace& ws, const VarietySpec& dv,
                                     const VarietySpec& base) {
    if (dv.num_ops != NumOps::Two || base.num_ops != NumOps::One ||
        dv.partner != base.name || base.partner != dv.name) {
        throw Error(ErrorCode::PairMismatch,
                    "check_di_identities: '" + dv.name + "' is not the two-operation form of '" +
                        base.name + "'");
    }

    DiIdentityReport rep;
    const Component& comp = ws.component(base.name, 3, -1);
    std::vector<DiMonomial> args = {DiMonomial::leaf(1), DiMonomial::leaf(2),
                                    DiMonomial::leaf(3)};
    rep.all_vanish = true;
    for (const Identity& id : dv.identities) {
        DiExpr inst = di_instantiate(id, args);
        Expr image = tau(inst);
        SparseVec c = comp.coords(image);
        DiIdentityReport::Entry e;
        e.label = id.label;
        e.vanishes = c.empty();
        rep.all_vanish = rep.all_vanish && e.vanishes;
        rep.identities.push_back(std::move(e));
    }

    const DiComponent& dc = ws.di_component(dv.name, 3);
    rep.kernel_rank = dc.consequence_rank();
    rep.expected_kernel = dc.ambient_dim() - dim_dervar(ws, base, 3);
    rep.kernel_matches = rep.kernel_rank == rep.expected_kernel;
    return rep;
}

DiMonomial all_prec(const Monomial& m) {
    if (m.is_leaf()) {
        if (m.gen().der_order != 0)
            throw Error(ErrorCode::InvalidArgument,
                        "all_prec: decorated generator has no two-operation reading");
        return DiMonomial::leaf(m.gen().var_index);
    }
    return DiMonomial::node(DiOp::Prec, all_prec(m.left()), all_prec(m.right()));
}

bool check_novikov_embedding(Workspace& ws) {
    const VarietySpec& nov = catalog("Nov");
    const Component& comp = ws.component("Com", 3, -1);
    std::vector<Monomial> args = {Monomial::leaf(1), Monomial::leaf(2),
                                  Monomial::leaf(3)};
    for (const Identity& id : nov.identities) {
        Expr inst = instantiate(id, args);
        DiExpr di;
        for (const auto& [m, c] : inst) add_di_term(di, all_prec(m), c);
        Expr image = tau(di);
        if (!comp.coords(image).empty()) return false;
    }
    return true;
}

} // namespace opch
