#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "opch/derived.hpp"
#include "opch/diterm.hpp"
#include "opch/parse.hpp"
#include "opch/varieties.hpp"

using namespace opch;

namespace {

std::filesystem::path fresh_cache_dir(const std::string& tag) {
    auto p = std::filesystem::temp_directory_path() /
             ("opch-test-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("expansion matrices at small arity") {
    Workspace ws(fresh_cache_dir("expansion").string());

    ExpansionMatrix bicom2 = expansion_matrix(ws, catalog("BiCom"), 2);
    CHECK(bicom2.di_ambient.size() == 4);
    CHECK(bicom2.columns.size() == 4);
    CHECK(bicom2.rank == 4);
    CHECK(bicom2.component_dim == 4);

    ExpansionMatrix com2 = expansion_matrix(ws, catalog("Com"), 2);
    CHECK(com2.rank == 2);
    CHECK(com2.component_dim == 2);

    ExpansionMatrix alt3 = expansion_matrix(ws, catalog("Alt"), 3);
    CHECK(alt3.di_ambient.size() == 48);
    CHECK(alt3.rank == 42);
    CHECK(alt3.component_dim == 42);

    // Columns really are the coordinates of the tau images.
    CHECK(bicom2.di_ambient == enumerate_di_monomials(2));
    const Component& comp = ws.component("BiCom", 2, -1);
    for (std::size_t j = 0; j < bicom2.di_ambient.size(); ++j)
        CHECK(bicom2.columns[j] == comp.coords(tau(bicom2.di_ambient[j])));
}

TEST_CASE("derived-variety dimensions") {
    Workspace ws(fresh_cache_dir("dervar").string());
    CHECK(dim_dervar(ws, catalog("BiCom"), 3) == 36);
    CHECK(dim_dervar(ws, catalog("As"), 3) == 36);
    CHECK(dim_dervar(ws, catalog("Assos"), 3) == 42);
    CHECK(dim_dervar(ws, catalog("Alt"), 3) == 42);
    // For a commutative associative algebra the derived operation count is the
    // central binomial coefficient C(2n-2, n-1).
    CHECK(dim_dervar(ws, catalog("Com"), 1) == 1);
    CHECK(dim_dervar(ws, catalog("Com"), 2) == 2);
    CHECK(dim_dervar(ws, catalog("Com"), 3) == 6);
    CHECK(dim_dervar(ws, catalog("Com"), 4) == 20);
}

TEST_CASE("weight criterion holds for the main varieties") {
    Workspace ws(fresh_cache_dir("criterion").string());
    for (const char* name : {"BiCom", "Alt", "Assos", "Com", "As"}) {
        for (int n = 1; n <= 3; ++n) {
            CAPTURE(name);
            CAPTURE(n);
            CHECK(check_weight_criterion(ws, catalog(name), n));
        }
    }
}

TEST_CASE("zinbiel fails the weight criterion first at arity 3") {
    Workspace ws(fresh_cache_dir("zinb").string());
    CHECK(check_weight_criterion(ws, catalog("Zinb"), 1));
    CHECK(check_weight_criterion(ws, catalog("Zinb"), 2));
    CHECK_FALSE(check_weight_criterion(ws, catalog("Zinb"), 3));
    ExpansionMatrix z3 = expansion_matrix(ws, catalog("Zinb"), 3);
    CHECK(z3.rank == 30);
    CHECK(z3.component_dim == 36);
}

TEST_CASE("two-operation identities hold in and cut out the derived variety") {
    Workspace ws(fresh_cache_dir("diident").string());
    const struct {
        const char* dv;
        const char* base;
        int expected_kernel;
    } cases[] = {
        {"DerBiCom", "BiCom", 12},
        {"DerAlt", "Alt", 6},
        {"DerAssos", "Assos", 6},
    };
    for (const auto& cs : cases) {
        CAPTURE(cs.dv);
        DiIdentityReport rep = check_di_identities(ws, catalog(cs.dv), catalog(cs.base));
        CHECK(rep.all_vanish);
        for (const auto& entry : rep.identities) {
            CAPTURE(entry.label);
            CHECK(entry.vanishes);
        }
        CHECK(rep.kernel_rank == cs.expected_kernel);
        CHECK(rep.expected_kernel == cs.expected_kernel);
        CHECK(rep.kernel_matches);
        CHECK(rep.ok());
    }

    CHECK_THROWS_AS(check_di_identities(ws, catalog("DerBiCom"), catalog("Alt")), Error);
    try {
        check_di_identities(ws, catalog("DerBiCom"), catalog("Alt"));
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::PairMismatch);
    }
    CHECK_THROWS_AS(check_di_identities(ws, catalog("BiCom"), catalog("BiCom")), Error);
}

TEST_CASE("novikov identities expand to zero in the derived commutative algebra") {
    Workspace ws(fresh_cache_dir("nov").string());
    CHECK(check_novikov_embedding(ws));

    // all_prec turns every plain product into the "a times d(b)" operation.
    Expr m = parse_term("(x1 (x2 x3))");
    REQUIRE(m.size() == 1);
    DiMonomial dm = all_prec(m.begin()->first);
    CHECK(format_di_term(di_expr_of(dm)) == "(x1 < (x2 < x3))");
    Expr dec = parse_term("(x1' x2)");
    REQUIRE(dec.size() == 1);
    CHECK_THROWS_AS(all_prec(dec.begin()->first), Error);
}

TEST_CASE("tau commutes with variable relabeling") {
    std::vector<int> perm = {1, 2, 3};
    std::vector<DiMonomial> ambient = enumerate_di_monomials(3);
    REQUIRE(ambient.size() == 48);
    do {
        std::map<int, int> sigma;
        for (int i = 0; i < 3; ++i) sigma[i + 1] = perm[static_cast<std::size_t>(i)];
        for (const DiMonomial& t : ambient)
            CHECK(tau(di_relabel(t, sigma)) == relabel(tau(t), sigma));
    } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("di-component dimensions match the expansion ranks") {
    Workspace ws(fresh_cache_dir("dicomp").string());
    // At arity 2 no two-operation identity applies yet, so the di-span is free.
    for (const char* name : {"DerBiCom", "DerAlt", "DerAssos"}) {
        CAPTURE(name);
        CHECK(ws.di_component(name, 2).ambient_dim() == 4);
        CHECK(ws.di_component(name, 2).consequence_rank() == 0);
        CHECK(ws.di_component(name, 2).dim() == 4);
    }
    CHECK(ws.di_component("DerBiCom", 3).ambient_dim() == 48);
    CHECK(ws.di_component("DerBiCom", 3).dim() == 36);
    CHECK(ws.di_component("DerAlt", 3).dim() == 42);
    CHECK(ws.di_component("DerAssos", 3).dim() == 42);
}

TEST_CASE("relabeling a solved preimage tracks the target") {
    Workspace ws(fresh_cache_dir("solver").string());
    const Component& comp = ws.component("BiCom", 3, -1);
    // Solve for a weight -1 class and check the reconstruction is exact.
    Expr target = parse_term("(x1 (x2 x3''))");
    std::vector<Rat> sol = ws.solve_expansion("BiCom", 3, comp.coords(target));
    std::vector<DiMonomial> ambient = enumerate_di_monomials(3);
    REQUIRE(sol.size() == ambient.size());
    Expr image;
    for (std::size_t j = 0; j < sol.size(); ++j) {
        if (sol[j] == Rat(0)) continue;
        for (const auto& [m, c] : tau(ambient[j])) add_term(image, m, c * sol[j]);
    }
    CHECK(comp.coords(sub(image, target)).empty());

    // Unreachable classes must be reported, not silently truncated.
    Workspace wz(fresh_cache_dir("solverz").string());
    const Component& zc = wz.component("Zinb", 3, -1);
    bool hit = false;
    for (const Monomial& m : zc.ambient()) {
        SparseVec c = zc.coords(expr_of(m));
        if (c.empty()) continue;
        try {
            wz.solve_expansion("Zinb", 3, c);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NotInImage);
            hit = true;
            break;
        }
    }
    CHECK(hit);
}
