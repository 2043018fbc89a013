#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "opch/linalg.hpp"
#include "opch/parse.hpp"
#include "opch/term.hpp"
#include "opch/varieties.hpp"

using namespace opch;

namespace {

Expr E(const std::string& s) { return parse_term(s); }

std::filesystem::path fresh_cache_dir(const std::string& tag) {
    auto p = std::filesystem::temp_directory_path() /
             ("opch-test-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(p);
    return p;
}

int echelon_rank(const std::vector<Expr>& rows, const std::vector<Monomial>& ambient) {
    std::map<Monomial, int> index;
    for (std::size_t i = 0; i < ambient.size(); ++i)
        index.emplace(ambient[i], static_cast<int>(i));
    SpanBasis basis(static_cast<int>(ambient.size()));
    for (const auto& r : rows) {
        SparseVec v;
        for (const auto& [m, c] : r) v.emplace_back(index.at(m), c);
        basis.insert(std::move(v));
    }
    return basis.rank();
}

} // namespace

TEST_CASE("catalog lookups") {
    const VarietySpec& bicom = catalog("BiCom");
    CHECK(bicom.name == "BiCom");
    CHECK(bicom.identities.size() == 2);
    CHECK(bicom.num_ops == NumOps::One);
    CHECK(bicom.partner == "DerBiCom");

    const VarietySpec& dbicom = catalog("DerBiCom");
    CHECK(dbicom.identities.size() == 4);
    CHECK(dbicom.num_ops == NumOps::Two);
    CHECK(dbicom.partner == "BiCom");

    // Lookup ignores case.
    CHECK(&catalog("bicom") == &bicom);
    CHECK(&catalog("BICOM") == &bicom);

    CHECK_THROWS_AS(catalog("Foo"), Error);
    try {
        catalog("Foo");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownVariety);
    }

    CHECK(catalog_names().size() == 10);
    CHECK(catalog("As").identities.size() == 1);
    CHECK(catalog("Alt").identities.size() == 2);
    CHECK(catalog("Assos").identities.size() == 2);
    CHECK(catalog("Nov").identities.size() == 2);
    CHECK(catalog("Zinb").identities.size() == 1);
    CHECK(catalog("DerAlt").identities.size() == 2);
    CHECK(catalog("DerAssos").identities.size() == 2);
    CHECK(catalog("Com").partner.empty());
    CHECK(catalog("DerAlt").partner == "Alt");
    CHECK(catalog("DerAssos").partner == "Assos");
}

TEST_CASE("instantiate substitutes placeholders") {
    const VarietySpec& bicom = catalog("BiCom");
    // First identity: a(bc) = b(ac).
    const Identity& lcom = bicom.identities[0];
    Expr got = instantiate(lcom, {Monomial::leaf(1), Monomial::leaf(2), Monomial::leaf(3)});
    CHECK(got == E("(x1 (x2 x3)) - (x2 (x1 x3))"));

    // Second identity: (ab)c = (ac)b, at a composite argument.
    const Identity& rcom = bicom.identities[1];
    Expr m = parse_term("(x2 x3)");
    REQUIRE(m.size() == 1);
    Expr got2 = instantiate(rcom, {Monomial::leaf(1), m.begin()->first, Monomial::leaf(4)});
    CHECK(got2 == E("((x1 (x2 x3)) x4) - ((x1 x4) (x2 x3))"));

    // Decorated arguments pass straight through.
    Expr got3 = instantiate(lcom, {Monomial::leaf(1, 2), Monomial::leaf(2), Monomial::leaf(3)});
    CHECK(got3 == E("(x1'' (x2 x3)) - (x2 (x1'' x3))"));

    CHECK_THROWS_AS(
        instantiate(lcom, {Monomial::leaf(1), Monomial::leaf(1), Monomial::leaf(2)}), Error);
    try {
        instantiate(lcom, {Monomial::leaf(1), Monomial::leaf(1), Monomial::leaf(2)});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::VariableClash);
    }
    CHECK_THROWS_AS(instantiate(lcom, {Monomial::leaf(1), Monomial::leaf(2)}), Error);
    try {
        instantiate(lcom, {Monomial::leaf(1), Monomial::leaf(2)});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ArityMismatch);
    }
}

TEST_CASE("consequence spans at arity 3") {
    std::vector<Monomial> ambient = enumerate_multilinear_plain(3);
    REQUIRE(ambient.size() == 12);
    CHECK(echelon_rank(consequences(catalog("BiCom"), 3, std::nullopt), ambient) == 6);
    CHECK(echelon_rank(consequences(catalog("Alt"), 3, std::nullopt), ambient) == 5);
    CHECK(echelon_rank(consequences(catalog("As"), 3, std::nullopt), ambient) == 6);
}

TEST_CASE("consequence span is stable under variable permutations") {
    for (const char* name : {"BiCom", "Alt", "Assos", "Nov"}) {
        const VarietySpec& v = catalog(name);
        std::vector<Expr> rows = consequences(v, 3, std::nullopt);
        std::vector<Monomial> ambient = enumerate_multilinear_plain(3);
        std::map<Monomial, int> index;
        for (std::size_t i = 0; i < ambient.size(); ++i)
            index.emplace(ambient[i], static_cast<int>(i));
        SpanBasis basis(static_cast<int>(ambient.size()));
        for (const auto& r : rows) {
            SparseVec v2;
            for (const auto& [m, c] : r) v2.emplace_back(index.at(m), c);
            basis.insert(std::move(v2));
        }
        std::vector<int> perm = {1, 2, 3};
        do {
            std::map<int, int> relabeling;
            for (int i = 0; i < 3; ++i) relabeling[i + 1] = perm[static_cast<std::size_t>(i)];
            for (const auto& r : rows) {
                Expr permuted;
                for (const auto& [m, c] : r) add_term(permuted, relabel(m, relabeling), c);
                SparseVec v2;
                for (const auto& [m, c] : permuted) v2.emplace_back(index.at(m), c);
                CHECK(basis.contains(v2));
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
}

TEST_CASE("bicom_normal_form on basic rewrites") {
    CHECK(bicom_normal_form(E("(x2 (x1 x3))")) == E("(x1 (x2 x3))"));
    CHECK(bicom_normal_form(E("((x1 x3) x2)")) == E("((x1 x2) x3)"));
    CHECK(is_zero(bicom_normal_form(E("(x1 (x2 x3)) - (x2 (x1 x3))"))));

    // Decorations ride along with their variables.
    CHECK(bicom_normal_form(E("(x2' (x1 x3))")) == E("(x1 (x2' x3))"));
    CHECK(bicom_normal_form(E("((x3 x1') x2)")) == E("((x3 x1') x2)"));

    // Left multipliers end up ascending from the outside in; right multipliers
    // ascending from the inside out.
    CHECK(bicom_normal_form(E("(x4 (x2 ((x3 x5) x1)))")) == E("(x2 (x3 ((x4 x1) x5)))"));
}

TEST_CASE("bicom_normal_form is an idempotent linear projection") {
    std::vector<Monomial> ambient = enumerate_multilinear_plain(4);
    REQUIRE(ambient.size() == 120);
    for (const auto& m : ambient) {
        Expr once = bicom_normal_form(expr_of(m));
        Expr twice = bicom_normal_form(once);
        CHECK(once == twice);
        REQUIRE(once.size() == 1);
        CHECK(once.begin()->second == Rat(1));
    }
    std::mt19937 rng(4242);
    std::uniform_int_distribution<std::size_t> pick(0, ambient.size() - 1);
    std::uniform_int_distribution<int> coeff(-3, 3);
    for (int trial = 0; trial < 40; ++trial) {
        Expr e1, e2;
        for (int t = 0; t < 3; ++t) {
            add_term(e1, ambient[pick(rng)], Rat(coeff(rng)));
            add_term(e2, ambient[pick(rng)], Rat(coeff(rng)));
        }
        Expr lhs = bicom_normal_form(add(e1, e2));
        Expr rhs = bicom_normal_form(add(bicom_normal_form(e1), bicom_normal_form(e2)));
        CHECK(lhs == rhs);
    }
}

TEST_CASE("plain quotient dimensions") {
    Workspace ws(fresh_cache_dir("plaindims").string());
    const struct {
        const char* variety;
        std::vector<int> dims;  // arity 1, 2, 3, 4
    } expected[] = {
        {"Com", {1, 1, 1, 1}},   {"As", {1, 2, 6, 24}},    {"Alt", {1, 2, 7, 32}},
        {"Assos", {1, 2, 7, 29}}, {"BiCom", {1, 2, 6, 14}}, {"Nov", {1, 2, 6, 20}},
        {"Zinb", {1, 2, 6, 24}},
    };
    for (const auto& row : expected) {
        for (int n = 1; n <= 4; ++n) {
            CAPTURE(row.variety);
            CAPTURE(n);
            CHECK(ws.component(row.variety, n).dim() == row.dims[static_cast<std::size_t>(n - 1)]);
        }
    }
    // One extra undecorated arity is available beyond the decorated bound.
    CHECK(ws.component("BiCom", 5).dim() == 30);
    CHECK(ws.component("Com", 5).dim() == 1);
}

TEST_CASE("decorated dimensions factor through the undecorated quotient") {
    Workspace ws(fresh_cache_dir("decodims").string());
    // C(2n-2, n-1) = 1, 2, 6, 20 for n = 1..4.
    const int blocks[] = {1, 2, 6, 20};
    for (const char* name : {"Com", "As", "Alt", "Assos", "BiCom"}) {
        for (int n = 1; n <= 4; ++n) {
            CAPTURE(name);
            CAPTURE(n);
            CHECK(ws.component(name, n, -1).dim() ==
                  ws.component(name, n).dim() * blocks[n - 1]);
        }
    }
    CHECK(ws.component("BiCom", 3, -1).dim() == 36);
    CHECK(ws.component("BiCom", 4, -1).dim() == 280);
    CHECK(ws.component("Alt", 3, -1).dim() == 42);
    CHECK(ws.component("As", 3, -1).dim() == 36);
    CHECK(ws.component("Com", 3, -1).dim() == 6);
}

TEST_CASE("decorated consequence lists match component ranks") {
    Workspace ws(fresh_cache_dir("decorank").string());
    for (const char* name : {"Com", "As", "Alt", "Assos", "BiCom"}) {
        std::vector<Monomial> ambient = enumerate_multilinear(3, -1);
        REQUIRE(ambient.size() == 72);
        int rank = echelon_rank(consequences(catalog(name), 3, -1), ambient);
        CAPTURE(name);
        CHECK(rank == ws.component(name, 3, -1).consequence_rank());
        CHECK(rank == 72 - ws.component(name, 3, -1).dim());
    }
    std::vector<Monomial> ambient2 = enumerate_multilinear(2, -1);
    REQUIRE(ambient2.size() == 4);
    CHECK(echelon_rank(consequences(catalog("Com"), 2, -1), ambient2) == 2);
}

TEST_CASE("identity instances at decorated arguments reduce to zero") {
    Workspace ws(fresh_cache_dir("closure").string());
    // Every multilinear instance of a defining identity lies in the consequence
    // space, whatever decorations the arguments carry.
    Expr comp = parse_term("(x1 x3')");
    REQUIRE(comp.size() == 1);
    const Monomial composite = comp.begin()->first;
    for (const char* name : {"Com", "As", "Alt", "Assos", "BiCom"}) {
        const VarietySpec& v = catalog(name);
        for (const Identity& id : v.identities) {
            CAPTURE(name);
            CAPTURE(id.label);
            if (id.placeholder_count == 2) {
                const Component& c2 = ws.component(name, 2, -1);
                for (int da = 0; da <= 1; ++da) {
                    Expr inst =
                        instantiate(id, {Monomial::leaf(1, da), Monomial::leaf(2, 1 - da)});
                    CHECK(c2.coords(inst).empty());
                }
                // Composite decorated arguments exercise the substitution closure.
                const Component& c3 = ws.component(name, 3, -1);
                Expr inst = instantiate(id, {Monomial::leaf(2, 1), composite});
                CHECK(c3.coords(inst).empty());
            } else {
                const Component& c3 = ws.component(name, 3, -1);
                for (int da = 0; da <= 2; ++da)
                    for (int db = 0; db + da <= 2; ++db) {
                        int dc = 2 - da - db;
                        CAPTURE(da);
                        CAPTURE(db);
                        Expr inst = instantiate(id, {Monomial::leaf(1, da), Monomial::leaf(2, db),
                                                     Monomial::leaf(3, dc)});
                        CHECK(c3.coords(inst).empty());
                    }
                const Component& c4 = ws.component(name, 4, -1);
                Expr inst =
                    instantiate(id, {Monomial::leaf(4, 2), composite, Monomial::leaf(2)});
                CHECK(c4.coords(inst).empty());
            }
        }
    }
}

TEST_CASE("quotient_normal_form on identity instances") {
    Workspace ws(fresh_cache_dir("qnf").string());
    // Left symmetry at weight -3 (no decorations at arity 3).
    Expr lsym = E("((x1 x2) x3) + ((x2 x1) x3) - (x1 (x2 x3)) - (x2 (x1 x3))");
    CHECK(quotient_normal_form(ws, catalog("Alt"), 3, -3, lsym).empty());
    // Commutativity at weight -1.
    CHECK(quotient_normal_form(ws, catalog("Com"), 2, -1, E("(x1 x2') - (x2' x1)")).empty());
    // A decorated instance of a(bc) = b(ac).
    CHECK(quotient_normal_form(ws, catalog("BiCom"), 3, -1,
                               E("(x1' (x2 x3')) - (x2 (x1' x3'))"))
              .empty());
    // Nonmembers keep nonzero coordinates.
    CHECK(!quotient_normal_form(ws, catalog("BiCom"), 3, -1, E("(x1' (x2 x3'))")).empty());
}

TEST_CASE("bicom closed form agrees with the generic quotient") {
    Workspace ws(fresh_cache_dir("agree").string());
    for (int n = 2; n <= 4; ++n) {
        const Component& comp = ws.component("BiCom", n, -1);
        for (const Monomial& m : comp.ambient()) {
            Expr nf = bicom_normal_form(expr_of(m));
            REQUIRE(nf.size() == 1);
            // The difference monomial-minus-normal-form is a consequence...
            CHECK(comp.coords(sub(expr_of(m), nf)).empty());
            // ...so the quotient cannot tell them apart.
            CHECK(comp.coords(expr_of(m)) == comp.coords(nf));
        }
    }
}

TEST_CASE("distinct bicom normal forms are independent in the quotient") {
    Workspace ws(fresh_cache_dir("nfbasis").string());
    const Component& comp = ws.component("BiCom", 3, -1);
    std::map<Monomial, SparseVec> images;
    for (const Monomial& m : comp.ambient()) {
        Expr nf = bicom_normal_form(expr_of(m));
        REQUIRE(nf.size() == 1);
        const Monomial& rep = nf.begin()->first;
        SparseVec c = comp.coords(expr_of(m));
        auto [it, inserted] = images.emplace(rep, c);
        if (!inserted) CHECK(it->second == c);
    }
    // Number of distinct representatives = quotient dimension.
    CHECK(static_cast<int>(images.size()) == comp.dim());
}

TEST_CASE("workspace argument validation") {
    Workspace ws(fresh_cache_dir("errors").string());
    CHECK(ws.max_arity() == 4);

    CHECK_THROWS_AS(ws.component("BiCom", 6), Error);      // one past the bound is fine, two isn't
    CHECK_THROWS_AS(ws.component("BiCom", 5, -1), Error);  // decorated stops at max_arity
    try {
        ws.component("BiCom", 5, -1);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ArityTooLarge);
    }
    try {
        ws.component("BiCom", 3, -4);  // n + w < 0
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidWeight);
    }
    try {
        ws.component("DerBiCom", 3);  // two-operation varieties have no plain component
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidArgument);
    }
    try {
        ws.di_component("Com", 3);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownVariety);
    }

    const Component& comp = ws.component("BiCom", 3, -1);
    try {
        comp.coords(E("(x1 x2')"));  // arity 2, component wants 3
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ArityMismatch);
    }
    try {
        comp.coords(E("(x1 (x2 x3))"));  // weight -3, component wants -1
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MixedWeight);
    }

    ws.set_max_arity(3);
    CHECK_THROWS_AS(ws.component("BiCom", 4, -1), Error);
    ws.set_max_arity(4);
    CHECK(ws.component("BiCom", 4, -1).dim() == 280);
}

TEST_CASE("disk cache round-trips and rejects stale files") {
    auto dir = fresh_cache_dir("cache");
    std::vector<SparseVec> first_coords;
    {
        Workspace ws(dir.string());
        const Component& c = ws.component("BiCom", 3);
        CHECK(c.dim() == 6);
        for (const Monomial& m : c.ambient()) first_coords.push_back(c.coords(expr_of(m)));
    }
    auto cache_file = dir / "BiCom_3_none.json";
    REQUIRE(std::filesystem::exists(cache_file));

    {
        // A fresh workspace reloads the identical reduced basis from disk, so
        // every class keeps the same canonical coordinates.
        Workspace ws(dir.string());
        const Component& c = ws.component("BiCom", 3);
        CHECK(c.dim() == 6);
        std::vector<SparseVec> reloaded;
        for (const Monomial& m : c.ambient()) reloaded.push_back(c.coords(expr_of(m)));
        CHECK(reloaded == first_coords);
    }

    {
        // Corrupt the file: the loader must fall back to recomputation.
        std::ofstream out(cache_file, std::ios::trunc);
        out << "{\"schema\": 1, \"variety\": \"BiCom\", \"arity\": 3, \"ambient\": [], "
               "\"rows\": []}";
    }
    {
        Workspace ws(dir.string());
        const Component& c = ws.component("BiCom", 3);
        CHECK(c.dim() == 6);  // not the empty row set from the doctored file
    }
    {
        std::ofstream out(cache_file, std::ios::trunc);
        out << "not json at all";
    }
    {
        Workspace ws(dir.string());
        CHECK(ws.component("BiCom", 3).dim() == 6);
    }
}

TEST_CASE("cache directory fallback chain") {
    auto dir = fresh_cache_dir("envdir");
    ::setenv("OPCH_CACHE_DIR", dir.string().c_str(), 1);
    {
        Workspace ws;  // empty argument defers to the environment
        CHECK(ws.cache_dir() == dir.string());
        ws.component("Com", 2);
    }
    ::unsetenv("OPCH_CACHE_DIR");
    CHECK(std::filesystem::exists(dir / "Com_2_none.json"));
    Workspace ws2("");
    CHECK(ws2.cache_dir() == ".opch-cache");
}
