#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

#include "doctest.h"
#include "opch.h"

namespace {

std::string cache_dir_for(const std::string& tag) {
    auto p = std::filesystem::temp_directory_path() /
             ("opch-capi-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(p);
    return p.string();
}

struct Session {
    opch_session* s;
    explicit Session(const std::string& tag) : s(opch_session_new()) {
        REQUIRE(s != nullptr);
        REQUIRE(opch_set_cache_dir(s, cache_dir_for(tag).c_str()) == OPCH_OK);
    }
    ~Session() { opch_session_free(s); }
    operator opch_session*() { return s; }
};

std::string take(char* owned) {
    REQUIRE(owned != nullptr);
    std::string out = owned;
    opch_string_free(owned);
    return out;
}

} // namespace

TEST_CASE("version and session lifecycle") {
    CHECK(std::string(opch_version()) == "0.1.0");
    opch_session* s = opch_session_new();
    REQUIRE(s != nullptr);
    CHECK(std::string(opch_last_error(s)).empty());
    opch_session_free(s);
    opch_session_free(nullptr);  // must be a no-op
    opch_string_free(nullptr);   // likewise
}

TEST_CASE("weight of expressions") {
    Session s("weight");
    int w = 99;
    CHECK(opch_weight(s, "(x1 (x2' x3'))", &w) == OPCH_OK);
    CHECK(w == -1);
    CHECK(opch_weight(s, "x1''", &w) == OPCH_OK);
    CHECK(w == 1);
    CHECK(opch_weight(s, "(x1 x2) + 2/3 * (x2 x1)", &w) == OPCH_OK);
    CHECK(w == -2);

    w = 99;
    CHECK(opch_weight(s, "(x1 x2) + x1", &w) == OPCH_ERR_MIXED_WEIGHT);
    CHECK(w == 99);  // out parameter untouched on failure
    CHECK(std::string(opch_last_error(s)).find("weight") != std::string::npos);
    CHECK(opch_weight(s, "(x1", &w) == OPCH_ERR_SYNTAX);
    CHECK(opch_weight(s, nullptr, &w) == OPCH_ERR_INVALID_ARGUMENT);
    CHECK(opch_weight(nullptr, "x1", &w) == OPCH_ERR_INVALID_ARGUMENT);
}

TEST_CASE("tau expansion") {
    Session s("tau");
    char* out = nullptr;
    REQUIRE(opch_tau(s, "(x1 > (x2 < x3))", &out) == OPCH_OK);
    CHECK(take(out) == "(x1' (x2 x3'))");
    REQUIRE(opch_tau(s, "(x1 > x2) - (x1 < x2)", &out) == OPCH_OK);
    CHECK(take(out) == "(x1' x2) - (x1 x2')");
    CHECK(opch_tau(s, "(x1 (x2 x3))", &out) == OPCH_ERR_SYNTAX);
    CHECK(opch_tau(s, nullptr, &out) == OPCH_ERR_INVALID_ARGUMENT);
}

TEST_CASE("normal forms through the c surface") {
    Session s("nf");
    char* out = nullptr;
    REQUIRE(opch_normal_form(s, "bicom", "(x3' (x2 x1'))", &out) == OPCH_OK);
    CHECK(take(out) == "(x2 (x3' x1'))");
    REQUIRE(opch_normal_form(s, "com", "(x2 x1) - (x1 x2)", &out) == OPCH_OK);
    CHECK(take(out) == "0");
    REQUIRE(opch_normal_form(s, "alt", "((x1 x1) x2)", &out) ==
            OPCH_ERR_ARITY_MISMATCH);
    REQUIRE(opch_normal_form(s, "derbicom", "(x1 > (x2 > x3))", &out) == OPCH_OK);
    std::string di_nf = take(out);
    CHECK(!di_nf.empty());
    CHECK(opch_normal_form(s, "nosuch", "x1", &out) == OPCH_ERR_UNKNOWN_VARIETY);
}

TEST_CASE("dimensions and criterion") {
    Session s("dims");
    long long d = 0;
    CHECK(opch_dim(s, "alt", 3, &d) == OPCH_OK);
    CHECK(d == 7);
    CHECK(opch_dim(s, "bicom", 4, &d) == OPCH_OK);
    CHECK(d == 14);
    CHECK(opch_dim(s, "derbicom", 2, &d) == OPCH_OK);
    CHECK(d == 4);
    CHECK(opch_dim_der(s, "bicom", 3, &d) == OPCH_OK);
    CHECK(d == 36);
    CHECK(opch_dim_der(s, "assos", 3, &d) == OPCH_OK);
    CHECK(d == 42);

    int holds = -1;
    CHECK(opch_criterion(s, "com", 3, &holds) == OPCH_OK);
    CHECK(holds == 1);
    CHECK(opch_criterion(s, "zinb", 3, &holds) == OPCH_OK);
    CHECK(holds == 0);
}

TEST_CASE("arity bound is adjustable per session") {
    Session s("bound");
    long long d = 0;
    CHECK(opch_dim(s, "bicom", 6, &d) == OPCH_ERR_ARITY_TOO_LARGE);
    REQUIRE(opch_set_max_arity(s, 5) == OPCH_OK);
    CHECK(opch_dim(s, "bicom", 6, &d) == OPCH_OK);
    CHECK(d == 62);
    CHECK(opch_set_max_arity(s, 0) == OPCH_ERR_INVALID_ARGUMENT);
}

TEST_CASE("identity verification of the two-operation varieties") {
    Session s("ident");
    for (const char* dv : {"DerBiCom", "DerAlt", "DerAssos"}) {
        char* json = nullptr;
        int ok = 0;
        REQUIRE(opch_check_identities(s, dv, &json, &ok) == OPCH_OK);
        std::string j = take(json);
        CHECK(ok == 1);
        CHECK(j.find("\"ok\": true") != std::string::npos);
        CHECK(j.find("\"kernel_rank\"") != std::string::npos);
    }
    char* json = nullptr;
    int ok = 0;
    CHECK(opch_check_identities(s, "alt", &json, &ok) ==
          OPCH_ERR_INVALID_ARGUMENT);
}

TEST_CASE("express through the c surface") {
    Session s("express");
    char* out = nullptr;
    REQUIRE(opch_express(s, "alt", "(x1'(x2 x3'))", OPCH_EXPRESS_AUTO, &out) ==
            OPCH_OK);
    CHECK(take(out) == "(x1 > (x2 < x3))");
    REQUIRE(opch_express(s, "bicom", "(x1' (x2' x3))", OPCH_EXPRESS_RECURSIVE,
                         &out) == OPCH_OK);
    CHECK(take(out) == "(x2 > (x1 > x3))");
    REQUIRE(opch_express(s, "com", "(x1 (x2 x3''))", OPCH_EXPRESS_AUTO, &out) ==
            OPCH_OK);
    CHECK(!take(out).empty());

    CHECK(opch_express(s, "com", "(x1 x2)", OPCH_EXPRESS_AUTO, &out) ==
          OPCH_ERR_INVALID_WEIGHT);
    CHECK(opch_express(s, "com", "(x1 (x2 x3''))", OPCH_EXPRESS_RECURSIVE,
                       &out) == OPCH_ERR_INVALID_ARGUMENT);
    CHECK(opch_express(s, "zinb", "(x1 (x2 x3''))", OPCH_EXPRESS_SOLVER, &out) ==
          OPCH_ERR_NOT_IN_IMAGE);
    CHECK(opch_express(s, "alt", "(x1 (x2 x3''))", OPCH_EXPRESS_AUTO, &out) ==
          OPCH_OK);
    opch_string_free(out);
}

TEST_CASE("report through the c surface") {
    Session s("report");
    auto path = std::filesystem::temp_directory_path() /
                ("opch-capi-report-" + std::to_string(::getpid()) + ".json");
    std::filesystem::remove(path);

    int failed = -1;
    REQUIRE(opch_run_report(s, 2, path.string().c_str(), &failed) == OPCH_OK);
    CHECK(failed == 0);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string body((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    CHECK(body.find("\"schema\": 1") != std::string::npos);
    CHECK(body.find("03.dervar-dim.bicom.n2") != std::string::npos);
    std::filesystem::remove(path);

    CHECK(opch_run_report(s, 2, "/nonexistent-dir/rep.json", &failed) ==
          OPCH_ERR_IO);
    CHECK(opch_run_report(s, 1, nullptr, &failed) == OPCH_ERR_INVALID_ARGUMENT);
    // without an output path the report still runs and counts failures
    failed = -1;
    CHECK(opch_run_report(s, 2, nullptr, &failed) == OPCH_OK);
    CHECK(failed == 0);
}
