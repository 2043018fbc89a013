#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "opch.h"

namespace {

// 0 = done, 1 = a verification answered "no", 2 = bad usage or input.
int status_exit(opch_session* s, int status) {
    if (status == OPCH_OK) return 0;
    std::fprintf(stderr, "error: %s\n", opch_last_error(s));
    return status == OPCH_ERR_NOT_IN_IMAGE ? 1 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"weight calculus for operads with a derivation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", opch_version());

    std::string cache_dir;
    app.add_option("--cache-dir", cache_dir,
                   "directory for cached consequence bases (default: "
                   "$OPCH_CACHE_DIR, else .opch-cache)");

    opch_session* session = opch_session_new();
    if (!session) {
        std::fprintf(stderr, "error: out of memory\n");
        return 2;
    }

    int rc = 0;
    auto prep = [&]() -> bool {
        if (cache_dir.empty()) return true;
        int st = opch_set_cache_dir(session, cache_dir.c_str());
        if (st != OPCH_OK) {
            rc = status_exit(session, st);
            return false;
        }
        return true;
    };
    auto print_owned = [](char* s) {
        std::printf("%s\n", s);
        opch_string_free(s);
    };

    std::string expr, variety, method = "auto", out_path;
    int arity = 0, max_arity = 4;

    auto* wt = app.add_subcommand("wt", "common weight of an expression");
    wt->add_option("expr", expr, "one-operation expression")->required();
    wt->callback([&] {
        if (!prep()) return;
        int w = 0;
        int st = opch_weight(session, expr.c_str(), &w);
        if (st == OPCH_OK) std::printf("%d\n", w);
        rc = status_exit(session, st);
    });

    auto* tau = app.add_subcommand(
        "tau", "expand a two-operation expression into derivation terms");
    tau->add_option("diexpr", expr, "two-operation expression")->required();
    tau->callback([&] {
        if (!prep()) return;
        char* out = nullptr;
        int st = opch_tau(session, expr.c_str(), &out);
        if (st == OPCH_OK) print_owned(out);
        rc = status_exit(session, st);
    });

    auto* nf = app.add_subcommand(
        "nf", "canonical representative modulo the variety's identities");
    nf->add_option("--variety", variety, "variety name")->required();
    nf->add_option("expr", expr, "expression")->required();
    nf->callback([&] {
        if (!prep()) return;
        char* out = nullptr;
        int st = opch_normal_form(session, variety.c_str(), expr.c_str(), &out);
        if (st == OPCH_OK) print_owned(out);
        rc = status_exit(session, st);
    });

    auto* dim = app.add_subcommand(
        "dim", "dimension of the multilinear component at an arity");
    dim->add_option("--variety", variety, "variety name")->required();
    dim->add_option("--arity", arity, "arity")->required();
    dim->callback([&] {
        if (!prep()) return;
        long long d = 0;
        int st = opch_dim(session, variety.c_str(), arity, &d);
        if (st == OPCH_OK) std::printf("%lld\n", d);
        rc = status_exit(session, st);
    });

    auto* dim_der = app.add_subcommand(
        "dim-der", "dimension of the weight -1 component of the derived "
                   "counterpart");
    dim_der->add_option("--variety", variety, "variety name")->required();
    dim_der->add_option("--arity", arity, "arity")->required();
    dim_der->callback([&] {
        if (!prep()) return;
        long long d = 0;
        int st = opch_dim_der(session, variety.c_str(), arity, &d);
        if (st == OPCH_OK) std::printf("%lld\n", d);
        rc = status_exit(session, st);
    });

    auto* crit = app.add_subcommand(
        "criterion",
        "is every weight -1 class at this arity an expansion image?");
    crit->add_option("--variety", variety, "variety name")->required();
    crit->add_option("--arity", arity, "arity")->required();
    crit->callback([&] {
        if (!prep()) return;
        int holds = 0;
        int st = opch_criterion(session, variety.c_str(), arity, &holds);
        if (st != OPCH_OK) {
            rc = status_exit(session, st);
            return;
        }
        std::printf("%s\n", holds ? "true" : "false");
        rc = holds ? 0 : 1;
    });

    auto* ident = app.add_subcommand(
        "check-identities",
        "verify a two-operation variety against its one-operation base");
    ident->add_option("--derived", variety, "two-operation variety name")
        ->required();
    ident->callback([&] {
        if (!prep()) return;
        char* json = nullptr;
        int ok = 0;
        int st = opch_check_identities(session, variety.c_str(), &json, &ok);
        if (st != OPCH_OK) {
            rc = status_exit(session, st);
            return;
        }
        std::printf("%s", json);
        opch_string_free(json);
        rc = ok ? 0 : 1;
    });

    auto* express = app.add_subcommand(
        "express",
        "write a weight -1 expression as a two-operation preimage");
    express->add_option("--variety", variety, "variety name")->required();
    express
        ->add_option("--method", method,
                     "construction strategy (default: recursive when "
                     "available)")
        ->check(CLI::IsMember({"auto", "solver", "recursive"}));
    express->add_option("expr", expr, "weight -1 expression")->required();
    express->callback([&] {
        if (!prep()) return;
        int m = method == "solver"      ? OPCH_EXPRESS_SOLVER
                : method == "recursive" ? OPCH_EXPRESS_RECURSIVE
                                        : OPCH_EXPRESS_AUTO;
        char* out = nullptr;
        int st = opch_express(session, variety.c_str(), expr.c_str(), m, &out);
        if (st == OPCH_OK) print_owned(out);
        rc = status_exit(session, st);
    });

    auto* report = app.add_subcommand(
        "report", "run the verification suite and write a JSON report");
    report->add_option("--max-arity", max_arity, "largest arity to verify")
        ->check(CLI::Range(2, 6));
    report->add_option("--out", out_path, "output path for the JSON report")
        ->required();
    report->callback([&] {
        if (!prep()) return;
        int failed = 0;
        int st = opch_run_report(session, max_arity, out_path.c_str(), &failed);
        if (st != OPCH_OK) {
            rc = status_exit(session, st);
            return;
        }
        if (failed == 0)
            std::printf("all checks passed\n");
        else
            std::printf("%d checks failed\n", failed);
        rc = failed == 0 ? 0 : 1;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        opch_session_free(session);
        return code == 0 ? 0 : 2;
    }
    opch_session_free(session);
    return rc;
}
