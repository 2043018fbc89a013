#include "opch.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "json.hpp"
#include "opch/derived.hpp"
#include "opch/diterm.hpp"
#include "opch/errors.hpp"
#include "opch/express.hpp"
#include "opch/parse.hpp"
#include "opch/report.hpp"
#include "opch/term.hpp"
#include "opch/varieties.hpp"

using namespace opch;

static_assert(OPCH_OK == static_cast<int>(ErrorCode::Ok));
static_assert(OPCH_ERR_SYNTAX == static_cast<int>(ErrorCode::Syntax));
static_assert(OPCH_ERR_MIXED_WEIGHT == static_cast<int>(ErrorCode::MixedWeight));
static_assert(OPCH_ERR_ZERO_EXPR == static_cast<int>(ErrorCode::ZeroExpr));
static_assert(OPCH_ERR_INVALID_WEIGHT == static_cast<int>(ErrorCode::InvalidWeight));
static_assert(OPCH_ERR_UNKNOWN_VARIETY == static_cast<int>(ErrorCode::UnknownVariety));
static_assert(OPCH_ERR_ARITY_MISMATCH == static_cast<int>(ErrorCode::ArityMismatch));
static_assert(OPCH_ERR_VARIABLE_CLASH == static_cast<int>(ErrorCode::VariableClash));
static_assert(OPCH_ERR_NOT_IN_IMAGE == static_cast<int>(ErrorCode::NotInImage));
static_assert(OPCH_ERR_NO_DERIVATION == static_cast<int>(ErrorCode::NoDerivation));
static_assert(OPCH_ERR_PAIR_MISMATCH == static_cast<int>(ErrorCode::PairMismatch));
static_assert(OPCH_ERR_DIMENSION_MISMATCH ==
              static_cast<int>(ErrorCode::DimensionMismatch));
static_assert(OPCH_ERR_ARITY_TOO_LARGE == static_cast<int>(ErrorCode::ArityTooLarge));
static_assert(OPCH_ERR_DER_ORDER_CAP == static_cast<int>(ErrorCode::DerOrderCap));
static_assert(OPCH_ERR_INVALID_ARGUMENT ==
              static_cast<int>(ErrorCode::InvalidArgument));
static_assert(OPCH_ERR_IO == static_cast<int>(ErrorCode::Io));
static_assert(OPCH_ERR_INTERNAL == static_cast<int>(ErrorCode::Internal));

struct opch_session {
    std::string cache_dir;   // "" = resolve via environment / default
    int max_arity = 0;       // 0 = leave the workspace default
    std::unique_ptr<Workspace> ws;
    std::string last_error;

    Workspace& workspace() {
        if (!ws) {
            ws = std::make_unique<Workspace>(cache_dir);
            if (max_arity > 0) ws->set_max_arity(max_arity);
        }
        return *ws;
    }
};

namespace {

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename Fn>
int guarded(opch_session* s, Fn&& fn) {
    if (!s) return OPCH_ERR_INVALID_ARGUMENT;
    s->last_error.clear();
    try {
        fn();
        return OPCH_OK;
    } catch (const Error& e) {
        s->last_error = e.what();
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        s->last_error = e.what();
        return OPCH_ERR_INTERNAL;
    }
}

void require(bool cond, const char* what) {
    if (!cond) fail(ErrorCode::InvalidArgument, what);
}

// Arity of a multilinear expression; every monomial must use x1..xn once.
int multilinear_arity(const Expr& e) {
    require(!e.empty(), "expected a nonzero expression");
    int n = e.begin()->first.arity();
    for (const auto& [m, c] : e) {
        (void)c;
        if (!is_multilinear(m, n))
            fail(ErrorCode::ArityMismatch,
                 "expression is not multilinear in x1..x" + std::to_string(n));
    }
    return n;
}

} // namespace

extern "C" {

const char* opch_version(void) { return kToolVersion; }

opch_session* opch_session_new(void) { return new (std::nothrow) opch_session(); }

void opch_session_free(opch_session* s) { delete s; }

const char* opch_last_error(const opch_session* s) {
    return s ? s->last_error.c_str() : "null session";
}

void opch_string_free(char* s) { std::free(s); }

int opch_set_cache_dir(opch_session* s, const char* path) {
    return guarded(s, [&] {
        require(path != nullptr, "cache path is null");
        s->cache_dir = path;
        s->ws.reset();
    });
}

int opch_set_max_arity(opch_session* s, int max_arity) {
    return guarded(s, [&] {
        require(max_arity >= 1, "max arity must be at least 1");
        s->max_arity = max_arity;
        if (s->ws) s->ws->set_max_arity(max_arity);
    });
}

int opch_weight(opch_session* s, const char* expr, int* out) {
    return guarded(s, [&] {
        require(expr && out, "null argument");
        Expr e = parse_term(expr);
        require(!e.empty(), "the zero expression has no weight");
        *out = weight(e);
    });
}

int opch_tau(opch_session* s, const char* diexpr, char** out) {
    return guarded(s, [&] {
        require(diexpr && out, "null argument");
        *out = dup_string(format_term(tau(parse_di_term(diexpr))));
    });
}

int opch_normal_form(opch_session* s, const char* variety, const char* expr,
                     char** out) {
    return guarded(s, [&] {
        require(variety && expr && out, "null argument");
        const VarietySpec& v = catalog(variety);
        if (v.num_ops == NumOps::Two) {
            DiExpr e = parse_di_term(expr);
            if (e.empty()) {
                *out = dup_string("0");
                return;
            }
            int n = e.begin()->first.arity();
            const DiComponent& comp = s->workspace().di_component(v.name, n);
            DiExpr res;
            for (const auto& [idx, c] : comp.coords(e))
                add_di_term(res, comp.ambient()[static_cast<std::size_t>(idx)], c);
            *out = dup_string(format_di_term(res));
            return;
        }
        Expr e = parse_term(expr);
        if (e.empty()) {
            *out = dup_string("0");
            return;
        }
        if (v.strategy == NfStrategy::ClosedFormBiCom) {
            *out = dup_string(format_term(bicom_normal_form(e)));
            return;
        }
        int n = multilinear_arity(e);
        int w = weight(e);
        *out = dup_string(format_term(s->workspace().component(v.name, n, w).residual(e)));
    });
}

int opch_dim(opch_session* s, const char* variety, int arity, long long* out) {
    return guarded(s, [&] {
        require(out != nullptr && variety != nullptr, "null argument");
        const VarietySpec& v = catalog(variety);
        if (v.num_ops == NumOps::Two)
            *out = s->workspace().di_component(v.name, arity).dim();
        else
            *out = s->workspace().component(v.name, arity).dim();
    });
}

int opch_dim_der(opch_session* s, const char* variety, int arity, long long* out) {
    return guarded(s, [&] {
        require(out != nullptr && variety != nullptr, "null argument");
        *out = dim_dervar(s->workspace(), catalog(variety), arity);
    });
}

int opch_criterion(opch_session* s, const char* variety, int arity, int* out) {
    return guarded(s, [&] {
        require(out != nullptr && variety != nullptr, "null argument");
        *out = check_weight_criterion(s->workspace(), catalog(variety), arity) ? 1 : 0;
    });
}

int opch_check_identities(opch_session* s, const char* derived_variety,
                          char** out_json, int* ok) {
    return guarded(s, [&] {
        require(derived_variety != nullptr, "null argument");
        const VarietySpec& dv = catalog(derived_variety);
        if (dv.num_ops != NumOps::Two)
            fail(ErrorCode::InvalidArgument,
                 dv.name + " is not a two-operation variety");
        const VarietySpec& base = catalog(dv.partner);
        DiIdentityReport rep = check_di_identities(s->workspace(), dv, base);
        if (out_json) {
            nlohmann::ordered_json j;
            j["derived_variety"] = dv.name;
            j["base_variety"] = base.name;
            j["identities"] = nlohmann::ordered_json::array();
            for (const auto& entry : rep.identities)
                j["identities"].push_back(
                    {{"label", entry.label}, {"vanishes", entry.vanishes}});
            j["kernel_rank"] = rep.kernel_rank;
            j["expected_kernel"] = rep.expected_kernel;
            j["all_vanish"] = rep.all_vanish;
            j["kernel_matches"] = rep.kernel_matches;
            j["ok"] = rep.ok();
            *out_json = dup_string(j.dump(2) + "\n");
        }
        if (ok) *ok = rep.ok() ? 1 : 0;
    });
}

int opch_express(opch_session* s, const char* variety, const char* expr,
                 int method, char** out) {
    return guarded(s, [&] {
        require(variety && expr && out, "null argument");
        require(method == OPCH_EXPRESS_AUTO || method == OPCH_EXPRESS_SOLVER ||
                    method == OPCH_EXPRESS_RECURSIVE,
                "unknown express method");
        const VarietySpec& v = catalog(variety);
        Expr e = parse_term(expr);
        Workspace& ws = s->workspace();

        bool recursive;
        if (method == OPCH_EXPRESS_SOLVER) {
            recursive = false;
        } else {
            recursive = v.name == "BiCom" || v.name == "Alt" || v.name == "Assos";
            if (!recursive && method == OPCH_EXPRESS_RECURSIVE)
                fail(ErrorCode::InvalidArgument,
                     "no recursive construction for " + v.name +
                         "; use the solver method");
        }

        DiExpr d;
        if (!recursive)
            d = express_solver(ws, v, e);
        else if (v.name == "BiCom")
            d = express_bicom(e);
        else if (v.name == "Alt")
            d = express_alt(ws, e);
        else
            d = express_assos(ws, e);
        *out = dup_string(format_di_term(d));
    });
}

int opch_run_report(opch_session* s, int max_arity, const char* out_path,
                    int* failed) {
    return guarded(s, [&] {
        Report rep = run_report(s->workspace(), max_arity);
        if (out_path) write_report(rep, out_path);
        if (failed) *failed = rep.failed;
    });
}

} // extern "C"
