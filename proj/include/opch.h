#ifndef OPCH_H
#define OPCH_H

/* C interface of the operad checker shared library.
 *
 * Every function that can fail returns an int status: OPCH_OK on success,
 * one of the OPCH_ERR_* codes otherwise.  On failure the out parameters are
 * left untouched and opch_last_error() describes what went wrong.  Strings
 * returned through char** out parameters are heap copies owned by the
 * caller; release them with opch_string_free().
 *
 * Expression syntax (one-operation terms):
 *   expr := ['-'] term (('+'|'-') term)* | '0'
 *   term := [p '/' q '*'] mono
 *   mono := var | '(' mono ' ' mono ')'
 *   var  := 'x' digits followed by apostrophes or '^(' digits ')'
 * Two-operation terms use the same shape with '(' mono ' > ' mono ')' and
 * '(' mono ' < ' mono ')' and undecorated variables.
 */

#ifdef __cplusplus
extern "C" {
#endif

#define OPCH_OK 0
#define OPCH_ERR_SYNTAX 1
#define OPCH_ERR_MIXED_WEIGHT 2
#define OPCH_ERR_ZERO_EXPR 3
#define OPCH_ERR_INVALID_WEIGHT 4
#define OPCH_ERR_UNKNOWN_VARIETY 5
#define OPCH_ERR_ARITY_MISMATCH 6
#define OPCH_ERR_VARIABLE_CLASH 7
#define OPCH_ERR_NOT_IN_IMAGE 8
#define OPCH_ERR_NO_DERIVATION 9
#define OPCH_ERR_PAIR_MISMATCH 10
#define OPCH_ERR_DIMENSION_MISMATCH 11
#define OPCH_ERR_ARITY_TOO_LARGE 12
#define OPCH_ERR_DER_ORDER_CAP 13
#define OPCH_ERR_INVALID_ARGUMENT 14
#define OPCH_ERR_IO 15
#define OPCH_ERR_INTERNAL 16

/* Preimage construction strategies for opch_express. */
#define OPCH_EXPRESS_AUTO 0      /* recursive when available, solver otherwise */
#define OPCH_EXPRESS_SOLVER 1    /* linear solve over the expansion columns */
#define OPCH_EXPRESS_RECURSIVE 2 /* constructive rewriting (bicom, alt, assos) */

typedef struct opch_session opch_session;

/* Library version string, e.g. "0.1.0".  Static storage, do not free. */
const char* opch_version(void);

/* Sessions are cheap; the heavy state (quotient bases, expansion matrices)
 * is built lazily on first use and memoized inside the session. */
opch_session* opch_session_new(void);
void opch_session_free(opch_session* s);

/* Message of the most recent failing call on this session, or "" if the
 * last call succeeded.  Valid until the next call on the same session. */
const char* opch_last_error(const opch_session* s);

void opch_string_free(char* s);

/* Where consequence-space caches are stored.  Default: $OPCH_CACHE_DIR if
 * set, otherwise ".opch-cache".  Resets lazily built state when changed. */
int opch_set_cache_dir(opch_session* s, const char* path);

/* Largest arity for which quotient spaces are built (default 4; plain
 * dimensions reach one step further). */
int opch_set_max_arity(opch_session* s, int max_arity);

/* Common weight of the expression's monomials. */
int opch_weight(opch_session* s, const char* expr, int* out);

/* Expand a two-operation expression into derivation terms. */
int opch_tau(opch_session* s, const char* diexpr, char** out);

/* Canonical representative of the expression's class modulo the variety's
 * identity consequences, formatted as an expression. */
int opch_normal_form(opch_session* s, const char* variety, const char* expr,
                     char** out);

/* Dimension of the variety's multilinear component at the given arity. */
int opch_dim(opch_session* s, const char* variety, int arity, long long* out);

/* Dimension of the weight -1 component of the variety's derived counterpart,
 * measured as the rank of its expansion matrix. */
int opch_dim_der(opch_session* s, const char* variety, int arity,
                 long long* out);

/* 1 if every weight -1 class at this arity is an expansion image, else 0. */
int opch_criterion(opch_session* s, const char* variety, int arity, int* out);

/* Verify the defining identities of a two-operation variety against its
 * one-operation counterpart at arity 3.  out_json receives a JSON summary;
 * ok is 1 when every identity expands to zero and the consequence rank
 * matches the expected kernel dimension. */
int opch_check_identities(opch_session* s, const char* derived_variety,
                          char** out_json, int* ok);

/* Rewrite a weight -1 expression as a two-operation expression whose
 * expansion lands in the same class.  method is one of the OPCH_EXPRESS_*
 * constants. */
int opch_express(opch_session* s, const char* variety, const char* expr,
                 int method, char** out);

/* Run the built-in verification suite up to max_arity and, when out_path is
 * non-NULL, write the JSON report there.  failed receives the number of
 * failing records. */
int opch_run_report(opch_session* s, int max_arity, const char* out_path,
                    int* failed);

#ifdef __cplusplus
}
#endif

#endif /* OPCH_H */
