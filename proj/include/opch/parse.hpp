#pragma once

#include <string>

#include "opch/diterm.hpp"
#include "opch/term.hpp"

namespace opch {

// Text form of expressions:
//   expr := ['-'] term (('+'|'-') term)* | '0'
//   term := [rational '*'] mono
//   mono := var | '(' mono ' ' mono ')'
//   var  := 'x' digits ( apostrophes | '^(' digits ')' )
// Apostrophes and '^(k)' both give the derivation order; format_term writes
// apostrophes for orders <= 2 and '^(k)' from 3 on, and omits unit
// coefficients. parse_term(format_term(e)) == e for every canonical e.
// Malformed input raises SyntaxError carrying the byte offset.
Expr parse_term(const std::string& s);
std::string format_term(const Expr& e);
std::string format_term(const Monomial& m);

// Same surface for ≻/≺ expressions; leaves are undecorated and
//   mono := var | '(' mono ' > ' mono ')' | '(' mono ' < ' mono ')'
// with '>' = ≻ and '<' = ≺.
DiExpr parse_di_term(const std::string& s);
std::string format_di_term(const DiExpr& e);
std::string format_di_term(const DiMonomial& m);

} // namespace opch
