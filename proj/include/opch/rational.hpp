#pragma once

#include <gmpxx.h>

#include <string>

#include "opch/errors.hpp"

namespace opch {

// Exact arbitrary-precision rational. All coefficient arithmetic in the
// library goes through this alias so the backend stays swappable.
using Rat = mpq_class;

inline std::string rat_to_string(const Rat& q) { return q.get_str(); }

// Accepts "p" or "p/q" with optional leading '-'; canonicalizes sign and gcd.
inline Rat rat_from_string(const std::string& s) {
    if (s.empty()) throw SyntaxError("empty rational", 0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        bool ok = (c >= '0' && c <= '9') || c == '/' || (c == '-' && i == 0);
        if (!ok) throw SyntaxError("bad rational '" + s + "'", i);
    }
    Rat q;
    if (q.set_str(s, 10) != 0) throw SyntaxError("bad rational '" + s + "'", 0);
    if (q.get_den() == 0) throw SyntaxError("zero denominator in '" + s + "'", 0);
    q.canonicalize();
    return q;
}

} // namespace opch
