#include "opch/parse.hpp"

#include <cctype>

namespace opch {

namespace {

class Cursor {
public:
    explicit Cursor(const std::string& s) : s_(s) {}

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool at_end() {
        skip_ws();
        return pos_ >= s_.size();
    }
    char peek() {
        skip_ws();
        if (pos_ >= s_.size()) err("unexpected end of input");
        return s_[pos_];
    }
    char take() {
        char c = peek();
        ++pos_;
        return c;
    }
    void expect(char c) {
        if (peek() != c) err(std::string("expected '") + c + "'");
        ++pos_;
    }
    bool try_take(char c) {
        if (at_end() || s_[pos_] != c) return false;
        ++pos_;
        return true;
    }
    // Raw (no whitespace skip) single-character test, for apostrophe runs.
    bool try_take_raw(char c) {
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    long take_digits() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ == start) err("expected digits");
        long v = 0;
        for (std::size_t i = start; i < pos_; ++i) {
            v = v * 10 + (s_[i] - '0');
            if (v > 1000000) err("number too large");
        }
        return v;
    }
    [[noreturn]] void err(const std::string& what) const { throw SyntaxError(what, pos_); }

    std::size_t pos() const { return pos_; }

private:
    const std::string& s_;
    std::size_t pos_ = 0;
};

Generator parse_generator(Cursor& c) {
    c.expect('x');
    int var = static_cast<int>(c.take_digits());
    if (var < 1) c.err("variable index must be >= 1");
    int der = 0;
    if (c.try_take_raw('^')) {
        if (!c.try_take_raw('(')) c.err("expected '(' after '^'");
        der = static_cast<int>(c.take_digits());
        if (!c.try_take_raw(')')) c.err("expected ')' closing '^('");
    } else {
        while (c.try_take_raw('\'')) ++der;
    }
    if (der > max_der_order()) c.err("derivation order exceeds the cap");
    return Generator{var, der};
}

Monomial parse_mono(Cursor& c) {
    if (c.peek() == '(') {
        c.take();
        Monomial l = parse_mono(c);
        Monomial r = parse_mono(c);
        c.expect(')');
        return Monomial::pair(l, r);
    }
    return Monomial::leaf(parse_generator(c));
}

// Unsigned rational literal: digits ['/' digits].
Rat parse_rat(Cursor& c) {
    long num = c.take_digits();
    if (c.try_take_raw('/')) {
        long den = c.take_digits();
        if (den == 0) c.err("zero denominator");
        Rat q(num, den);
        q.canonicalize();
        return q;
    }
    return Rat(num);
}

DiMonomial parse_di_mono(Cursor& c) {
    if (c.peek() == '(') {
        c.take();
        DiMonomial l = parse_di_mono(c);
        char opc = c.take();
        if (opc != '>' && opc != '<') c.err("expected '>' or '<'");
        DiMonomial r = parse_di_mono(c);
        c.expect(')');
        return DiMonomial::node(opc == '>' ? DiOp::Succ : DiOp::Prec, l, r);
    }
    c.expect('x');
    int var = static_cast<int>(c.take_digits());
    if (var < 1) c.err("variable index must be >= 1");
    return DiMonomial::leaf(var);
}

std::string format_generator(const Generator& g) {
    std::string s = "x" + std::to_string(g.var_index);
    if (g.der_order >= 3) {
        s += "^(" + std::to_string(g.der_order) + ")";
    } else {
        s.append(static_cast<std::size_t>(g.der_order), '\'');
    }
    return s;
}

void format_mono(const Monomial& m, std::string& out) {
    if (m.is_leaf()) {
        out += format_generator(m.gen());
        return;
    }
    out += '(';
    format_mono(m.left(), out);
    out += ' ';
    format_mono(m.right(), out);
    out += ')';
}

void format_di_mono(const DiMonomial& m, std::string& out) {
    if (m.is_leaf()) {
        out += "x" + std::to_string(m.var_index());
        return;
    }
    out += '(';
    format_di_mono(m.left(), out);
    out += m.op() == DiOp::Succ ? " > " : " < ";
    format_di_mono(m.right(), out);
    out += ')';
}

template <typename ExprT, typename FormatMono>
std::string format_sum(const ExprT& e, FormatMono fmt) {
    if (e.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [m, c] : e) {
        Rat a = c < 0 ? Rat(-c) : c;
        if (first) {
            if (c < 0) out += '-';
            first = false;
        } else {
            out += c < 0 ? " - " : " + ";
        }
        if (a != 1) {
            out += rat_to_string(a);
            out += " * ";
        }
        fmt(m, out);
    }
    return out;
}

} // namespace

Expr parse_term(const std::string& s) {
    Cursor c(s);
    Expr e;
    if (c.at_end()) c.err("empty input");
    if (c.peek() == '0') {
        c.take();
        if (!c.at_end()) c.err("trailing input after '0'");
        return e;
    }
    bool first = true;
    while (!(c.at_end() && !first)) {
        Rat sign(1);
        if (first) {
            if (c.try_take('-')) sign = -1;
        } else {
            char op = c.take();
            if (op == '-') sign = -1;
            else if (op != '+') c.err("expected '+' or '-'");
        }
        Rat coeff(1);
        if (std::isdigit(static_cast<unsigned char>(c.peek()))) {
            coeff = parse_rat(c);
            c.expect('*');
        }
        Monomial m = parse_mono(c);
        add_term(e, m, sign * coeff);
        first = false;
    }
    return e;
}

DiExpr parse_di_term(const std::string& s) {
    Cursor c(s);
    DiExpr e;
    if (c.at_end()) c.err("empty input");
    if (c.peek() == '0') {
        c.take();
        if (!c.at_end()) c.err("trailing input after '0'");
        return e;
    }
    bool first = true;
    while (!(c.at_end() && !first)) {
        Rat sign(1);
        if (first) {
            if (c.try_take('-')) sign = -1;
        } else {
            char op = c.take();
            if (op == '-') sign = -1;
            else if (op != '+') c.err("expected '+' or '-'");
        }
        Rat coeff(1);
        if (std::isdigit(static_cast<unsigned char>(c.peek()))) {
            coeff = parse_rat(c);
            c.expect('*');
        }
        DiMonomial m = parse_di_mono(c);
        add_di_term(e, m, sign * coeff);
        first = false;
    }
    return e;
}

std::string format_term(const Expr& e) {
    return format_sum(e, [](const Monomial& m, std::string& out) { format_mono(m, out); });
}

std::string format_term(const Monomial& m) {
    std::string out;
    format_mono(m, out);
    return out;
}

std::string format_di_term(const DiExpr& e) {
    return format_sum(e, [](const DiMonomial& m, std::string& out) { format_di_mono(m, out); });
}

std::string format_di_term(const DiMonomial& m) {
    std::string out;
    format_di_mono(m, out);
    return out;
}

} // namespace opch
