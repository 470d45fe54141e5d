#pragma once

#include <cctype>
#include <string>
#include <string_view>

#include "errors.hpp"
#include "ratfun.hpp"

namespace mconn {

// Grammar (whitespace insignificant):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' ['-'] digits)?
//   primary := number | 't' | 'i' | '(' expr ')'
//   number  := digits ('/' digits)? 'i'?
// A fraction written between two integer literals is one rational literal,
// so "3/4i" is (3/4)*i and "3/2^2" is 9/4.

namespace detail {

class ExprParser {
public:
    ExprParser(std::string_view src, int line, int col0) : src_(src), line_(line), col0_(col0) {}

    RatFun parse()
    {
        skip_ws();
        if (at_end()) fail("empty expression");
        RatFun r = expr();
        skip_ws();
        if (!at_end()) fail(std::string("unexpected character '") + src_[pos_] + "'");
        return r;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const
    {
        throw ParseError(line_, col0_ + static_cast<int>(pos_), msg);
    }

    bool at_end() const { return pos_ >= src_.size(); }
    char peek() const { return at_end() ? '\0' : src_[pos_]; }
    void skip_ws()
    {
        while (!at_end() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    bool accept(char c)
    {
        skip_ws();
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    RatFun expr()
    {
        RatFun acc = term();
        for (;;) {
            if (accept('+'))
                acc += term();
            else if (accept('-'))
                acc -= term();
            else
                return acc;
        }
    }

    RatFun term()
    {
        RatFun acc = unary();
        for (;;) {
            if (accept('*')) {
                acc *= unary();
            } else if (accept('/')) {
                std::size_t at = pos_;
                RatFun d = unary();
                if (d.is_zero()) {
                    pos_ = at;
                    fail("division by zero");
                }
                acc /= d;
            } else {
                return acc;
            }
        }
    }

    RatFun unary()
    {
        if (accept('-')) return -unary();
        if (accept('+')) return unary();
        return power();
    }

    RatFun power()
    {
        RatFun base = primary();
        if (!accept('^')) return base;
        skip_ws();
        bool neg = false;
        if (peek() == '-' || peek() == '+') {
            neg = peek() == '-';
            ++pos_;
            skip_ws();
        }
        if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("exponent must be an integer");
        long e = 0;
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
            e = e * 10 + (src_[pos_++] - '0');
            if (e > 100000) fail("exponent too large");
        }
        if (neg && base.is_zero()) fail("zero raised to a negative power");
        return base.pow(neg ? -static_cast<int>(e) : static_cast<int>(e));
    }

    mpz_class digits()
    {
        std::size_t start = pos_;
        while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        return mpz_class(std::string(src_.substr(start, pos_ - start)));
    }

    RatFun primary()
    {
        skip_ws();
        char c = peek();
        if (c == '(') {
            ++pos_;
            RatFun r = expr();
            if (!accept(')')) fail("expected ')'");
            return r;
        }
        if (c == 't') {
            ++pos_;
            return RatFun::t();
        }
        if (c == 'i') {
            ++pos_;
            return RatFun(GaussRat::i());
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            mpq_class q(digits());
            if (peek() == '/' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
                ++pos_;
                std::size_t at = pos_;
                mpz_class den = digits();
                if (den == 0) {
                    pos_ = at;
                    fail("zero denominator");
                }
                q = mpq_class(q.get_num(), den);
                q.canonicalize();
            }
            if (peek() == 'i') {
                ++pos_;
                return RatFun(GaussRat(0, q));
            }
            return RatFun(GaussRat(q));
        }
        if (at_end()) fail("unexpected end of expression");
        fail(std::string("unexpected character '") + c + "'");
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_;
    int col0_;
};

} // namespace detail

/// Parses a rational function of t over Q(i). `line`/`col` locate the text in
/// a larger file for error messages.
inline RatFun parse_ratfun(std::string_view text, int line = 1, int col = 1)
{
    return detail::ExprParser(text, line, col).parse();
}

/// Parses a constant expression (no t) into a Gaussian rational.
inline GaussRat parse_gauss(std::string_view text, int line = 1, int col = 1)
{
    RatFun r = parse_ratfun(text, line, col);
    if (!r.is_constant()) throw ParseError(line, col, "expected a constant, got '" + std::string(text) + "'");
    return r.constant_value();
}

} // namespace mconn
