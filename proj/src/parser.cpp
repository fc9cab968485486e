#include "qgrav/parser.hpp"

#include <cctype>
#include <cstdlib>
#include <optional>

#include "qgrav/error.hpp"

namespace qgrav {

namespace {

std::optional<Fn> lookup_fn(std::string_view name) {
    if (name == "sin") return Fn::Sin;
    if (name == "cos") return Fn::Cos;
    if (name == "tan") return Fn::Tan;
    if (name == "cot") return Fn::Cot;
    if (name == "exp") return Fn::Exp;
    if (name == "ln") return Fn::Ln;
    if (name == "sqrt") return Fn::Sqrt;
    if (name == "abs") return Fn::Abs;
    if (name == "conj") return Fn::Conj;
    if (name == "re") return Fn::Re;
    if (name == "im") return Fn::Im;
    return std::nullopt;
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expr run() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size())
            fail({"+", "-", "*", "/", "^", "end of input"});
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(std::vector<std::string> expected) {
        std::string msg = "syntax error at offset " + std::to_string(pos_) + ", expected ";
        for (std::size_t i = 0; i < expected.size(); ++i)
            msg += (i ? " | " : "") + expected[i];
        throw SyntaxError(msg, pos_, std::move(expected));
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    bool accept(char c) {
        if (peek(c)) { ++pos_; return true; }
        return false;
    }

    Expr parse_expr() {
        std::vector<Expr> terms{parse_term()};
        for (;;) {
            if (accept('+')) terms.push_back(parse_term());
            else if (accept('-')) terms.push_back(-parse_term());
            else break;
        }
        return terms.size() == 1 ? terms[0] : sum(std::move(terms));
    }

    Expr parse_term() {
        std::vector<Expr> factors{parse_factor()};
        for (;;) {
            if (accept('*')) factors.push_back(parse_factor());
            else if (accept('/')) factors.push_back(power(parse_factor(), integer(-1)));
            else break;
        }
        return factors.size() == 1 ? factors[0] : product(std::move(factors));
    }

    Expr parse_factor() {
        if (accept('-')) return -parse_factor();
        Expr base = parse_atom();
        if (accept('^')) return power(std::move(base), parse_factor());
        return base;
    }

    Expr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) fail({"number", "identifier", "("});
        const char c = text_[pos_];
        if (accept('(')) {
            Expr e = parse_expr();
            expect_close();
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        fail({"number", "identifier", "("});
    }

    void expect_close() {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ')') { ++pos_; return; }
        fail({")", "+", "-", "*", "/", "^"});
    }

    Expr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        std::int64_t frac_digits = 0;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            const std::size_t fs = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            frac_digits = static_cast<std::int64_t>(pos_ - fs);
        }
        std::int64_t exp10 = 0;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            const std::size_t save = pos_;
            ++pos_;
            bool neg = false;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
                neg = text_[pos_] == '-';
                ++pos_;
            }
            if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                pos_ = save;  // not an exponent after all (e.g. "2*e" is not valid here anyway)
            } else {
                std::int64_t v = 0;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    v = v * 10 + (text_[pos_++] - '0');
                exp10 = neg ? -v : v;
            }
        }
        // digits with the decimal point removed form the mantissa; the value
        // is mantissa * 10^(exp10 - frac_digits), kept exact when it fits
        std::string digits;
        for (std::size_t i = start; i < pos_; ++i) {
            const char d = text_[i];
            if (d == '.') continue;
            if (d == 'e' || d == 'E') break;
            digits += d;
        }
        std::int64_t mantissa = 0;
        bool overflow = false;
        for (char d : digits) {
            if (mantissa > (INT64_MAX - 9) / 10) { overflow = true; break; }
            mantissa = mantissa * 10 + (d - '0');
        }
        const std::int64_t net = exp10 - frac_digits;
        if (!overflow && net >= -18 && net <= 18) {
            auto p = Rational::pow(Rational(10), net);
            if (p) {
                auto v = Rational::mul(Rational(mantissa), *p);
                if (v) return number(*v);
            }
        }
        return floating(std::strtod(std::string(text_.substr(start, pos_ - start)).c_str(), nullptr));
    }

    Expr parse_ident() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name(text_.substr(start, pos_ - start));
        if (peek('(')) {
            auto f = lookup_fn(name);
            if (!f) throw UnknownFunctionError(name, start);
            ++pos_;  // consume '('
            Expr arg = parse_expr();
            expect_close();
            return call(*f, std::move(arg));
        }
        if (name == "i") return imag_unit();
        return symbol(std::move(name));
    }
};

}  // namespace

Expr parse(std::string_view text) { return Parser(text).run(); }

}  // namespace qgrav
