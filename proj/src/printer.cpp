#include "qgrav/printer.hpp"

#include <charconv>
#include <cstdio>
#include <optional>
#include <vector>

namespace qgrav {

namespace {

std::string float_str(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, p);
    // keep it lexically a float so exact/inexact survives a round trip
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
        s += ".0";
    return s;
}

std::string pp(const Expr& e);

std::string pp_parens_if(const Expr& e, bool cond) {
    return cond ? "(" + pp(e) + ")" : pp(e);
}

std::optional<std::int64_t> integer_exponent(const Expr& f) {
    if (f.kind() != Kind::Power) return 1;
    if (f.kids()[1].is_integer()) return f.kids()[1].node().number.num();
    return std::nullopt;
}

Expr with_exponent(const Expr& base, std::int64_t n) {
    if (n == 1) return base;
    Expr p = power(base, integer(n));
    return p;
}

// Presentation pass: pair cos(u)^a with sin(u)^-b into cot(u)^min (and the
// mirror pairing into tan) before rendering a product's factors.
std::vector<Expr> fold_cot_tan(std::vector<Expr> fs) {
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const Expr& bi = factor_base(fs[i]);
        if (!(bi.kind() == Kind::Call &&
              (bi.node().fn == Fn::Cos || bi.node().fn == Fn::Sin)))
            continue;
        auto ei = integer_exponent(fs[i]);
        if (!ei || *ei <= 0) continue;
        const Fn partner_fn = bi.node().fn == Fn::Cos ? Fn::Sin : Fn::Cos;
        for (std::size_t j = 0; j < fs.size(); ++j) {
            if (j == i) continue;
            const Expr& bj = factor_base(fs[j]);
            if (!(bj.kind() == Kind::Call && bj.node().fn == partner_fn)) continue;
            if (bj.kids()[0] != bi.kids()[0]) continue;
            auto ej = integer_exponent(fs[j]);
            if (!ej || *ej >= 0) continue;
            const std::int64_t m = std::min(*ei, -*ej);
            const Fn view = bi.node().fn == Fn::Cos ? Fn::Cot : Fn::Tan;
            Expr folded = with_exponent(call(view, bi.kids()[0]), m);
            std::vector<Expr> next;
            for (std::size_t k = 0; k < fs.size(); ++k) {
                if (k == i) {
                    if (*ei - m != 0) next.push_back(with_exponent(bi, *ei - m));
                    next.push_back(folded);
                } else if (k == j) {
                    if (*ej + m != 0) next.push_back(with_exponent(bj, *ej + m));
                } else {
                    next.push_back(fs[k]);
                }
            }
            return fold_cot_tan(std::move(next));
        }
    }
    return fs;
}

std::string pp_power(const Expr& e) {
    const Expr& base = e.kids()[0];
    const Expr& ex = e.kids()[1];
    if (ex.is_number() && ex.node().number == Rational(1, 2))
        return "sqrt(" + pp(base) + ")";
    const bool base_parens =
        base.kind() == Kind::Sum || base.kind() == Kind::Product ||
        base.kind() == Kind::Power ||
        (base.is_number() && (!base.node().number.is_integer() || base.node().number.negative())) ||
        (base.is_float() && base.node().flt < 0);
    const bool ex_parens =
        ex.kind() == Kind::Sum || ex.kind() == Kind::Product ||
        (ex.is_number() && (!ex.node().number.is_integer() || ex.node().number.negative())) ||
        (ex.is_float() && ex.node().flt < 0);
    return pp_parens_if(base, base_parens) + "^" + pp_parens_if(ex, ex_parens);
}

struct SignedBody {
    bool negative;
    std::string body;
};

SignedBody pp_product_body(const Expr& prod);

// Renders any expression, splitting off a leading sign (used by the sum
// printer so "a - b" comes out instead of "a + -1*b").
SignedBody pp_signed(const Expr& e) {
    if (e.is_number() && e.node().number.negative()) {
        Rational r = e.node().number;
        auto m = Rational::neg(r);
        if (m) return {true, m->str()};
    }
    if (e.is_float() && e.node().flt < 0) return {true, float_str(-e.node().flt)};
    if (e.kind() == Kind::Product) return pp_product_body(e);
    return {false, pp(e)};
}

SignedBody pp_product_body(const Expr& prod) {
    bool negative = false;
    std::int64_t cnum = 1, cden = 1;
    std::optional<std::string> float_coeff;
    std::vector<Expr> num_factors, den_factors, sum_factors;

    std::vector<Expr> fs = fold_cot_tan(prod.kids());
    for (const Expr& f : fs) {
        if (f.is_number()) {
            Rational r = f.node().number;
            if (r.negative()) {
                negative = !negative;
                r = *Rational::neg(r);
            }
            cnum = r.num();
            cden = r.den();
        } else if (f.is_float()) {
            double v = f.node().flt;
            if (v < 0) { negative = !negative; v = -v; }
            float_coeff = float_str(v);
        } else if (f.kind() == Kind::Power && f.kids()[1].is_number() &&
                   f.kids()[1].node().number.negative()) {
            Rational pos = *Rational::neg(f.kids()[1].node().number);
            den_factors.push_back(pos.is_one() ? f.kids()[0] : power(f.kids()[0], number(pos)));
        } else if (f.kind() == Kind::Sum) {
            sum_factors.push_back(f);
        } else {
            num_factors.push_back(f);
        }
    }

    std::vector<std::string> num_tokens, den_tokens;
    if (float_coeff) num_tokens.push_back(*float_coeff);
    if (cnum != 1) num_tokens.push_back(std::to_string(cnum));
    for (const auto& f : num_factors) num_tokens.push_back(pp(f));
    if (cden != 1) den_tokens.push_back(std::to_string(cden));
    for (const auto& f : den_factors)
        den_tokens.push_back(pp_parens_if(f, f.kind() == Kind::Sum));

    auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "*" : "") + v[i];
        return s;
    };

    std::string out;
    if (den_tokens.empty()) {
        out = join(num_tokens);
        for (const auto& sf : sum_factors)
            out += (out.empty() ? "" : "*") + ("(" + pp(sf) + ")");
    } else {
        const std::string den =
            den_tokens.size() == 1 ? den_tokens[0] : "(" + join(den_tokens) + ")";
        std::string frac = (num_tokens.empty() ? "1" : join(num_tokens)) + "/" + den;
        if (!sum_factors.empty() && num_tokens.empty()) frac = "(" + frac + ")";
        out = frac;
        for (const auto& sf : sum_factors) out += "*(" + pp(sf) + ")";
    }
    if (out.empty()) out = "1";
    return {negative, out};
}

std::string pp(const Expr& e) {
    switch (e.kind()) {
        case Kind::Number:
            return e.node().number.str();
        case Kind::Float:
            return e.node().flt < 0 ? "-" + float_str(-e.node().flt) : float_str(e.node().flt);
        case Kind::Imag:
            return "i";
        case Kind::Symbol:
            return e.node().name;
        case Kind::Call:
            return std::string(fn_name(e.node().fn)) + "(" + pp(e.kids()[0]) + ")";
        case Kind::Power: {
            // a bare negative power reads better as a fraction
            if (e.kids()[1].is_number() && e.kids()[1].node().number.negative()) {
                Rational pos = *Rational::neg(e.kids()[1].node().number);
                Expr den = pos.is_one() ? e.kids()[0] : power(e.kids()[0], number(pos));
                return "1/" + pp_parens_if(den, den.kind() == Kind::Sum || den.kind() == Kind::Product);
            }
            return pp_power(e);
        }
        case Kind::Product: {
            SignedBody sb = pp_product_body(e);
            return sb.negative ? "-" + sb.body : sb.body;
        }
        case Kind::Sum: {
            std::string out;
            for (std::size_t i = 0; i < e.kids().size(); ++i) {
                SignedBody sb = pp_signed(e.kids()[i]);
                if (i == 0)
                    out += (sb.negative ? "-" : "") + sb.body;
                else
                    out += (sb.negative ? " - " : " + ") + sb.body;
            }
            return out;
        }
    }
    return "?";
}

}  // namespace

std::string to_string(const Expr& e) { return pp(e); }

}  // namespace qgrav
