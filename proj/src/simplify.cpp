#include "qgrav/simplify.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

#include "qgrav/error.hpp"

namespace qgrav {

namespace {

constexpr int kMaxRewriteRounds = 8;
constexpr int kMaxDepth = 64;
constexpr std::size_t kExpandLimit = 256;

struct EqualTo {
    bool operator()(const Expr& a, const Expr& b) const { return a == b; }
};

// product factors of a term, excluding a leading numeric constant
std::vector<Expr> term_factors(const Expr& t) {
    if (t.kind() == Kind::Product) {
        std::vector<Expr> out;
        for (const auto& k : t.kids())
            if (!k.is_constant()) out.push_back(k);
        return out;
    }
    if (t.is_constant()) return {};
    return {t};
}

Expr rebuild_term(const Expr& coeff, std::vector<Expr> factors) {
    factors.push_back(coeff);
    return product(std::move(factors));
}

class Simplifier {
public:
    Expr run(const Expr& e) { return simp(e, 0); }

private:
    std::unordered_map<Expr, Expr, ExprHash, EqualTo> memo_;

    Expr simp(const Expr& e, int depth) {
        if (depth > kMaxDepth) return e;
        auto it = memo_.find(e);
        if (it != memo_.end()) return it->second;

        Expr cur = rebuild_children(e, depth);
        for (int round = 0; round < kMaxRewriteRounds; ++round) {
            Expr next = apply_rules(cur, depth);
            if (next == cur) break;
            cur = rebuild_children(next, depth);
        }
        memo_.emplace(e, cur);
        return cur;
    }

    Expr rebuild_children(const Expr& e, int depth) {
        switch (e.kind()) {
            case Kind::Sum: {
                std::vector<Expr> ks;
                ks.reserve(e.kids().size());
                for (const auto& k : e.kids()) ks.push_back(simp(k, depth + 1));
                return sum(std::move(ks));
            }
            case Kind::Product: {
                std::vector<Expr> ks;
                ks.reserve(e.kids().size());
                for (const auto& k : e.kids()) ks.push_back(simp(k, depth + 1));
                return product(std::move(ks));
            }
            case Kind::Power:
                return power(simp(e.kids()[0], depth + 1), simp(e.kids()[1], depth + 1));
            case Kind::Call:
                return call(e.node().fn, simp(e.kids()[0], depth + 1));
            default:
                return e;
        }
    }

    Expr apply_rules(const Expr& e, int depth) {
        switch (e.kind()) {
            case Kind::Call: return rule_call(e);
            case Kind::Power: return rule_power(e);
            case Kind::Product: return rule_product(e);
            case Kind::Sum: return rule_sum(e, depth);
            default: return e;
        }
    }

    // ---- calls ----------------------------------------------------------

    Expr rule_call(const Expr& e) {
        const Expr& u = e.kids()[0];
        switch (e.node().fn) {
            case Fn::Tan:
                return call(Fn::Sin, u) / call(Fn::Cos, u);
            case Fn::Cot:
                return call(Fn::Cos, u) / call(Fn::Sin, u);
            case Fn::Abs: {
                if (syntactically_real(u)) return e;
                if (auto s = complex_split(u))
                    return call(Fn::Sqrt, pow_int(s->first, 2) + pow_int(s->second, 2));
                return e;
            }
            case Fn::Ln:
                if (u.is_call(Fn::Exp)) return u.kids()[0];
                return e;
            case Fn::Exp:
                if (u.is_call(Fn::Ln)) return u.kids()[0];
                return e;
            case Fn::Conj: {
                if (syntactically_real(u)) return u;
                if (auto s = complex_split(u))
                    return s->first - imag_unit() * s->second;
                return e;
            }
            case Fn::Re: {
                if (syntactically_real(u)) return u;
                if (auto s = complex_split(u)) return s->first;
                return e;
            }
            case Fn::Im: {
                if (syntactically_real(u)) return integer(0);
                if (auto s = complex_split(u)) return s->second;
                return e;
            }
            default:
                return e;
        }
    }

    // ---- powers ----------------------------------------------------------

    Expr rule_power(const Expr& e) {
        const Expr& base = e.kids()[0];
        const Expr& ex = e.kids()[1];
        if (base.is_call(Fn::Exp) &&
            (ex.is_integer() || syntactically_real(base.kids()[0])))
            return call(Fn::Exp, ex * base.kids()[0]);
        return e;
    }

    // ---- products --------------------------------------------------------

    Expr rule_product(const Expr& e) {
        // exp(a)*exp(b) -> exp(a+b)
        std::vector<Expr> exps, rest;
        for (const auto& k : e.kids()) {
            if (k.is_call(Fn::Exp)) exps.push_back(k.kids()[0]);
            else rest.push_back(k);
        }
        if (exps.size() >= 2) {
            rest.push_back(call(Fn::Exp, sum(std::move(exps))));
            return product(std::move(rest));
        }
        return e;
    }

    // ---- sums ------------------------------------------------------------

    Expr rule_sum(const Expr& e, int depth) {
        Expr cur = distribute(e);
        if (cur.kind() != Kind::Sum) return cur;
        cur = pythagoras(cur);
        if (cur.kind() != Kind::Sum) return cur;
        cur = factor_content(cur, depth);
        if (cur.kind() != Kind::Sum) return cur;
        return together(cur, depth);
    }

    // children of the form c*(a+b) with c numeric expand into the sum
    Expr distribute(const Expr& e) {
        bool changed = false;
        std::vector<Expr> terms;
        for (const auto& t : e.kids()) {
            if (t.kind() == Kind::Product && t.kids().size() == 2 &&
                t.kids()[0].is_constant() && t.kids()[1].kind() == Kind::Sum) {
                for (const auto& s : t.kids()[1].kids())
                    terms.push_back(t.kids()[0] * s);
                changed = true;
            } else {
                terms.push_back(t);
            }
        }
        return changed ? sum(std::move(terms)) : e;
    }

    static bool is_fn_square(const Expr& f, Fn fn, Expr* arg) {
        if (f.kind() != Kind::Power) return false;
        if (!(f.kids()[1].is_integer() && f.kids()[1].node().number.num() == 2)) return false;
        if (!f.kids()[0].is_call(fn)) return false;
        *arg = f.kids()[0].kids()[0];
        return true;
    }

    // lambda*sin(u)^2*M + lambda*cos(u)^2*M -> lambda*M
    Expr pythagoras(const Expr& e) {
        std::vector<Expr> terms(e.kids());
        bool changed = false;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            TermView ti = term_view(terms[i]);
            std::vector<Expr> fi = term_factors(terms[i]);
            bool rewritten = false;
            for (std::size_t a = 0; a < fi.size() && !rewritten; ++a) {
                Expr arg;
                if (!is_fn_square(fi[a], Fn::Sin, &arg)) continue;
                std::vector<Expr> partner = fi;
                partner[a] = pow_int(call(Fn::Cos, arg), 2);
                std::sort(partner.begin(), partner.end(), ExprLess{});
                for (std::size_t j = 0; j < terms.size(); ++j) {
                    if (j == i) continue;
                    TermView tj = term_view(terms[j]);
                    if (!(tj.coeff == ti.coeff)) continue;
                    std::vector<Expr> fj = term_factors(terms[j]);
                    std::sort(fj.begin(), fj.end(), ExprLess{});
                    if (fj != partner) continue;
                    std::vector<Expr> rest;
                    for (std::size_t b = 0; b < fi.size(); ++b)
                        if (b != a) rest.push_back(fi[b]);
                    Expr merged = rebuild_term(ti.coeff, std::move(rest));
                    std::vector<Expr> next;
                    for (std::size_t k = 0; k < terms.size(); ++k)
                        if (k != i && k != j) next.push_back(terms[k]);
                    next.push_back(merged);
                    terms = std::move(next);
                    changed = true;
                    rewritten = true;
                    break;
                }
            }
            if (rewritten) i = static_cast<std::size_t>(-1);  // restart scan
        }
        return changed ? sum(std::move(terms)) : e;
    }

    // pulls an integer numeric content and factors common to all terms out of
    // the sum; a sum of all-negative terms also yields its sign
    Expr factor_content(const Expr& e, int depth) {
        const auto& terms = e.kids();
        bool all_rational = true;
        bool all_negative = true;
        std::vector<Rational> coeffs;
        for (const auto& t : terms) {
            TermView tv = term_view(t);
            if (!tv.coeff.is_number()) { all_rational = false; break; }
            coeffs.push_back(tv.coeff.node().number);
            if (!tv.coeff.node().number.negative()) all_negative = false;
        }
        if (!all_rational) return e;

        std::int64_t g = 0;
        for (const auto& c : coeffs) {
            if (!c.is_integer()) { g = 1; break; }
            g = std::gcd(g, c.num() < 0 ? -c.num() : c.num());
        }

        // common symbolic factors with rational exponents
        std::map<Expr, Rational, ExprLess> common;
        bool first = true;
        for (const auto& t : terms) {
            std::map<Expr, Rational, ExprLess> facts;
            for (const auto& f : term_factors(t)) {
                Expr ex = factor_exponent(f);
                if (ex.is_number()) facts.emplace(factor_base(f), ex.node().number);
            }
            if (first) { common = std::move(facts); first = false; continue; }
            std::map<Expr, Rational, ExprLess> kept;
            for (const auto& [base, exp] : common) {
                auto it = facts.find(base);
                if (it == facts.end()) continue;
                const Rational& other = it->second;
                if (exp.negative() != other.negative()) continue;
                if (exp.negative())
                    kept.emplace(base, exp < other ? other : exp);  // closer to zero
                else
                    kept.emplace(base, exp < other ? exp : other);
            }
            common = std::move(kept);
            if (common.empty()) break;
        }

        const bool pull_sign = all_negative;
        const bool pull_gcd = g >= 2;
        if (!pull_sign && !pull_gcd && common.empty()) return e;

        std::vector<Expr> extracted;
        Rational scale(1);
        if (pull_gcd) scale = Rational(g);
        if (pull_sign) scale = *Rational::neg(scale);
        if (!scale.is_one()) extracted.push_back(number(scale));
        for (const auto& [base, exp] : common)
            extracted.push_back(power(base, number(exp)));
        if (extracted.empty()) return e;

        Expr inv = integer(1);
        {
            std::vector<Expr> invf;
            if (!scale.is_one()) invf.push_back(number(Rational(scale.den(), scale.num())));
            for (const auto& [base, exp] : common) {
                auto nexp = Rational::neg(exp);
                if (!nexp) return e;
                invf.push_back(power(base, number(*nexp)));
            }
            inv = product(std::move(invf));
        }

        std::vector<Expr> residual;
        residual.reserve(terms.size());
        for (const auto& t : terms) residual.push_back(t * inv);
        Expr inner = simp(sum(std::move(residual)), depth + 1);
        extracted.push_back(inner);
        return product(std::move(extracted));
    }

    // expansion of a factor list into a list of terms (bounded)
    static bool expand_factors(const std::vector<Expr>& factors, std::vector<Expr>* out) {
        std::vector<Expr> acc{integer(1)};
        for (const auto& f : factors) {
            std::vector<Expr> parts;
            if (f.kind() == Kind::Sum) {
                parts.assign(f.kids().begin(), f.kids().end());
            } else if (f.kind() == Kind::Power && f.kids()[0].kind() == Kind::Sum &&
                       f.kids()[1].is_integer() && f.kids()[1].node().number.num() >= 2 &&
                       f.kids()[1].node().number.num() <= 4) {
                const auto n = f.kids()[1].node().number.num();
                std::vector<Expr> p{integer(1)};
                for (std::int64_t r = 0; r < n; ++r) {
                    std::vector<Expr> nx;
                    for (const auto& a : p)
                        for (const auto& b : f.kids()[0].kids()) {
                            nx.push_back(a * b);
                            if (nx.size() > kExpandLimit) return false;
                        }
                    p = std::move(nx);
                }
                parts = std::move(p);
            } else {
                parts.push_back(f);
            }
            std::vector<Expr> nx;
            nx.reserve(acc.size() * parts.size());
            for (const auto& a : acc)
                for (const auto& b : parts) {
                    nx.push_back(a * b);
                    if (nx.size() > kExpandLimit) return false;
                }
            acc = std::move(nx);
        }
        *out = std::move(acc);
        return true;
    }

    // combine over a common denominator; keep only if the tree shrinks
    Expr together(const Expr& e, int depth) {
        struct TermSplit {
            Rational coeff{1};
            std::vector<Expr> num;
            std::map<Expr, Rational, ExprLess> den;
        };
        std::vector<TermSplit> splits;
        std::map<Expr, Rational, ExprLess> lcd;
        std::int64_t den_lcm = 1;
        bool any_den = false;
        for (const auto& t : e.kids()) {
            TermView tv = term_view(t);
            if (!tv.coeff.is_number()) return e;  // float terms: leave alone
            TermSplit s;
            s.coeff = tv.coeff.node().number;
            den_lcm = std::lcm(den_lcm, s.coeff.den());
            if (s.coeff.den() != 1) any_den = true;
            for (const auto& f : term_factors(t)) {
                Expr ex = factor_exponent(f);
                if (ex.is_number() && ex.node().number.negative()) {
                    auto pos = Rational::neg(ex.node().number);
                    if (!pos) return e;
                    s.den.emplace(factor_base(f), *pos);
                    auto it = lcd.find(factor_base(f));
                    if (it == lcd.end() || it->second < *pos)
                        lcd[factor_base(f)] = *pos;
                    any_den = true;
                } else {
                    s.num.push_back(f);
                }
            }
            splits.push_back(std::move(s));
        }
        if (!any_den || (lcd.empty() && den_lcm == 1)) return e;

        std::vector<Expr> numerator_terms;
        for (const auto& s : splits) {
            std::vector<Expr> fs;
            auto scaled = Rational::mul(s.coeff, Rational(den_lcm));
            if (!scaled) return e;
            fs.push_back(number(*scaled));
            fs.insert(fs.end(), s.num.begin(), s.num.end());
            for (const auto& [base, need] : lcd) {
                Rational have(0);
                auto it = s.den.find(base);
                if (it != s.den.end()) have = it->second;
                auto diff = Rational::add(need, *Rational::neg(have));
                if (!diff) return e;
                if (!diff->is_zero()) fs.push_back(power(base, number(*diff)));
            }
            std::vector<Expr> expanded;
            if (!expand_factors(fs, &expanded)) return e;
            numerator_terms.insert(numerator_terms.end(), expanded.begin(), expanded.end());
        }
        Expr numerator = simp(sum(std::move(numerator_terms)), depth + 1);

        std::vector<Expr> cand{numerator};
        if (den_lcm != 1) cand.push_back(rational(1, den_lcm));
        for (const auto& [base, exp] : lcd) {
            auto nexp = Rational::neg(exp);
            if (!nexp) return e;
            cand.push_back(power(base, number(*nexp)));
        }
        Expr candidate = product(std::move(cand));
        if (candidate.size() < e.size()) return candidate;
        return e;
    }
};

// ---- complex split --------------------------------------------------------

using Pair = std::pair<Expr, Expr>;

std::optional<Pair> split_rec(const Expr& e);

std::optional<Pair> split_mul(const Pair& x, const Pair& y) {
    return Pair{x.first * y.first - x.second * y.second,
                x.first * y.second + x.second * y.first};
}

std::optional<Pair> split_invert(const Pair& x) {
    Expr norm = pow_int(x.first, 2) + pow_int(x.second, 2);
    return Pair{x.first / norm, -x.second / norm};
}

std::optional<Pair> split_int_power(Pair base, std::int64_t n) {
    if (n < 0) {
        auto inv = split_invert(base);
        if (!inv) return std::nullopt;
        base = *inv;
        n = -n;
    }
    Pair acc{integer(1), integer(0)};
    while (n > 0) {
        if (n & 1) {
            auto m = split_mul(acc, base);
            if (!m) return std::nullopt;
            acc = *m;
        }
        n >>= 1;
        if (n) {
            auto m = split_mul(base, base);
            if (!m) return std::nullopt;
            base = *m;
        }
    }
    return acc;
}

std::optional<Pair> split_rec(const Expr& e) {
    if (syntactically_real(e)) return Pair{e, integer(0)};
    switch (e.kind()) {
        case Kind::Imag:
            return Pair{integer(0), integer(1)};
        case Kind::Sum: {
            Expr re = integer(0), im = integer(0);
            for (const auto& k : e.kids()) {
                auto s = split_rec(k);
                if (!s) return std::nullopt;
                re = re + s->first;
                im = im + s->second;
            }
            return Pair{re, im};
        }
        case Kind::Product: {
            Pair acc{integer(1), integer(0)};
            for (const auto& k : e.kids()) {
                auto s = split_rec(k);
                if (!s) return std::nullopt;
                auto m = split_mul(acc, *s);
                if (!m) return std::nullopt;
                acc = *m;
            }
            return acc;
        }
        case Kind::Power: {
            const Expr& base = e.kids()[0];
            const Expr& ex = e.kids()[1];
            // exp(u)^k handled as exp(k*u) to keep the double angle folded
            if (base.is_call(Fn::Exp)) return split_rec(call(Fn::Exp, ex * base.kids()[0]));
            if (!ex.is_integer()) return std::nullopt;
            auto b = split_rec(base);
            if (!b) return std::nullopt;
            return split_int_power(*b, ex.node().number.num());
        }
        case Kind::Call: {
            const Expr& u = e.kids()[0];
            switch (e.node().fn) {
                case Fn::Exp: {
                    auto s = split_rec(u);
                    if (!s) return std::nullopt;
                    if (s->second.is_zero()) return Pair{e, integer(0)};
                    Expr mag = call(Fn::Exp, s->first);
                    return Pair{mag * call(Fn::Cos, s->second), mag * call(Fn::Sin, s->second)};
                }
                case Fn::Conj: {
                    auto s = split_rec(u);
                    if (!s) return std::nullopt;
                    return Pair{s->first, -s->second};
                }
                case Fn::Re: {
                    auto s = split_rec(u);
                    if (!s) return std::nullopt;
                    return Pair{s->first, integer(0)};
                }
                case Fn::Im: {
                    auto s = split_rec(u);
                    if (!s) return std::nullopt;
                    return Pair{s->second, integer(0)};
                }
                case Fn::Abs: {
                    auto s = split_rec(u);
                    if (!s) return std::nullopt;
                    return Pair{call(Fn::Sqrt, pow_int(s->first, 2) + pow_int(s->second, 2)),
                                integer(0)};
                }
                default:
                    // trig/ln/sqrt of a complex argument has no supported split
                    return std::nullopt;
            }
        }
        default:
            return std::nullopt;
    }
}

}  // namespace

Expr simplify(const Expr& e) { return Simplifier{}.run(e); }

std::optional<std::pair<Expr, Expr>> complex_split(const Expr& e) { return split_rec(e); }

Expr re_part(const Expr& e) {
    Expr s = simplify(e);
    auto p = complex_split(s);
    if (!p) throw Error("expression has no separable real part");
    return simplify(p->first);
}

Expr im_part(const Expr& e) {
    Expr s = simplify(e);
    auto p = complex_split(s);
    if (!p) throw Error("expression has no separable imaginary part");
    return simplify(p->second);
}

}  // namespace qgrav
