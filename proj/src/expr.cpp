#include "qgrav/expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <optional>

#include "qgrav/error.hpp"

namespace qgrav {

namespace {

constexpr std::size_t kHashSeed = 0x9e3779b97f4a7c15ull;

std::size_t hash_combine(std::size_t h, std::size_t v) {
    return h ^ (v + kHashSeed + (h << 6) + (h >> 2));
}

std::shared_ptr<const ExprNode> finish(ExprNode n) {
    std::size_t h = hash_combine(0, static_cast<std::size_t>(n.kind));
    int size = 1;
    switch (n.kind) {
        case Kind::Number:
            h = hash_combine(h, static_cast<std::size_t>(n.number.num()));
            h = hash_combine(h, static_cast<std::size_t>(n.number.den()));
            break;
        case Kind::Float: {
            double d = n.flt == 0.0 ? 0.0 : n.flt;  // normalize -0.0
            n.flt = d;
            std::size_t bits;
            static_assert(sizeof(bits) == sizeof(d));
            std::memcpy(&bits, &d, sizeof(d));
            h = hash_combine(h, bits);
            break;
        }
        case Kind::Symbol:
            h = hash_combine(h, std::hash<std::string>{}(n.name));
            break;
        case Kind::Call:
            h = hash_combine(h, static_cast<std::size_t>(n.fn));
            break;
        default:
            break;
    }
    for (const auto& k : n.kids) {
        h = hash_combine(h, k.hash());
        size += k.size();
    }
    n.hash = h;
    n.size = size;
    return std::make_shared<const ExprNode>(std::move(n));
}

Expr make_number(const Rational& r) {
    ExprNode n;
    n.kind = Kind::Number;
    n.number = r;
    return Expr(finish(std::move(n)));
}

Expr make_float(double v) {
    ExprNode n;
    n.kind = Kind::Float;
    n.flt = v;
    return Expr(finish(std::move(n)));
}

// Numeric accumulator: exact rational until a float joins in or an exact
// operation overflows int64.
struct NumValue {
    bool isf = false;
    Rational r{1};
    double f = 1.0;

    static NumValue zero() { NumValue v; v.r = Rational(0); v.f = 0.0; return v; }
    static NumValue of(const Expr& e) {
        NumValue v;
        if (e.is_float()) { v.isf = true; v.f = e.node().flt; }
        else { v.r = e.node().number; v.f = v.r.to_double(); }
        return v;
    }
    double value() const { return isf ? f : r.to_double(); }
    bool is_zero() const { return isf ? f == 0.0 : r.is_zero(); }
    bool is_one() const { return isf ? f == 1.0 : r.is_one(); }
    void demote() { if (!isf) { f = r.to_double(); isf = true; } }
    void mul(const NumValue& o) {
        if (isf || o.isf) { demote(); f *= o.value(); return; }
        auto m = Rational::mul(r, o.r);
        if (m) { r = *m; f = r.to_double(); }
        else { demote(); f *= o.value(); }
    }
    void add(const NumValue& o) {
        if (isf || o.isf) { demote(); f += o.value(); return; }
        auto s = Rational::add(r, o.r);
        if (s) { r = *s; f = r.to_double(); }
        else { demote(); f += o.value(); }
    }
    void negate() {
        if (isf) { f = -f; return; }
        auto m = Rational::neg(r);
        if (m) { r = *m; f = r.to_double(); }
        else { demote(); f = -f; }
    }
    Expr to_expr() const { return isf ? make_float(f) : make_number(r); }
};

Expr strip_leading_constant(const Expr& prod) {
    const auto& kids = prod.kids();
    if (kids.size() == 2) return kids[1];
    ExprNode n;
    n.kind = Kind::Product;
    n.kids.assign(kids.begin() + 1, kids.end());
    return Expr(finish(std::move(n)));
}

// coeff * monomial with both already canonical; bypasses the full product
// factory (the constant slot is simply prepended).
Expr attach_coefficient(const NumValue& c, const Expr& monomial) {
    if (monomial.is_one()) return c.to_expr();
    if (c.is_one()) return monomial;
    ExprNode n;
    n.kind = Kind::Product;
    n.kids.push_back(c.to_expr());
    if (monomial.kind() == Kind::Product)
        n.kids.insert(n.kids.end(), monomial.kids().begin(), monomial.kids().end());
    else
        n.kids.push_back(monomial);
    return Expr(finish(std::move(n)));
}

int kind_rank(Kind k) {
    switch (k) {
        case Kind::Number:
        case Kind::Float: return 0;
        case Kind::Imag: return 1;
        case Kind::Symbol: return 2;
        case Kind::Call: return 3;
        case Kind::Power: return 4;
        case Kind::Product: return 5;
        case Kind::Sum: return 6;
    }
    return 7;
}

// Argument is q*pi for rational q? Returns q.
std::optional<Rational> pi_multiple(const Expr& e) {
    if (e.is_symbol("pi")) return Rational(1);
    if (e.kind() == Kind::Product && e.kids().size() == 2 &&
        e.kids()[0].is_number() && e.kids()[1].is_symbol("pi"))
        return e.kids()[0].node().number;
    return std::nullopt;
}

// Splits off a leading negative sign: returns |e| when e is a constant or a
// product with a negative numeric coefficient.
std::optional<Expr> strip_negative(const Expr& e) {
    if (e.is_number() && e.node().number.negative()) {
        auto m = Rational::neg(e.node().number);
        if (m) return make_number(*m);
        return std::nullopt;
    }
    if (e.is_float() && e.node().flt < 0) return make_float(-e.node().flt);
    if (e.kind() == Kind::Product) {
        const Expr& head = e.kids()[0];
        if ((head.is_number() && head.node().number.negative()) ||
            (head.is_float() && head.node().flt < 0)) {
            NumValue c = NumValue::of(head);
            c.negate();
            return attach_coefficient(c, strip_leading_constant(e));
        }
    }
    return std::nullopt;
}

}  // namespace

const char* fn_name(Fn f) {
    switch (f) {
        case Fn::Sin: return "sin";
        case Fn::Cos: return "cos";
        case Fn::Tan: return "tan";
        case Fn::Cot: return "cot";
        case Fn::Exp: return "exp";
        case Fn::Ln: return "ln";
        case Fn::Sqrt: return "sqrt";
        case Fn::Abs: return "abs";
        case Fn::Conj: return "conj";
        case Fn::Re: return "re";
        case Fn::Im: return "im";
    }
    return "?";
}

Expr::Expr() {
    static const std::shared_ptr<const ExprNode> zero = [] {
        ExprNode n;
        n.kind = Kind::Number;
        n.number = Rational(0);
        return finish(std::move(n));
    }();
    node_ = zero;
}

bool Expr::operator==(const Expr& o) const {
    if (node_ == o.node_) return true;
    if (hash() != o.hash()) return false;
    return compare(*this, o) == 0;
}

int compare(const Expr& a, const Expr& b) {
    if (&a.node() == &b.node()) return 0;
    const int ra = kind_rank(a.kind());
    const int rb = kind_rank(b.kind());
    if (ra != rb) return ra < rb ? -1 : 1;
    switch (a.kind()) {
        case Kind::Number:
        case Kind::Float: {
            const double va = a.is_float() ? a.node().flt : a.node().number.to_double();
            const double vb = b.is_float() ? b.node().flt : b.node().number.to_double();
            if (va < vb) return -1;
            if (va > vb) return 1;
            if (a.kind() != b.kind()) return a.is_number() ? -1 : 1;
            if (a.is_number()) {
                const Rational& x = a.node().number;
                const Rational& y = b.node().number;
                if (x == y) return 0;
                return x < y ? -1 : 1;
            }
            return 0;
        }
        case Kind::Imag:
            return 0;
        case Kind::Symbol:
            return a.node().name.compare(b.node().name) < 0   ? -1
                   : a.node().name == b.node().name ? 0 : 1;
        case Kind::Call: {
            const int c = std::string(fn_name(a.node().fn)).compare(fn_name(b.node().fn));
            if (c != 0) return c < 0 ? -1 : 1;
            return compare(a.kids()[0], b.kids()[0]);
        }
        case Kind::Power: {
            const int c = compare(a.kids()[0], b.kids()[0]);
            if (c != 0) return c;
            return compare(a.kids()[1], b.kids()[1]);
        }
        case Kind::Sum:
        case Kind::Product: {
            const std::size_t n = std::min(a.kids().size(), b.kids().size());
            for (std::size_t i = 0; i < n; ++i) {
                const int c = compare(a.kids()[i], b.kids()[i]);
                if (c != 0) return c;
            }
            if (a.kids().size() != b.kids().size())
                return a.kids().size() < b.kids().size() ? -1 : 1;
            return 0;
        }
    }
    return 0;
}

Expr integer(std::int64_t v) { return make_number(Rational(v)); }

Expr rational(std::int64_t num, std::int64_t den) {
    Rational r(num, den);
    if (!r.valid()) throw PoleError("division by zero in rational constant", "1/0");
    return make_number(r);
}

Expr number(const Rational& r) { return make_number(r); }

Expr floating(double v) { return make_float(v); }

Expr imag_unit() {
    ExprNode n;
    n.kind = Kind::Imag;
    return Expr(finish(std::move(n)));
}

Expr symbol(std::string name) {
    ExprNode n;
    n.kind = Kind::Symbol;
    n.name = std::move(name);
    return Expr(finish(std::move(n)));
}

Expr factor_exponent(const Expr& f) {
    return f.kind() == Kind::Power ? f.kids()[1] : integer(1);
}

TermView term_view(const Expr& t) {
    if (t.is_constant()) return {t, integer(1)};
    if (t.kind() == Kind::Product && t.kids()[0].is_constant())
        return {t.kids()[0], strip_leading_constant(t)};
    return {integer(1), t};
}

Expr sum(std::vector<Expr> terms) {
    // flatten, then collect like terms keyed by monomial
    std::vector<Expr> flat;
    flat.reserve(terms.size());
    for (auto& t : terms) {
        if (t.kind() == Kind::Sum)
            flat.insert(flat.end(), t.kids().begin(), t.kids().end());
        else
            flat.push_back(std::move(t));
    }
    std::map<Expr, NumValue, ExprLess> acc;
    for (const auto& t : flat) {
        TermView tv = term_view(t);
        auto it = acc.find(tv.monomial);
        if (it == acc.end())
            acc.emplace(tv.monomial, NumValue::of(tv.coeff));
        else
            it->second.add(NumValue::of(tv.coeff));
    }
    std::vector<Expr> out;
    out.reserve(acc.size());
    for (const auto& [mono, c] : acc) {
        if (c.is_zero()) continue;
        out.push_back(attach_coefficient(c, mono));
    }
    if (out.empty()) return integer(0);
    if (out.size() == 1) return out[0];
    ExprNode n;
    n.kind = Kind::Sum;
    n.kids = std::move(out);
    return Expr(finish(std::move(n)));
}

Expr product(std::vector<Expr> factors) {
    NumValue coeff;  // 1
    long long icount = 0;
    std::map<Expr, std::vector<Expr>, ExprLess> groups;  // base -> exponents

    std::vector<Expr> work(std::move(factors));
    while (!work.empty()) {
        Expr f = std::move(work.back());
        work.pop_back();
        switch (f.kind()) {
            case Kind::Number:
            case Kind::Float:
                coeff.mul(NumValue::of(f));
                break;
            case Kind::Imag:
                ++icount;
                break;
            case Kind::Product:
                for (const auto& k : f.kids()) work.push_back(k);
                break;
            case Kind::Power:
                if (f.kids()[0].kind() == Kind::Imag && f.kids()[1].is_integer()) {
                    icount += f.kids()[1].node().number.num();
                    break;
                }
                [[fallthrough]];
            default:
                groups[factor_base(f)].push_back(factor_exponent(f));
                break;
        }
    }

    std::vector<Expr> out;
    for (auto& [base, exps] : groups) {
        Expr e = exps.size() == 1 ? exps[0] : sum(std::move(exps));
        Expr p = power(base, e);
        switch (p.kind()) {
            case Kind::Number:
            case Kind::Float:
                coeff.mul(NumValue::of(p));
                break;
            case Kind::Imag:
                ++icount;
                break;
            case Kind::Product: {
                // folding re-exposed a product (e.g. distributed power); its
                // factors are already canonical and distinct from ours only
                // through the shared base, so fold constants and keep rest
                for (const auto& k : p.kids()) {
                    if (k.is_constant()) coeff.mul(NumValue::of(k));
                    else out.push_back(k);
                }
                break;
            }
            default:
                out.push_back(std::move(p));
                break;
        }
    }

    icount %= 4;
    if (icount < 0) icount += 4;
    if (icount == 2 || icount == 3) coeff.negate();
    if (icount == 1 || icount == 3) out.push_back(imag_unit());

    if (coeff.is_zero()) return integer(0);

    std::sort(out.begin(), out.end(), [](const Expr& a, const Expr& b) {
        const int c = compare(factor_base(a), factor_base(b));
        if (c != 0) return c < 0;
        return compare(a, b) < 0;
    });

    if (out.empty()) return coeff.to_expr();
    if (out.size() == 1 && coeff.is_one()) return out[0];
    ExprNode n;
    n.kind = Kind::Product;
    if (!coeff.is_one()) n.kids.push_back(coeff.to_expr());
    n.kids.insert(n.kids.end(), out.begin(), out.end());
    if (n.kids.size() == 1) return n.kids[0];
    return Expr(finish(std::move(n)));
}

Expr power(Expr base, Expr exponent) {
    if (exponent.is_zero()) return integer(1);
    if (exponent.is_one()) return base;
    if (base.is_one()) return integer(1);

    if (base.is_zero()) {
        if (exponent.is_constant()) {
            const double v = exponent.is_float() ? exponent.node().flt
                                                 : exponent.node().number.to_double();
            if (v > 0) return integer(0);
            throw PoleError("division by zero: zero base raised to a negative power",
                            "0^" + (exponent.is_float() ? std::to_string(v)
                                                        : exponent.node().number.str()));
        }
        // 0^symbolic stays put
    }

    // exact rational^integer
    if (base.is_number() && exponent.is_integer()) {
        auto p = Rational::pow(base.node().number, exponent.node().number.num());
        if (p) return make_number(*p);
        if (base.node().number.is_zero())
            throw PoleError("division by zero: zero base raised to a negative power", "0^n, n<0");
        // overflow: keep symbolic
    }

    // exact square roots of perfect squares
    if (base.is_number() && exponent.is_number() &&
        exponent.node().number == Rational(1, 2) && !base.node().number.negative()) {
        const Rational& q = base.node().number;
        const std::int64_t rn = static_cast<std::int64_t>(std::llround(std::sqrt(double(q.num()))));
        const std::int64_t rd = static_cast<std::int64_t>(std::llround(std::sqrt(double(q.den()))));
        if (rn * rn == q.num() && rd * rd == q.den()) return make_number(Rational(rn, rd));
    }

    // float contagion for constant bases/exponents
    if (base.is_constant() && exponent.is_constant() &&
        (base.is_float() || exponent.is_float())) {
        const double b = base.is_float() ? base.node().flt : base.node().number.to_double();
        const double e = exponent.is_float() ? exponent.node().flt : exponent.node().number.to_double();
        if (b == 0.0 && e <= 0.0)
            throw PoleError("division by zero: zero base raised to a non-positive power", "0.0^e");
        const double v = std::pow(b, e);
        if (std::isfinite(v)) return make_float(v);
    }

    if (base.kind() == Kind::Imag && exponent.is_integer()) {
        std::int64_t n = exponent.node().number.num() % 4;
        if (n < 0) n += 4;
        switch (n) {
            case 0: return integer(1);
            case 1: return imag_unit();
            case 2: return integer(-1);
            default: return product({integer(-1), imag_unit()});
        }
    }

    if (exponent.is_integer()) {
        if (base.kind() == Kind::Power)
            return power(base.kids()[0], product({base.kids()[1], exponent}));
        if (base.kind() == Kind::Product) {
            std::vector<Expr> fs;
            fs.reserve(base.kids().size());
            for (const auto& k : base.kids()) fs.push_back(power(k, exponent));
            return product(std::move(fs));
        }
    }

    ExprNode n;
    n.kind = Kind::Power;
    n.kids = {std::move(base), std::move(exponent)};
    return Expr(finish(std::move(n)));
}

Expr call(Fn f, Expr arg) {
    // sqrt is stored as power 1/2 so all power rules apply; printing restores it
    if (f == Fn::Sqrt) return power(std::move(arg), make_number(Rational(1, 2)));

    // exact parity normalization: sin/tan/cot odd, cos/abs even
    if (f == Fn::Sin || f == Fn::Cos || f == Fn::Tan || f == Fn::Cot || f == Fn::Abs) {
        if (auto pos = strip_negative(arg)) {
            if (f == Fn::Cos || f == Fn::Abs) return call(f, *pos);
            Expr flipped = call(f, *pos);
            return product({integer(-1), std::move(flipped)});
        }
    }

    if (arg.is_float()) {
        const double x = arg.node().flt;
        double v = 0;
        bool ok = true;
        switch (f) {
            case Fn::Sin: v = std::sin(x); break;
            case Fn::Cos: v = std::cos(x); break;
            case Fn::Tan: v = std::tan(x); ok = std::isfinite(v); break;
            case Fn::Cot: v = std::cos(x) / std::sin(x); ok = std::isfinite(v); break;
            case Fn::Exp: v = std::exp(x); ok = std::isfinite(v); break;
            case Fn::Ln: ok = x > 0; if (ok) v = std::log(x); break;
            case Fn::Sqrt: ok = x >= 0; if (ok) v = std::sqrt(x); break;
            case Fn::Abs: v = std::abs(x); break;
            case Fn::Conj: v = x; break;
            case Fn::Re: v = x; break;
            case Fn::Im: v = 0.0; break;
        }
        if (ok) return make_float(v);
    }

    if (arg.is_number()) {
        const Rational& q = arg.node().number;
        switch (f) {
            case Fn::Sin: if (q.is_zero()) return integer(0); break;
            case Fn::Cos: if (q.is_zero()) return integer(1); break;
            case Fn::Tan: if (q.is_zero()) return integer(0); break;
            case Fn::Cot: break;
            case Fn::Exp: if (q.is_zero()) return integer(1); break;
            case Fn::Ln: if (q.is_one()) return integer(0); break;
            case Fn::Sqrt:
                break;  // unreachable, canonicalized to power 1/2 above
            case Fn::Abs: {
                auto m = q.negative() ? Rational::neg(q) : std::optional<Rational>(q);
                if (m) return make_number(*m);
                break;
            }
            case Fn::Conj:
            case Fn::Re: return arg;
            case Fn::Im: return integer(0);
        }
    }

    if (arg.kind() == Kind::Imag) {
        switch (f) {
            case Fn::Conj: return product({integer(-1), imag_unit()});
            case Fn::Re: return integer(0);
            case Fn::Im: return integer(1);
            case Fn::Abs: return integer(1);
            default: break;
        }
    }

    // exact trig at integer multiples of pi/2
    if (f == Fn::Sin || f == Fn::Cos || f == Fn::Tan || f == Fn::Cot) {
        if (auto q = pi_multiple(arg)) {
            auto twice = Rational::mul(*q, Rational(2));
            if (twice && twice->is_integer()) {
                std::int64_t m = twice->num() % 4;
                if (m < 0) m += 4;
                // m counts quarter turns: sin = {0,1,0,-1}, cos = {1,0,-1,0}
                const int sin_tab[4] = {0, 1, 0, -1};
                const int cos_tab[4] = {1, 0, -1, 0};
                switch (f) {
                    case Fn::Sin: return integer(sin_tab[m]);
                    case Fn::Cos: return integer(cos_tab[m]);
                    case Fn::Tan:
                        if (cos_tab[m] != 0) return integer(sin_tab[m] / cos_tab[m]);
                        break;  // pole, keep symbolic
                    case Fn::Cot:
                        if (sin_tab[m] != 0) return integer(cos_tab[m] / sin_tab[m]);
                        break;
                    default: break;
                }
            }
        }
    }

    ExprNode n;
    n.kind = Kind::Call;
    n.fn = f;
    n.kids = {std::move(arg)};
    return Expr(finish(std::move(n)));
}

// Note: throwing subexpressions are hoisted out of braced lists here; GCC 11
// fails to destroy initializer_list elements when a later element throws
// (PR66139), which would leak canonical nodes on pole paths.
Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}); }
Expr operator-(const Expr& a, const Expr& b) {
    Expr neg = product({integer(-1), b});
    return sum({a, std::move(neg)});
}
Expr operator*(const Expr& a, const Expr& b) { return product({a, b}); }
Expr operator/(const Expr& a, const Expr& b) {
    Expr inv = power(b, integer(-1));
    return product({a, std::move(inv)});
}
Expr operator-(const Expr& a) { return product({integer(-1), a}); }

namespace {
void collect_symbols(const Expr& e, std::set<std::string>& out) {
    if (e.kind() == Kind::Symbol) {
        if (e.node().name != "pi") out.insert(e.node().name);
        return;
    }
    for (const auto& k : e.kids()) collect_symbols(k, out);
}
}  // namespace

std::set<std::string> free_symbols(const Expr& e) {
    std::set<std::string> out;
    collect_symbols(e, out);
    return out;
}

bool contains_symbol(const Expr& e, const std::string& name) {
    if (e.kind() == Kind::Symbol) return e.node().name == name;
    for (const auto& k : e.kids())
        if (contains_symbol(k, name)) return true;
    return false;
}

bool syntactically_real(const Expr& e) {
    switch (e.kind()) {
        case Kind::Imag: return false;
        case Kind::Number:
        case Kind::Float:
        case Kind::Symbol: return true;
        case Kind::Call:
            if (e.node().fn == Fn::Abs || e.node().fn == Fn::Re || e.node().fn == Fn::Im)
                return true;
            return syntactically_real(e.kids()[0]);
        default:
            for (const auto& k : e.kids())
                if (!syntactically_real(k)) return false;
            return true;
    }
}

}  // namespace qgrav
