#include "qgrav/calculus.hpp"

namespace qgrav {

Expr differentiate(const Expr& e, const std::string& sym) {
    switch (e.kind()) {
        case Kind::Number:
        case Kind::Float:
        case Kind::Imag:
            return integer(0);
        case Kind::Symbol:
            return e.node().name == sym ? integer(1) : integer(0);
        case Kind::Sum: {
            std::vector<Expr> terms;
            terms.reserve(e.kids().size());
            for (const auto& k : e.kids()) terms.push_back(differentiate(k, sym));
            return sum(std::move(terms));
        }
        case Kind::Product: {
            // Leibniz over the n-ary product
            std::vector<Expr> terms;
            const auto& ks = e.kids();
            for (std::size_t i = 0; i < ks.size(); ++i) {
                Expr di = differentiate(ks[i], sym);
                if (di.is_zero()) continue;
                std::vector<Expr> fs;
                fs.reserve(ks.size());
                for (std::size_t j = 0; j < ks.size(); ++j)
                    fs.push_back(j == i ? di : ks[j]);
                terms.push_back(product(std::move(fs)));
            }
            return sum(std::move(terms));
        }
        case Kind::Power: {
            const Expr& b = e.kids()[0];
            const Expr& x = e.kids()[1];
            Expr db = differentiate(b, sym);
            Expr dx = differentiate(x, sym);
            if (dx.is_zero()) {
                // d(b^n) = n*b^(n-1)*db
                Expr shifted = power(b, x - integer(1));
                return product({x, std::move(shifted), db});
            }
            // general: b^x * (dx*ln b + x*db/b)
            Expr inner = dx * call(Fn::Ln, b) + x * db / b;
            return e * inner;
        }
        case Kind::Call: {
            const Expr& u = e.kids()[0];
            Expr du = differentiate(u, sym);
            if (du.is_zero()) return integer(0);
            switch (e.node().fn) {
                case Fn::Sin: return call(Fn::Cos, u) * du;
                case Fn::Cos: return -call(Fn::Sin, u) * du;
                case Fn::Tan: return du / pow_int(call(Fn::Cos, u), 2);
                case Fn::Cot: return -du / pow_int(call(Fn::Sin, u), 2);
                case Fn::Exp: return e * du;
                case Fn::Ln: return du / u;
                case Fn::Sqrt: return du / (integer(2) * e);
                case Fn::Abs:
                    // valid away from zeros of u
                    return call(Fn::Re, call(Fn::Conj, u) * du) / e;
                case Fn::Conj: return call(Fn::Conj, du);
                case Fn::Re: return call(Fn::Re, du);
                case Fn::Im: return call(Fn::Im, du);
            }
        }
    }
    return integer(0);
}

namespace {

Expr substitute_rec(const Expr& e, const std::map<std::string, Expr>& table) {
    switch (e.kind()) {
        case Kind::Number:
        case Kind::Float:
        case Kind::Imag:
            return e;
        case Kind::Symbol: {
            auto it = table.find(e.node().name);
            return it == table.end() ? e : it->second;
        }
        case Kind::Sum: {
            std::vector<Expr> ks;
            ks.reserve(e.kids().size());
            for (const auto& k : e.kids()) ks.push_back(substitute_rec(k, table));
            return sum(std::move(ks));
        }
        case Kind::Product: {
            std::vector<Expr> ks;
            ks.reserve(e.kids().size());
            for (const auto& k : e.kids()) ks.push_back(substitute_rec(k, table));
            return product(std::move(ks));
        }
        case Kind::Power:
            return power(substitute_rec(e.kids()[0], table), substitute_rec(e.kids()[1], table));
        case Kind::Call:
            return call(e.node().fn, substitute_rec(e.kids()[0], table));
    }
    return e;
}

}  // namespace

Expr substitute(const Expr& e, const std::map<std::string, Expr>& table) {
    if (table.empty()) return e;
    return substitute_rec(e, table);
}

Expr substitute(const Expr& e, const std::string& sym, const Expr& value) {
    return substitute_rec(e, {{sym, value}});
}

}  // namespace qgrav
