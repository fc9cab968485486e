#include "qgrav/eval.hpp"

#include <cmath>
#include <numbers>

#include "qgrav/error.hpp"
#include "qgrav/printer.hpp"

namespace qgrav {

Binding::Binding(std::initializer_list<std::pair<std::string, Complex>> init) {
    for (const auto& [k, v] : init) bind(k, v);
}

void Binding::bind(const std::string& name, Complex value) {
    if (name == "pi") throw BindingError("'pi' is a reserved constant");
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag()))
        throw BindingError("non-finite value for symbol '" + name + "'");
    auto [it, inserted] = values_.emplace(name, value);
    if (!inserted) throw BindingError("symbol '" + name + "' bound twice");
}

bool Binding::has(const std::string& name) const { return values_.count(name) != 0; }

Complex Binding::get(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) throw UnboundSymbolError({name});
    return it->second;
}

Binding Binding::with(const std::string& name, Complex value) const {
    Binding b = *this;
    b.values_[name] = value;
    return b;
}

namespace {

[[noreturn]] void pole(const Expr& at, const std::string& what) {
    throw PoleError("pole during evaluation: " + what, to_string(at));
}

Complex eval_rec(const Expr& e, const Binding& b) {
    switch (e.kind()) {
        case Kind::Number:
            return Complex(e.node().number.to_double(), 0.0);
        case Kind::Float:
            return Complex(e.node().flt, 0.0);
        case Kind::Imag:
            return Complex(0.0, 1.0);
        case Kind::Symbol:
            if (e.node().name == "pi") return Complex(std::numbers::pi, 0.0);
            return b.get(e.node().name);
        case Kind::Sum: {
            Complex acc(0.0, 0.0);
            for (const auto& k : e.kids()) acc += eval_rec(k, b);
            return acc;
        }
        case Kind::Product: {
            Complex acc(1.0, 0.0);
            for (const auto& k : e.kids()) acc *= eval_rec(k, b);
            return acc;
        }
        case Kind::Power: {
            Complex base = eval_rec(e.kids()[0], b);
            const Expr& ex = e.kids()[1];
            if (ex.is_integer()) {
                std::int64_t n = ex.node().number.num();
                if (base == Complex(0.0, 0.0)) {
                    if (n > 0) return {0.0, 0.0};
                    pole(e, "zero raised to a non-positive power");
                }
                bool inv = n < 0;
                if (inv) n = -n;
                Complex acc(1.0, 0.0), p = base;
                while (n > 0) {
                    if (n & 1) acc *= p;
                    n >>= 1;
                    if (n) p *= p;
                }
                return inv ? Complex(1.0, 0.0) / acc : acc;
            }
            Complex ev = eval_rec(ex, b);
            if (base == Complex(0.0, 0.0)) {
                if (ev.real() > 0 && ev.imag() == 0) return {0.0, 0.0};
                pole(e, "zero raised to a non-positive power");
            }
            return std::pow(base, ev);
        }
        case Kind::Call: {
            Complex u = eval_rec(e.kids()[0], b);
            switch (e.node().fn) {
                case Fn::Sin: return std::sin(u);
                case Fn::Cos: return std::cos(u);
                case Fn::Tan: {
                    Complex c = std::cos(u);
                    if (c == Complex(0.0, 0.0)) pole(e, "tan at cos = 0");
                    return std::sin(u) / c;
                }
                case Fn::Cot: {
                    Complex s = std::sin(u);
                    if (s == Complex(0.0, 0.0)) pole(e, "cot at sin = 0");
                    return std::cos(u) / s;
                }
                case Fn::Exp: return std::exp(u);
                case Fn::Ln:
                    if (u == Complex(0.0, 0.0)) pole(e, "ln(0)");
                    return std::log(u);
                case Fn::Sqrt: return std::sqrt(u);
                case Fn::Abs: return Complex(std::abs(u), 0.0);
                case Fn::Conj: return std::conj(u);
                case Fn::Re: return Complex(u.real(), 0.0);
                case Fn::Im: return Complex(u.imag(), 0.0);
            }
        }
    }
    return {0.0, 0.0};
}

}  // namespace

Complex eval(const Expr& e, const Binding& b) {
    std::vector<std::string> missing;
    for (const auto& s : free_symbols(e))
        if (!b.has(s)) missing.push_back(s);
    if (!missing.empty()) throw UnboundSymbolError(std::move(missing));
    return eval_rec(e, b);
}

// ---- compiled form ---------------------------------------------------------

CompiledExpr CompiledExpr::compile(const Expr& e, const std::vector<std::string>& slots) {
    CompiledExpr c;
    c.nslots_ = slots.size();
    std::map<std::string, std::int32_t> index;
    for (std::size_t i = 0; i < slots.size(); ++i)
        index.emplace(slots[i], static_cast<std::int32_t>(i));
    std::vector<std::string> missing;
    for (const auto& s : free_symbols(e))
        if (!index.count(s)) missing.push_back(s);
    if (!missing.empty()) throw UnboundSymbolError(std::move(missing));
    c.emit(e, index);
    return c;
}

void CompiledExpr::emit(const Expr& e, const std::map<std::string, std::int32_t>& index) {
    switch (e.kind()) {
        case Kind::Number:
            code_.push_back({Op::Const, static_cast<std::int32_t>(consts_.size()), Fn::Sin});
            consts_.emplace_back(e.node().number.to_double(), 0.0);
            return;
        case Kind::Float:
            code_.push_back({Op::Const, static_cast<std::int32_t>(consts_.size()), Fn::Sin});
            consts_.emplace_back(e.node().flt, 0.0);
            return;
        case Kind::Imag:
            code_.push_back({Op::Const, static_cast<std::int32_t>(consts_.size()), Fn::Sin});
            consts_.emplace_back(0.0, 1.0);
            return;
        case Kind::Symbol:
            if (e.node().name == "pi") {
                code_.push_back({Op::Const, static_cast<std::int32_t>(consts_.size()), Fn::Sin});
                consts_.emplace_back(std::numbers::pi, 0.0);
                return;
            }
            code_.push_back({Op::Slot, index.at(e.node().name), Fn::Sin});
            return;
        case Kind::Sum:
            for (const auto& k : e.kids()) emit(k, index);
            code_.push_back({Op::SumN, static_cast<std::int32_t>(e.kids().size()), Fn::Sin});
            return;
        case Kind::Product:
            for (const auto& k : e.kids()) emit(k, index);
            code_.push_back({Op::MulN, static_cast<std::int32_t>(e.kids().size()), Fn::Sin});
            return;
        case Kind::Power:
            emit(e.kids()[0], index);
            if (e.kids()[1].is_integer() &&
                std::llabs(e.kids()[1].node().number.num()) < (1 << 30)) {
                code_.push_back(
                    {Op::PowInt, static_cast<std::int32_t>(e.kids()[1].node().number.num()), Fn::Sin});
            } else {
                emit(e.kids()[1], index);
                code_.push_back({Op::Pow, 0, Fn::Sin});
            }
            return;
        case Kind::Call:
            emit(e.kids()[0], index);
            code_.push_back({Op::Fn1, 0, e.node().fn});
            return;
    }
}

Complex CompiledExpr::eval(std::span<const double> slot_values) const {
    std::vector<Complex> vals(slot_values.size());
    for (std::size_t i = 0; i < slot_values.size(); ++i) vals[i] = Complex(slot_values[i], 0.0);
    return eval_complex(vals);
}

Complex CompiledExpr::eval_complex(std::span<const Complex> slot_values) const {
    // scratch is thread-local so one compiled program can be shared across
    // concurrent evaluations
    static thread_local std::vector<Complex> st;
    st.clear();
    for (const auto& ins : code_) {
        switch (ins.op) {
            case Op::Const:
                st.push_back(consts_[static_cast<std::size_t>(ins.a)]);
                break;
            case Op::Slot:
                st.push_back(slot_values[static_cast<std::size_t>(ins.a)]);
                break;
            case Op::SumN: {
                Complex acc(0.0, 0.0);
                for (std::int32_t i = 0; i < ins.a; ++i) { acc += st.back(); st.pop_back(); }
                st.push_back(acc);
                break;
            }
            case Op::MulN: {
                Complex acc(1.0, 0.0);
                for (std::int32_t i = 0; i < ins.a; ++i) { acc *= st.back(); st.pop_back(); }
                st.push_back(acc);
                break;
            }
            case Op::PowInt: {
                Complex base = st.back();
                st.pop_back();
                std::int64_t n = ins.a;
                if (base == Complex(0.0, 0.0)) {
                    if (n > 0) { st.push_back({0.0, 0.0}); break; }
                    throw PoleError("pole during evaluation: zero base, negative power", "x^n");
                }
                const bool inv = n < 0;
                if (inv) n = -n;
                Complex acc(1.0, 0.0), p = base;
                while (n > 0) {
                    if (n & 1) acc *= p;
                    n >>= 1;
                    if (n) p *= p;
                }
                st.push_back(inv ? Complex(1.0, 0.0) / acc : acc);
                break;
            }
            case Op::Pow: {
                Complex ex = st.back(); st.pop_back();
                Complex base = st.back(); st.pop_back();
                if (base == Complex(0.0, 0.0)) {
                    if (ex.real() > 0 && ex.imag() == 0) { st.push_back({0.0, 0.0}); break; }
                    throw PoleError("pole during evaluation: zero base, non-positive power", "x^y");
                }
                st.push_back(std::pow(base, ex));
                break;
            }
            case Op::Fn1: {
                Complex u = st.back();
                st.pop_back();
                switch (ins.fn) {
                    case Fn::Sin: st.push_back(std::sin(u)); break;
                    case Fn::Cos: st.push_back(std::cos(u)); break;
                    case Fn::Tan: {
                        Complex cc = std::cos(u);
                        if (cc == Complex(0.0, 0.0))
                            throw PoleError("pole during evaluation: tan", "tan");
                        st.push_back(std::sin(u) / cc);
                        break;
                    }
                    case Fn::Cot: {
                        Complex ss = std::sin(u);
                        if (ss == Complex(0.0, 0.0))
                            throw PoleError("pole during evaluation: cot", "cot");
                        st.push_back(std::cos(u) / ss);
                        break;
                    }
                    case Fn::Exp: st.push_back(std::exp(u)); break;
                    case Fn::Ln:
                        if (u == Complex(0.0, 0.0))
                            throw PoleError("pole during evaluation: ln(0)", "ln");
                        st.push_back(std::log(u));
                        break;
                    case Fn::Sqrt: st.push_back(std::sqrt(u)); break;
                    case Fn::Abs: st.push_back(Complex(std::abs(u), 0.0)); break;
                    case Fn::Conj: st.push_back(std::conj(u)); break;
                    case Fn::Re: st.push_back(Complex(u.real(), 0.0)); break;
                    case Fn::Im: st.push_back(Complex(u.imag(), 0.0)); break;
                }
                break;
            }
        }
    }
    return st.back();
}

}  // namespace qgrav
