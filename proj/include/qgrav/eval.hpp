#pragma once

#include <complex>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qgrav/expr.hpp"

namespace qgrav {

using Complex = std::complex<double>;

// Symbol-to-value table. Every symbol is bound at most once and values must
// be finite; "pi" is implicitly bound and may not be rebound.
class Binding {
public:
    Binding() = default;
    Binding(std::initializer_list<std::pair<std::string, Complex>> init);

    void bind(const std::string& name, Complex value);         // throws on duplicate
    void bind_real(const std::string& name, double value) { bind(name, Complex(value, 0.0)); }
    bool has(const std::string& name) const;
    Complex get(const std::string& name) const;                // throws if missing
    const std::map<std::string, Complex>& values() const { return values_; }

    // copy with one value replaced (or added); used by samplers and stencils
    Binding with(const std::string& name, Complex value) const;

private:
    std::map<std::string, Complex> values_;
};

// IEEE double-precision complex evaluation. Throws UnboundSymbolError listing
// every missing symbol, and PoleError (with the offending subtree rendered)
// on division by zero, ln(0) or tan/cot at an exact trig pole.
Complex eval(const Expr& e, const Binding& b);

// Postorder-compiled form of an expression over a fixed slot layout; used by
// the quadrature and grid paths where the same tree is evaluated at many
// points. Unbound symbols are detected at compile time.
class CompiledExpr {
public:
    static CompiledExpr compile(const Expr& e, const std::vector<std::string>& slots);

    Complex eval(std::span<const double> slot_values) const;
    Complex eval_complex(std::span<const Complex> slot_values) const;

private:
    enum class Op : std::uint8_t { Const, Slot, SumN, MulN, Pow, PowInt, Fn1 };
    struct Ins {
        Op op;
        std::int32_t a = 0;  // const index / slot index / arity / int exponent
        Fn fn = Fn::Sin;
    };
    std::vector<Ins> code_;
    std::vector<Complex> consts_;
    std::size_t nslots_ = 0;

    void emit(const Expr& e, const std::map<std::string, std::int32_t>& index);
};

}  // namespace qgrav
