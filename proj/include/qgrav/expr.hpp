#pragma once

#include <cstddef>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "qgrav/rational.hpp"

namespace qgrav {

// Node kinds of the expression tree. Sums and products are n-ary and stored
// flattened in a deterministic canonical order; pure-constant subtrees are
// folded at construction, so structural equality is order-insensitive.
enum class Kind {
    Number,   // exact rational constant (integers have denominator 1)
    Float,    // IEEE double constant
    Imag,     // the imaginary unit i
    Symbol,   // named symbol; all symbols denote real values
    Sum,      // n-ary sum, >= 2 children
    Product,  // n-ary product, >= 2 children
    Power,    // children [base, exponent]
    Call,     // single-argument function application
};

enum class Fn { Sin, Cos, Tan, Cot, Exp, Ln, Sqrt, Abs, Conj, Re, Im };

const char* fn_name(Fn f);

class Expr;

struct ExprNode {
    Kind kind;
    Rational number;        // Kind::Number
    double flt = 0.0;       // Kind::Float
    std::string name;       // Kind::Symbol
    Fn fn = Fn::Sin;        // Kind::Call
    std::vector<Expr> kids; // Sum/Product children; Power [base, exponent]; Call [arg]
    std::size_t hash = 0;
    int size = 1;           // total node count, used as the complexity metric
};

// Immutable expression handle with value semantics. Never null; default
// constructs to the integer 0. Construction always canonicalizes (flattening,
// constant folding, like-term collection, base merging, deterministic child
// order), so two Exprs denote the same canonical tree iff operator== holds.
class Expr {
public:
    Expr();
    explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}

    const ExprNode& node() const { return *node_; }
    Kind kind() const { return node_->kind; }
    const std::vector<Expr>& kids() const { return node_->kids; }
    std::size_t hash() const { return node_->hash; }
    int size() const { return node_->size; }

    bool is_number() const { return kind() == Kind::Number; }
    bool is_float() const { return kind() == Kind::Float; }
    bool is_constant() const { return is_number() || is_float(); }
    bool is_zero() const { return is_number() && node_->number.is_zero(); }
    bool is_one() const { return is_number() && node_->number.is_one(); }
    bool is_integer() const { return is_number() && node_->number.is_integer(); }
    bool is_symbol(const std::string& n) const { return kind() == Kind::Symbol && node_->name == n; }
    bool is_call(Fn f) const { return kind() == Kind::Call && node_->fn == f; }

    bool operator==(const Expr& o) const;
    bool operator!=(const Expr& o) const { return !(*this == o); }

private:
    std::shared_ptr<const ExprNode> node_;
};

// Total deterministic order on canonical expressions (constants first, then
// i, symbols by name, calls, powers, products, sums).
int compare(const Expr& a, const Expr& b);

struct ExprLess {
    bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

struct ExprHash {
    std::size_t operator()(const Expr& e) const { return e.hash(); }
};

// ---- canonicalizing factories -------------------------------------------

Expr integer(std::int64_t v);
Expr rational(std::int64_t num, std::int64_t den);
Expr number(const Rational& r);
Expr floating(double v);
Expr imag_unit();
Expr symbol(std::string name);
Expr sum(std::vector<Expr> terms);
Expr product(std::vector<Expr> factors);
Expr power(Expr base, Expr exponent);
Expr call(Fn f, Expr arg);

// operator sugar; a - b and a / b lower to sum/product with -1 / ^-1
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

inline Expr pow_int(Expr base, std::int64_t n) { return power(std::move(base), integer(n)); }

// ---- structure helpers ---------------------------------------------------

// Base/exponent view of a product factor: Power splits, everything else has
// exponent 1.
inline const Expr& factor_base(const Expr& f) {
    return f.kind() == Kind::Power ? f.kids()[0] : f;
}
Expr factor_exponent(const Expr& f);

// Coefficient/monomial view of a sum term: the leading numeric constant of a
// product (1 if none). The monomial is the term with the constant removed.
struct TermView {
    Expr coeff;     // Kind::Number or Kind::Float
    Expr monomial;  // canonical remainder; integer 1 for pure constants
};
TermView term_view(const Expr& t);

// Exact set of unbound symbol names ("pi" is a bound constant and excluded).
std::set<std::string> free_symbols(const Expr& e);

bool contains_symbol(const Expr& e, const std::string& name);

// True when the tree can only denote a real value (no imaginary unit and no
// conj-of-complex subtlety; all symbols are real by convention).
bool syntactically_real(const Expr& e);

}  // namespace qgrav
