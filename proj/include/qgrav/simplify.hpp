#pragma once

#include <optional>
#include <utility>

#include "qgrav/expr.hpp"

namespace qgrav {

// Deep simplification on top of the constructors' canonical form. The fixed
// rewrite set: constant folding, sin^2+cos^2 -> 1, exp(a)*exp(b) -> exp(a+b),
// power merging, tan/cot canonicalized to sin/cos, re/im/conj resolution for
// separable expressions, and rational-function normalization over a common
// denominator (kept only when it shrinks the tree). Idempotent:
// simplify(simplify(e)) == simplify(e) structurally.
Expr simplify(const Expr& e);

// Splits e into (re, im) assuming every symbol is real-valued. Fails (nullopt)
// only for constructs with no separable form (e.g. sin of a genuinely complex
// argument).
std::optional<std::pair<Expr, Expr>> complex_split(const Expr& e);

// Simplified real/imaginary parts; throws Error when the split fails.
Expr re_part(const Expr& e);
Expr im_part(const Expr& e);

}  // namespace qgrav
