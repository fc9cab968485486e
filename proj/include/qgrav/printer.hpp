#pragma once

#include <string>

#include "qgrav/expr.hpp"

namespace qgrav {

// Grammar-conformant rendering; parse(to_string(e)) always succeeds and
// parse(to_string(parse(s))) is a fixed point. Negative powers render as
// fractions, x^(1/2) as sqrt(x), and cos^n/sin^n pairs over a common argument
// are presented as cot^n (tan^n for the reciprocal pairing) without touching
// the underlying tree.
std::string to_string(const Expr& e);

}  // namespace qgrav
