#pragma once

#include <string_view>

#include "qgrav/expr.hpp"

namespace qgrav {

// Parses the expression grammar
//
//   expr   := term (("+"|"-") term)*
//   term   := factor (("*"|"/") factor)*
//   factor := "-" factor | atom ("^" factor)?
//   atom   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"
//
// "^" is right-associative and binds tighter than unary minus, so -x^2 is
// -(x^2). Reserved identifiers: i, pi and the function names. Whitespace is
// insignificant. Numbers are decimal with optional fraction and exponent and
// are read as exact rationals.
//
// Throws SyntaxError (byte offset + expected-token set) on malformed input
// and UnknownFunctionError for IDENT "(" with an unrecognized IDENT.
Expr parse(std::string_view text);

}  // namespace qgrav
