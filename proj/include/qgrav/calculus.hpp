#pragma once

#include <map>
#include <string>

#include "qgrav/expr.hpp"

namespace qgrav {

// Exact partial derivative with respect to the named (real) symbol. conj, re
// and im commute with the derivative since coordinates are real.
Expr differentiate(const Expr& e, const std::string& sym);

// Replaces every listed symbol by its expression; the result is canonical.
// Substitutions that expose a division by zero throw PoleError (the symbolic
// pole marker).
Expr substitute(const Expr& e, const std::map<std::string, Expr>& table);
Expr substitute(const Expr& e, const std::string& sym, const Expr& value);

}  // namespace qgrav
