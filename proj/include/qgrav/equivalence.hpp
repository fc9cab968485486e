#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "qgrav/eval.hpp"
#include "qgrav/expr.hpp"

namespace qgrav {

struct Interval {
    double lo;
    double hi;
};

// Per-symbol sampling ranges; a symbol may carry several disjoint intervals
// (sampled proportionally to length). Symbols not listed fall back to
// kDefaultInterval.
using Domain = std::map<std::string, std::vector<Interval>>;

inline constexpr Interval kDefaultInterval{0.1, 2.0};

// Fixed default sampling seed so reports and tests are reproducible; override
// per call (the CLI wires --seed / QGRAV_SEED through here).
inline constexpr std::uint64_t kDefaultSeed = 12345;

struct Verdict {
    bool equivalent;
    std::optional<Binding> counterexample;  // set iff !equivalent
    double worst_error = 0.0;
};

// Probabilistic equality of two expressions by uniform sampling: a
// counterexample is certain, "equivalent" is evidence. Disagreement means
// |e1-e2| > tol*(1+|e1|) at a sample. Throws InconclusiveError when more than
// half of the trials land on poles.
Verdict equivalent(const Expr& e1, const Expr& e2, const Domain& domain, int trials,
                   double tol, std::uint64_t seed = kDefaultSeed);

// Convenience: e vs 0 over the domain.
bool vanishes(const Expr& e, const Domain& domain, int trials, double tol,
              std::uint64_t seed = kDefaultSeed);

}  // namespace qgrav
