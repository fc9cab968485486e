#include "qgrav/equivalence.hpp"

#include <cmath>
#include <random>
#include <set>

#include "qgrav/error.hpp"

namespace qgrav {

namespace {

double uniform01(std::mt19937_64& rng) {
    // platform-independent uniform double in [0,1)
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double sample_symbol(const std::vector<Interval>& intervals, std::mt19937_64& rng) {
    double total = 0.0;
    for (const auto& iv : intervals) total += iv.hi - iv.lo;
    double pick = uniform01(rng) * total;
    for (const auto& iv : intervals) {
        const double len = iv.hi - iv.lo;
        if (pick <= len || &iv == &intervals.back()) return iv.lo + std::min(pick, len);
        pick -= len;
    }
    return intervals.back().lo;
}

}  // namespace

Verdict equivalent(const Expr& e1, const Expr& e2, const Domain& domain, int trials,
                   double tol, std::uint64_t seed) {
    if (trials < 1) throw SpecError("equivalent(): trials must be >= 1");
    std::set<std::string> syms = free_symbols(e1);
    for (const auto& s : free_symbols(e2)) syms.insert(s);

    std::mt19937_64 rng(seed);
    int poles = 0;
    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        Binding b;
        for (const auto& s : syms) {
            auto it = domain.find(s);
            const std::vector<Interval> fallback{kDefaultInterval};
            const auto& ivs = it == domain.end() ? fallback : it->second;
            b.bind_real(s, sample_symbol(ivs, rng));
        }
        Complex v1, v2;
        try {
            v1 = eval(e1, b);
            v2 = eval(e2, b);
        } catch (const PoleError&) {
            ++poles;
            continue;
        }
        const double err = std::abs(v1 - v2);
        worst = std::max(worst, err);
        if (err > tol * (1.0 + std::abs(v1)))
            return {false, b, err};
    }
    if (poles * 2 > trials)
        throw InconclusiveError("equivalence sampling hit poles in more than half of " +
                                std::to_string(trials) + " trials");
    return {true, std::nullopt, worst};
}

bool vanishes(const Expr& e, const Domain& domain, int trials, double tol, std::uint64_t seed) {
    return equivalent(e, integer(0), domain, trials, tol, seed).equivalent;
}

}  // namespace qgrav
