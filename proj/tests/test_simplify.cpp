#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>

#include "qgrav/equivalence.hpp"
#include "qgrav/error.hpp"
#include "qgrav/parser.hpp"
#include "qgrav/printer.hpp"
#include "qgrav/simplify.hpp"

using namespace qgrav;

TEST_CASE("fixed rewrite set") {
    CHECK(simplify(parse("sin(theta)^2 + cos(theta)^2")) == integer(1));
    CHECK(simplify(parse("exp(-r/(2*a0))*exp(-r/(2*a0))")) == parse("exp(-r/a0)"));
    CHECK(simplify(parse("x*1 + 0")) == symbol("x"));
    CHECK(simplify(parse("exp(x)*exp(y)")) == parse("exp(x + y)"));
    CHECK(simplify(parse("x^2*x^3")) == parse("x^5"));
    CHECK(simplify(parse("ln(exp(x))")) == symbol("x"));
    CHECK(simplify(parse("sqrt(x)*sqrt(x)")) == symbol("x"));
}

TEST_CASE("pythagoras with common coefficient and cofactor") {
    Expr e = parse("3*y*sin(u)^2 + 3*y*cos(u)^2");
    CHECK(simplify(e) == parse("3*y"));
    // no match across different coefficients
    Expr f = parse("2*sin(u)^2 + 3*cos(u)^2");
    CHECK(simplify(f) == f);
}

TEST_CASE("rational normalization collapses when it cancels") {
    // 1 - (1 - x) -> x  (distribution inside sums)
    CHECK(simplify(parse("1 - (1 - x^2)")) == pow_int(symbol("x"), 2));
    // -1 - cos^2/sin^2 -> -1/sin^2
    Expr d = simplify(parse("-1 - cos(theta)^2/sin(theta)^2"));
    CHECK(d == parse("-1/sin(theta)^2"));
    // but a fraction that would only grow stays factored
    Expr k = parse("(1/r^2)*(1 - cot(theta)^2/(1 - r/(2*a0))^2)");
    CHECK(to_string(simplify(k)) == "(1/r^2)*(1 - cot(theta)^2/(1 - r/(2*a0))^2)");
}

TEST_CASE("tan and cot canonicalize toward sin/cos and reappear in printing") {
    Expr e = simplify(parse("cot(theta)"));
    CHECK(e == parse("cos(theta)/sin(theta)"));
    CHECK(to_string(e) == "cot(theta)");
    CHECK(to_string(simplify(parse("tan(x)^3"))) == "tan(x)^3");
}

TEST_CASE("re/im/conj resolve for separable expressions") {
    CHECK(simplify(parse("re(x + i*y)")) == symbol("x"));
    CHECK(simplify(parse("im(x + i*y)")) == symbol("y"));
    CHECK(simplify(parse("conj(x + i*y)")) == parse("x - i*y"));
    CHECK(simplify(parse("re(exp(-i*omega0*t))")) == parse("cos(omega0*t)"));
    CHECK(simplify(parse("re(exp(-i*omega0*t)^2)")) == parse("cos(2*omega0*t)"));
    CHECK(simplify(parse("im(exp(-i*omega0*t)^2)")) == parse("-sin(2*omega0*t)"));
    CHECK(simplify(parse("abs(exp(-i*x))^2")) == integer(1));
}

TEST_CASE("simplify is idempotent and value-preserving on the corpus") {
    std::ifstream corpus(std::string(QGRAV_TEST_DATA) + "/corpus.txt");
    REQUIRE(corpus.good());
    Domain dom;
    dom["x"] = {{0.3, 1.7}};
    dom["y"] = {{0.3, 1.7}};
    dom["u"] = {{0.3, 1.7}};
    dom["r"] = {{0.3, 1.7}};
    dom["theta"] = {{0.4, 2.6}};
    dom["phi"] = {{0.2, 6.0}};
    dom["t"] = {{0.2, 1.8}};
    dom["a0"] = {{0.6, 1.4}};
    dom["omega0"] = {{0.5, 1.5}};
    std::string line;
    while (std::getline(corpus, line)) {
        if (line.empty() || line[0] == '#') continue;
        CAPTURE(line);
        Expr e = parse(line);
        Expr s = simplify(e);
        CHECK(simplify(s) == s);  // idempotent
        auto verdict = equivalent(e, s, dom, 100, 1e-9);
        CHECK(verdict.equivalent);
    }
}

TEST_CASE("expanded and factored k fields are equivalent") {
    Expr factored = parse("(1/r^2)*(1 - cot(theta)^2/(1 - r/(2*a0))^2)");
    Expr expanded = parse(
        "(sin(theta)^2*(1 - r/(2*a0))^2 - cos(theta)^2)"
        "/(r^2*sin(theta)^2*(1 - r/(2*a0))^2)");
    Domain dom;
    dom["r"] = {{0.1, 1.9}, {2.1, 5.0}};
    dom["theta"] = {{0.2, 2.9}};
    dom["a0"] = {{0.7, 1.4}};
    CHECK(equivalent(factored, expanded, dom, 120, 1e-9).equivalent);
}

TEST_CASE("equivalence sampling") {
    Domain dom;
    dom["theta"] = {{0.2, 3.0}};
    CHECK(equivalent(parse("sin(theta)^2 + cos(theta)^2"), integer(1), dom, 100, 1e-10)
              .equivalent);
    auto v = equivalent(parse("sin(theta)"), parse("cos(theta)"), dom, 100, 1e-10);
    CHECK_FALSE(v.equivalent);
    REQUIRE(v.counterexample.has_value());
    // the witness really separates the two expressions
    Binding w = *v.counterexample;
    double s = eval(parse("sin(theta)"), w).real();
    double c = eval(parse("cos(theta)"), w).real();
    CHECK(std::abs(s - c) > 1e-10);
}

TEST_CASE("union domains sample both branches") {
    Domain dom;
    dom["x"] = {{0.5, 0.9}, {1.5, 2.0}};
    auto v = equivalent(parse("x"), parse("x"), dom, 64, 1e-12);
    CHECK(v.equivalent);
}

TEST_CASE("equivalence is inconclusive when poles dominate") {
    Domain dom;
    dom["x"] = {{0.0, 0.0}};  // degenerate interval pinned on the pole
    CHECK_THROWS_AS(equivalent(parse("1/x"), parse("1/x"), dom, 10, 1e-9),
                    InconclusiveError);
}

// ---- hand-rolled property fuzzing -------------------------------------------

namespace {

Expr random_expr(std::mt19937_64& rng, int depth) {
    auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };
    if (depth <= 0 || pick(4) == 0) {
        switch (pick(6)) {
            case 0: return symbol("x");
            case 1: return symbol("y");
            case 2: return symbol("theta");
            case 3: return integer(pick(7) - 3);
            case 4: return rational(pick(9) - 4, 1 + pick(4));
            default: return symbol("r");
        }
    }
    switch (pick(8)) {
        case 0: return random_expr(rng, depth - 1) + random_expr(rng, depth - 1);
        case 1: return random_expr(rng, depth - 1) - random_expr(rng, depth - 1);
        case 2: return random_expr(rng, depth - 1) * random_expr(rng, depth - 1);
        case 3: return random_expr(rng, depth - 1) / random_expr(rng, depth - 1);
        case 4: return pow_int(random_expr(rng, depth - 1), pick(5) - 2);
        case 5: {
            const Fn fns[] = {Fn::Sin, Fn::Cos, Fn::Exp, Fn::Abs, Fn::Tan, Fn::Cot};
            return call(fns[pick(6)], random_expr(rng, depth - 1));
        }
        case 6: return call(Fn::Exp, imag_unit() * random_expr(rng, depth - 1));
        default: return call(Fn::Re, random_expr(rng, depth - 1));
    }
}

}  // namespace

TEST_CASE("property: simplify is idempotent and value-preserving on random trees") {
    std::mt19937_64 rng(kDefaultSeed);
    Domain dom;
    dom["x"] = {{0.3, 1.6}};
    dom["y"] = {{0.3, 1.6}};
    dom["r"] = {{0.3, 1.6}};
    dom["theta"] = {{0.4, 2.6}};
    int generated = 0;
    while (generated < 150) {
        Expr e;
        try {
            e = random_expr(rng, 4);
        } catch (const PoleError&) {
            continue;  // construction hit an exact zero denominator
        }
        ++generated;
        CAPTURE(to_string(e));
        Expr s;
        try {
            s = simplify(e);
        } catch (const PoleError&) {
            continue;  // rewriting exposed an identically-zero denominator
        }
        CHECK(simplify(s) == s);
        try {
            auto v = equivalent(e, s, dom, 24, 1e-7);
            CHECK(v.equivalent);
        } catch (const InconclusiveError&) {
            // pole-dominated sample region; value equality is vacuous there
        }
    }
}

TEST_CASE("property: printing is a parse fixed point on random trees") {
    std::mt19937_64 rng(777);
    int generated = 0;
    while (generated < 200) {
        Expr e;
        try {
            e = random_expr(rng, 4);
        } catch (const PoleError&) {
            continue;
        }
        ++generated;
        CAPTURE(to_string(e));
        Expr back = parse(to_string(e));
        CHECK(back == e);
    }
}
