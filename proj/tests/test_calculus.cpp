#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <thread>

#include "qgrav/calculus.hpp"
#include "qgrav/error.hpp"
#include "qgrav/numeric.hpp"
#include "qgrav/parser.hpp"
#include "qgrav/printer.hpp"
#include "qgrav/simplify.hpp"

using namespace qgrav;

TEST_CASE("derivative closed forms") {
    CHECK(differentiate(parse("exp(-r/a0)"), "r") == parse("-exp(-r/a0)/a0"));
    CHECK(simplify(differentiate(parse("cot(theta)"), "theta")) ==
          parse("-1/sin(theta)^2"));
    CHECK(differentiate(parse("exp(-i*omega0*t)"), "t") ==
          parse("-i*omega0*exp(-i*omega0*t)"));
    CHECK(differentiate(parse("x^3"), "x") == parse("3*x^2"));
    CHECK(differentiate(parse("sin(2*x)"), "x") == parse("2*cos(2*x)"));
    CHECK(differentiate(parse("x^y"), "x") == parse("y*x^(y - 1)"));
    CHECK(differentiate(parse("y"), "x") == integer(0));
}

TEST_CASE("derivative is linear structurally") {
    Expr a = parse("x^2*sin(x)");
    Expr b = parse("exp(-x)*cos(x)");
    CHECK(differentiate(a + b, "x") == differentiate(a, "x") + differentiate(b, "x"));
}

TEST_CASE("conj/re/im commute with the derivative") {
    Expr e = parse("conj(exp(-i*omega0*t))");
    Expr d = differentiate(e, "t");
    CHECK(simplify(d) == simplify(parse("conj(-i*omega0*exp(-i*omega0*t))")));
}

TEST_CASE("substitution") {
    CHECK(substitute(parse("cot(theta)^2"), "theta", parse("pi/2")) == integer(0));
    CHECK(substitute(parse("x^2 + y"), "x", parse("1 + z")) == parse("(1 + z)^2 + y"));
    // symbolic pole marker: the k denominator vanishes at r = 2*a0
    Expr k = parse("(1/r^2)*(1 - cot(theta)^2/(1 - r/(2*a0))^2)");
    CHECK_THROWS_AS(substitute(k, "r", parse("2*a0")), PoleError);
}

TEST_CASE("eval basics") {
    Binding b{{"omega0", 1.0}, {"t", 0.5}};
    const double v = eval(parse("re(exp(-i*omega0*t)^2)"), b).real();
    CHECK(v == doctest::Approx(std::cos(1.0)).epsilon(1e-12));

    Binding b2{{"r", 2.0}, {"a0", 1.0}};
    CHECK(eval(parse("exp(-r/a0)"), b2).real() ==
          doctest::Approx(0.1353352832366127).epsilon(1e-12));
    CHECK_THROWS_AS(eval(parse("1/(1 - r/(2*a0))"), b2), PoleError);

    try {
        eval(parse("x + y"), Binding{{"x", 1.0}});
        FAIL("expected UnboundSymbolError");
    } catch (const UnboundSymbolError& e) {
        CHECK(e.names == std::vector<std::string>{"y"});
    }
}

TEST_CASE("binding rejects duplicates and non-finite values") {
    Binding b;
    b.bind_real("x", 1.0);
    CHECK_THROWS_AS(b.bind_real("x", 2.0), BindingError);
    CHECK_THROWS_AS(b.bind_real("y", std::numeric_limits<double>::infinity()), BindingError);
}

TEST_CASE("compiled evaluation matches tree evaluation") {
    Expr e = parse("exp(-r)*sin(theta)^2*cos(phi) + r^2/(1 + r)");
    CompiledExpr prog = CompiledExpr::compile(e, {"r", "theta", "phi"});
    std::mt19937_64 rng(7);
    for (int k = 0; k < 50; ++k) {
        const double r = 0.1 + 3.0 * (rng() >> 11) * 0x1.0p-53;
        const double th = 0.1 + 3.0 * (rng() >> 11) * 0x1.0p-53;
        const double ph = 0.1 + 6.0 * (rng() >> 11) * 0x1.0p-53;
        const double pt[3] = {r, th, ph};
        Binding b{{"r", r}, {"theta", th}, {"phi", ph}};
        CHECK(std::abs(prog.eval(pt) - eval(e, b)) < 1e-14);
    }
}

TEST_CASE("derivative fidelity against central differences on the corpus") {
    std::ifstream corpus(std::string(QGRAV_TEST_DATA) + "/corpus.txt");
    REQUIRE(corpus.good());
    std::mt19937_64 rng(20020905);
    auto draw = [&](double lo, double hi) {
        return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
    };
    std::string line;
    int checked = 0;
    while (std::getline(corpus, line)) {
        if (line.empty() || line[0] == '#') continue;
        Expr e = parse(line);
        for (const auto& s : free_symbols(e)) {
            Expr d = differentiate(e, s);
            for (int trial = 0; trial < 10; ++trial) {
                Binding b;
                for (const auto& s2 : free_symbols(e))
                    b.bind_real(s2, s2 == "theta" ? draw(0.4, 2.6) : draw(0.4, 1.6));
                Complex sym, fd;
                try {
                    sym = eval(d, b);
                    fd = finite_diff(e, s, b, 1e-5);
                } catch (const PoleError&) {
                    continue;
                }
                CAPTURE(line);
                CAPTURE(s);
                CHECK(std::abs(sym - fd) <= 1e-6 * (1.0 + std::abs(sym)));
                ++checked;
            }
        }
    }
    CHECK(checked > 500);
}

TEST_CASE("expressions and compiled programs are shareable across threads") {
    Expr shared = parse("exp(-r)*sin(theta)^2/(1 + r^2) + cos(2*r)*cot(theta)");
    CompiledExpr prog = CompiledExpr::compile(shared, {"r", "theta"});
    std::array<std::vector<double>, 4> results;
    std::vector<std::thread> workers;
    for (int w = 0; w < 4; ++w) {
        workers.emplace_back([&, w] {
            for (int i = 0; i < 200; ++i) {
                const double pt[2] = {0.2 + 0.01 * i, 0.3 + 0.005 * i};
                results[static_cast<std::size_t>(w)].push_back(prog.eval(pt).real());
            }
            // pure symbolic work on the shared tree
            (void)simplify(shared * shared);
            (void)differentiate(shared, "r");
        });
    }
    for (auto& t : workers) t.join();
    for (int w = 1; w < 4; ++w)
        CHECK(results[static_cast<std::size_t>(w)] == results[0]);
}
