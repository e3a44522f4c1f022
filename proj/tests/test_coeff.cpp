#include <cmath>
#include <random>

#include "acw/coeff.hpp"
#include "doctest.h"

using namespace acw;

namespace {

const ChartSpec chart = ChartSpec::numbered("U", "m", 3);

ScalarExpr P(const char* s) { return parse(s, chart); }

}  // namespace

TEST_CASE("canonical forms") {
    CHECK(P("m1 + 0") == P("m1"));
    CHECK(P("m1*m2 - m2*m1").is_zero());
    CHECK(P("m1 + 0").str() == "m1");
    CHECK(P("(m1+m2)^2") == P("m1^2 + 2*m1*m2 + m2^2"));
    CHECK(P("1/2*m1 + 0.5*m1") == P("m1"));
    CHECK(P("2^3^2").constant_value() == Rational(512));
}

TEST_CASE("cancellation records a caveat") {
    ScalarExpr e = P("(m1^2 - 1)/(m1 - 1)");
    CHECK(e == P("m1 + 1"));
    REQUIRE(e.caveats().size() == 1);
    CHECK(e.caveats()[0] == "m1 - 1");
}

TEST_CASE("rational functions are canonical") {
    ScalarExpr a = P("1/m1 + 1/m2");
    ScalarExpr b = P("(m1 + m2)/(m1*m2)");
    CHECK(a == b);
    CHECK(P("(m1*m2 + m2)/(2*m2*m1 + 2*m2)") == ScalarExpr(Rational(1, 2)));
    CHECK(P("m1/(m1*m3 - m2)") == P("-m1/(m2 - m1*m3)"));
}

TEST_CASE("printing round-trips") {
    SymbolTable sym(chart);
    sym.declare("f", 2);
    for (const char* s : {"m1^3 - 2/3*m2*m3 + 7", "(m1 + 1)/(m2^2 + m3)", "sin(m1*m2) + cos(m3)^2",
                          "pd(f(m1, m2^2), 1, 2) * exp(-m1)", "sqrt(m1^2 + 1) - 1/2"}) {
        ScalarExpr e = parse(s, sym);
        CHECK(parse(e.str(), sym) == e);
    }
}

TEST_CASE("parse errors carry positions") {
    try {
        P("m1 + q");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.position() == 5);
    }
    CHECK_THROWS_AS(P("m1 +"), ParseError);
    CHECK_THROWS_AS(P("m1^m2"), ParseError);
    CHECK_THROWS_AS(P("g(m1)"), ParseError);
    CHECK_THROWS_AS(P("1/(m1-m1)"), ParseError);
}

TEST_CASE("chain rule") {
    ScalarExpr e = P("sin(m1*m2)");
    CHECK(differentiate(e, "m1") == P("m2*cos(m1*m2)"));
    CHECK(differentiate(P("sqrt(m1^2+1)"), "m1") == P("m1/sqrt(m1^2+1)"));
    CHECK(differentiate(P("exp(m1*m3)"), "m3") == P("m1*exp(m1*m3)"));
    CHECK_THROWS_AS(differentiate(e, "x9", chart), Error);

    SymbolTable sym(chart);
    sym.declare("f", 2);
    ScalarExpr g = parse("f(m1*m2, m3)", sym);
    CHECK(differentiate(g, "m1") == parse("m2*pd(f(m1*m2, m3), 1)", sym));
    CHECK(differentiate(differentiate(g, "m1"), "m3") == differentiate(differentiate(g, "m3"), "m1"));
}

TEST_CASE("derivative agrees with central differences") {
    const ScalarExpr exprs[] = {P("sin(m1*m2) + m3/(1 + m1^2)"), P("exp(m1)*cos(m2 - m3) + sqrt(m1^2 + m2^2 + 1)"),
                                P("(m1^3 - m2)/(m3^2 + 2)")};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (const auto& e : exprs) {
        for (const char* c : {"m1", "m2", "m3"}) {
            ScalarExpr d = differentiate(e, c);
            for (int k = 0; k < 50; ++k) {
                NumericPoint p;
                for (const char* n : {"m1", "m2", "m3"}) p.coords[n] = u(rng);
                const double h = 1e-5;
                NumericPoint hi = p, lo = p;
                hi.coords[c] += h;
                lo.coords[c] -= h;
                double fd = (eval(e, hi) - eval(e, lo)) / (2 * h);
                CHECK(std::abs(fd - eval(d, p)) < 1e-6 * std::max(1.0, std::abs(fd)));
            }
        }
    }
}

TEST_CASE("zero testing") {
    CHECK(is_zero(P("m1 - m1")).kind == ZeroKind::ExactZero);
    auto v = is_zero(P("sin(m1)^2 + cos(m1)^2 - 1"));
    CHECK(v.kind == ZeroKind::NumericZero);
    CHECK(v.samples >= 20);
    auto w = is_zero(P("m1*m2"));
    CHECK(w.kind == ZeroKind::NonZero);
    CHECK(std::abs(w.witness_value) > 1e-6);
    CHECK(std::abs(w.witness.coords.at("m1") * w.witness.coords.at("m2") - w.witness_value) < 1e-12);
    CHECK(is_zero(P("sin(2*m1) - 2*sin(m1)*cos(m1)")).kind == ZeroKind::NumericZero);
    CHECK(is_zero(P("sin(m1) - m1")).kind == ZeroKind::NonZero);
}

TEST_CASE("evaluation errors") {
    NumericPoint p;
    p.coords["m1"] = 0.0;
    CHECK_THROWS_AS(eval(P("1/m1"), p), EvalError);
    NumericPoint q;
    CHECK_THROWS_AS(eval(P("m2"), q), EvalError);
    p.coords["m1"] = -1.0;
    CHECK_THROWS_AS(eval(P("sqrt(m1)"), p), EvalError);
}

TEST_CASE("substitution") {
    ScalarExpr e = P("m1^2 + sin(m2)");
    ScalarExpr s = substitute(e, {{"m1", P("m2 + m3")}, {"m2", P("m1")}});
    CHECK(s == P("m2^2 + 2*m2*m3 + m3^2 + sin(m1)"));

    SymbolTable sym(chart);
    sym.declare("f", 2);
    ScalarExpr g = parse("pd(f(m1, m2), 1) + f(m2, m3)", sym);
    ScalarExpr r = substitute_opaque(g, "f", P("m1^2*m2"), {"m1", "m2"});
    CHECK(r == P("2*m1*m2 + m2^2*m3"));
}

TEST_CASE("constants fold") {
    CHECK(ScalarExpr::sqrt(ScalarExpr(Rational(9, 4))) == ScalarExpr(Rational(3, 2)));
    CHECK(ScalarExpr::sin(ScalarExpr()).is_zero());
    CHECK(ScalarExpr::cos(ScalarExpr()) == ScalarExpr(1));
    CHECK(P("m1").pow(-2) == P("1/m1^2"));
}

TEST_CASE("square roots of polynomials reduce") {
    CHECK(P("sqrt(1 + m1^2)^2") == P("1 + m1^2"));
    CHECK(P("sqrt(1 + m1^2)^3") == P("(1 + m1^2)*sqrt(1 + m1^2)"));
    CHECK((P("sqrt(2 + m2)") * P("sqrt(2 + m2)") - P("m2")).constant_value() == Rational(2));

    ScalarExpr inv = P("1/sqrt(1 + m1^2)");
    CHECK(inv == P("sqrt(1 + m1^2)/(1 + m1^2)"));
    CHECK(inv * P("sqrt(1 + m1^2)") == ScalarExpr(1));
    CHECK_FALSE(inv.caveats().empty());

    // conjugate rationalization of a + b t
    ScalarExpr e = P("1/(1 + sqrt(2 + m1^2))");
    CHECK(e == P("(sqrt(2 + m1^2) - 1)/(1 + m1^2)"));
    NumericPoint p;
    p.coords = {{"m1", 0.4}, {"m2", -0.7}, {"m3", 1.1}};
    CHECK(eval(e, p) == doctest::Approx(1 / (1 + std::sqrt(2 + 0.16))));
}

TEST_CASE("common factors cancel through the gcd") {
    CHECK(P("(m1*m2 + m3)*(m1 - m2)/((m1*m2 + m3)*(m2 + 1))") == P("(m1 - m2)/(m2 + 1)"));
    CHECK(P("m1^3*m2/(m1^2*m3)") == P("m1*m2/m3"));
    CHECK(P("(m1^2 - m2^2)/(m1 + m2)^2") == P("(m1 - m2)/(m1 + m2)"));
    ScalarExpr coprime = P("(m1^2 + m2 + 1)/(m1*m3 - 2)");
    CHECK(coprime.str() == P(coprime.str().c_str()).str());
    CHECK(P("(m1 + 1)/(m1 + 2) + 1/(m1 + 2)") == P("1"));
}

TEST_CASE("Taylor evaluation agrees with symbolic derivatives") {
    const std::vector<std::string> coords = {"m1", "m2", "m3"};
    const std::vector<ScalarExpr> es = {P("sin(m1*m2)/(1 + m3^2)"), P("exp(m1 - m3)*cos(m2)^2"),
                                        P("sqrt(4 + m1^2 + m2*m3)"), P("(m1^3 - 2*m2)/(m3 + 5)^2"),
                                        P("1/sqrt(9 - m1^2 - m2^2)"), ScalarExpr(Rational(3, 7))};
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 10; ++k) {
        NumericPoint p;
        for (const auto& c : coords) p.coords[c] = u(rng);
        const std::vector<TaylorValue> batch = eval_taylor(es, coords, p, 2);
        for (std::size_t i = 0; i < es.size(); ++i) {
            CAPTURE(es[i].str());
            const TaylorValue t = eval_taylor(es[i], coords, p, 2);
            CHECK(t.value == doctest::Approx(eval(es[i], p)));
            CHECK(batch[i].value == t.value);
            for (std::size_t a = 0; a < 3; ++a) {
                const ScalarExpr da = differentiate(es[i], coords[a]);
                CHECK(t.gradient[a] == doctest::Approx(eval(da, p)).epsilon(1e-12));
                for (std::size_t b = 0; b < 3; ++b)
                    CHECK(t.hessian[a * 3 + b] == doctest::Approx(eval(differentiate(da, coords[b]), p)).epsilon(1e-12));
            }
        }
    }
    NumericPoint bad;
    bad.coords = {{"m1", 3.0}, {"m2", 1.0}, {"m3", 0.0}};
    CHECK_THROWS_AS(eval_taylor(es[4], coords, bad, 1), EvalError);
    CHECK_THROWS_AS(eval_taylor(es[0], coords, bad, 3), Error);
}
