#include <bit>
#include <random>

#include "acw/algebroid.hpp"
#include "acw/catalog.hpp"
#include "doctest.h"

using namespace acw;

namespace {

// Exterior algebra on r odd generators with rational coefficients, monomials as bitmasks.
using Grassmann = std::map<unsigned, Rational>;

int swaps(unsigned a, unsigned b) {
    int s = 0;
    for (unsigned i = 0; i < 32; ++i)
        if (b & (1u << i)) s += std::popcount(a >> (i + 1));
    return s;
}

Grassmann mul(const Grassmann& x, const Grassmann& y) {
    Grassmann out;
    for (const auto& [a, ca] : x)
        for (const auto& [b, cb] : y) {
            if (a & b) continue;
            Rational c = ca * cb;
            if (swaps(a, b) & 1) c = -c;
            out[a | b] += c;
        }
    std::erase_if(out, [](const auto& kv) { return kv.second == 0; });
    return out;
}

// D(xi^alpha) = -1/2 f^alpha_{beta gamma} xi^beta xi^gamma, extended by the odd Leibniz rule.
struct NaiveCE {
    std::vector<Grassmann> images;

    explicit NaiveCE(const AlgebroidSpec& s) : images(static_cast<std::size_t>(s.rank)) {
        for (int al = 0; al < s.rank; ++al)
            for (int be = 0; be < s.rank; ++be)
                for (int ga = 0; ga < s.rank; ++ga) {
                    if (be == ga) continue;
                    Rational f = *s.f(al, be, ga).constant_value();
                    Grassmann mono = mul({{1u << be, 1}}, {{1u << ga, 1}});
                    for (const auto& [m, c] : mono) images[al][m] -= Rational(1, 2) * f * c;
                }
        for (auto& g : images) std::erase_if(g, [](const auto& kv) { return kv.second == 0; });
    }

    Grassmann apply(const Grassmann& x) const {
        Grassmann out;
        for (const auto& [m, c] : x) {
            unsigned before = 0;
            for (unsigned i = 0; i < 32; ++i) {
                if (!(m & (1u << i))) continue;
                Grassmann left{{before, (std::popcount(before) & 1) ? -c : c}};
                Grassmann right{{m & ~((1u << (i + 1)) - 1), 1}};
                for (const auto& [k, v] : mul(mul(left, images[i]), right)) out[k] += v;
                before |= 1u << i;
            }
        }
        std::erase_if(out, [](const auto& kv) { return kv.second == 0; });
        return out;
    }
};

Grassmann to_grassmann(const GradedElem& e) {
    Grassmann g;
    for (const auto& [exps, c] : e.terms()) {
        unsigned m = 0;
        for (std::size_t i = 0; i < exps.size(); ++i)
            if (exps[i]) m |= 1u << i;
        g[m] = *c.constant_value();
    }
    return g;
}

AlgebroidSpec bracket_table(const std::vector<std::tuple<int, int, int, int>>& entries) {
    AlgebroidSpec s("table", ChartSpec("pt", {}), 3);
    for (auto [a, b, c, v] : entries) {
        s.bracket(a, b, c) = v;
        s.bracket(a, c, b) = -v;
    }
    return s;
}

struct RandomAlgebra {
    GenSetPtr gs = make_generators(ChartSpec::numbered("U", "m", 2),
                                   {{"x", 1}, {"y", 1}, {"u", 2}, {"v", 3}});
    std::mt19937_64 rng;

    explicit RandomAlgebra(std::uint64_t seed) : rng(seed) {}

    ScalarExpr coeff() {
        std::uniform_int_distribution<int> c(-3, 3), e(0, 2);
        ScalarExpr out;
        for (int t = 0; t < 3; ++t)
            out += ScalarExpr(c(rng)) * ScalarExpr::coord("m1").pow(e(rng)) * ScalarExpr::coord("m2").pow(e(rng));
        return out.is_zero() ? ScalarExpr(1) : out;
    }

    GradedElem element(std::optional<int> degree = std::nullopt) {
        std::uniform_int_distribution<int> len(0, 3), pick(0, 3);
        GradedElem out(gs);
        for (int t = 0; t < 4; ++t) {
            std::vector<std::size_t> word;
            for (int k = len(rng); k > 0; --k) word.push_back(static_cast<std::size_t>(pick(rng)));
            GradedElem m = GradedElem::monomial(gs, word, coeff());
            if (degree && !m.is_zero() && m.homogeneous_degree() != degree) continue;
            out += m;
        }
        return out;
    }
};

int parity(const GradedElem& e) { return *e.homogeneous_degree() & 1; }

}  // namespace

TEST_CASE("odd Leibniz sign on a product of generators") {
    Fixture so3 = instantiate("so3");
    DerivationSpec D = build_ce(so3.spec);
    auto x1 = GradedElem::generator(D.gs, "xi1"), x2 = GradedElem::generator(D.gs, "xi2");
    CHECK(apply_derivation(D, x1 * x2) == apply_derivation(D, x1) * x2 - x1 * apply_derivation(D, x2));
}

TEST_CASE("de Rham differential on m1 mbar2") {
    auto gs = make_generators(ChartSpec("U", {"m1", "m2"}), {{"mbar1", 1}, {"mbar2", 1}});
    auto D = DerivationSpec::make(gs, 1,
                                  {{"m1", GradedElem::generator(gs, "mbar1")}, {"m2", GradedElem::generator(gs, "mbar2")}},
                                  {});
    GradedElem e = GradedElem::scalar(gs, ScalarExpr::coord("m1")) * GradedElem::generator(gs, "mbar2");
    CHECK(apply_derivation(D, e) == GradedElem::generator(gs, "mbar1") * GradedElem::generator(gs, "mbar2"));
    CHECK(square_check(D).exact());
}

TEST_CASE("inhomogeneous derivation images are rejected") {
    auto gs = make_generators(ChartSpec("U", {"m1"}), {{"a", 1}, {"b", 2}});
    auto a = GradedElem::generator(gs, "a"), b = GradedElem::generator(gs, "b");
    CHECK_THROWS_AS(DerivationSpec::make(gs, 1, {{"m1", a + b}}, {}), Error);
    CHECK_THROWS_AS(DerivationSpec::make(gs, 1, {}, {{"a", a}}), Error);
}

TEST_CASE("CE differential agrees with a bitmask exterior-algebra expansion") {
    std::vector<AlgebroidSpec> specs = {instantiate("so3").spec, instantiate("su2").spec,
                                        bracket_table({{0, 1, 2, 1}, {1, 2, 0, 1}, {2, 0, 1, 0}})};
    for (const auto& s : specs) {
        CAPTURE(s.name);
        NaiveCE naive(s);
        DerivationSpec D = build_ce(s);
        for (unsigned m = 0; m < 8; ++m) {
            std::vector<std::size_t> word;
            for (std::size_t i = 0; i < 3; ++i)
                if (m & (1u << i)) word.push_back(i);
            GradedElem e = GradedElem::monomial(D.gs, word);
            CHECK(to_grassmann(apply_derivation(D, e)) == naive.apply({{m, 1}}));
            CHECK(to_grassmann(apply_derivation(D, apply_derivation(D, e))) == naive.apply(naive.apply({{m, 1}})));
        }
    }
}

TEST_CASE("so(3) CE squares to zero and D(xi1) = -xi2 xi3") {
    DerivationSpec D = build_ce(instantiate("so3").spec);
    auto x = [&](int i) { return GradedElem::generator(D.gs, static_cast<std::size_t>(i)); };
    CHECK(apply_derivation(D, x(0)) == -(x(1) * x(2)));
    CHECK(apply_derivation(D, apply_derivation(D, x(0))).is_zero());
    SquareReport r = square_check(D);
    CHECK(r.clean());
    CHECK(r.exact());
}

TEST_CASE("abelian CE is trivially nilpotent") {
    for (int r = 1; r <= 4; ++r) {
        DerivationSpec D = build_ce(instantiate("abelian", {{"r", std::to_string(r)}}).spec);
        for (const auto& img : D.gen_images) CHECK(img.is_zero());
        CHECK(square_check(D).exact());
    }
}

TEST_CASE("the table f1_23 = f2_31 = 1, f3_12 = 0 is the Euclidean algebra and satisfies Jacobi") {
    SquareReport r = square_check(build_ce(bracket_table({{0, 1, 2, 1}, {1, 2, 0, 1}})));
    CHECK(r.exact());
}

TEST_CASE("a Jacobi-violating bracket leaves a nonzero square") {
    AlgebroidSpec s = bracket_table({{2, 0, 1, 1}, {0, 1, 2, 1}, {0, 2, 0, 1}});
    DerivationSpec D = build_ce(s);
    SquareReport r = square_check(D);
    REQUIRE_FALSE(r.clean());
    NaiveCE naive(s);
    for (const auto* f : r.failures()) {
        CHECK(f->verdict.kind == ZeroKind::NonZero);
        int i = D.gs->index_of(f->symbol);
        REQUIRE(i >= 0);
        CHECK(to_grassmann(f->residual) == naive.apply(naive.apply({{1u << i, 1}})));
    }
}

TEST_CASE("product is associative and graded commutative") {
    RandomAlgebra R(7);
    for (int trial = 0; trial < 60; ++trial) {
        GradedElem a = R.element(), b = R.element(), c = R.element();
        CHECK((a * b) * c == a * (b * c));
        GradedElem p = R.element(1 + trial % 3), q = R.element(1 + (trial / 3) % 3);
        if (p.is_zero() || q.is_zero()) continue;
        ScalarExpr sign = (parity(p) & parity(q)) ? -1 : 1;
        CHECK(p * q == sign * (q * p));
    }
}

TEST_CASE("derivations are linear and obey Leibniz on products") {
    AlgebroidSpec s = instantiate("action_so3_R3").spec;
    DerivationSpec D = build_ce(s);
    REQUIRE(square_check(D).exact());
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> c(-2, 2), pick(0, static_cast<int>(D.gs->size()) - 1);
    auto coeff = [&] {
        ScalarExpr e = ScalarExpr(c(rng));
        for (const auto& x : s.base.coords()) e += ScalarExpr(c(rng)) * ScalarExpr::coord(x) * ScalarExpr::coord(x);
        return e;
    };
    auto element = [&](int degree) {
        GradedElem out(D.gs);
        for (int t = 0; t < 3; ++t) {
            std::vector<std::size_t> word;
            for (int k = 0; k < degree; ++k) word.push_back(static_cast<std::size_t>(pick(rng)));
            out += GradedElem::monomial(D.gs, word, coeff());
        }
        return out;
    };
    for (int trial = 0; trial < 40; ++trial) {
        int k = trial % 3;
        GradedElem a = element(k), b = element(1 + trial % 2);
        GradedElem a2 = element(k);
        ScalarExpr lam(Rational(c(rng), 3));
        CHECK(apply_derivation(D, a + lam * a2) == apply_derivation(D, a) + lam * apply_derivation(D, a2));
        ScalarExpr sign = (k & 1) ? -1 : 1;
        CHECK(apply_derivation(D, a * b) == apply_derivation(D, a) * b + sign * (a * apply_derivation(D, b)));
    }
}
