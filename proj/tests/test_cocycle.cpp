#include <cmath>

#include "acw/cocycle.hpp"
#include "doctest.h"

using namespace acw;

namespace {

const ScalarExpr theta = ScalarExpr::coord("x1");
const ScalarExpr phi = ScalarExpr::coord("x2");

const CheckLine* line(const CocycleVerdict& v, const std::string& name) {
    for (const auto& l : v.lines)
        if (l.name == name) return &l;
    return nullptr;
}

// Higgs section with m_S = (sin theta, 0) and m_N = g_NS m_S.
TransitionData with_higgs(TransitionData t, long n) {
    const ScalarExpr s = ScalarExpr::sin(theta);
    t.higgs = {{s * ScalarExpr::cos(ScalarExpr(n) * phi), s * ScalarExpr::sin(ScalarExpr(n) * phi)},
               {s, ScalarExpr()}};
    return t;
}

SymMatrix matrix(const std::vector<std::vector<ScalarExpr>>& rows) {
    SymMatrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
    return m;
}

}  // namespace

TEST_CASE("monopole bundles glue and have Chern number n") {
    for (long n = -2; n <= 2; ++n) {
        CAPTURE(n);
        CoverSpec cover = sphere_cover();
        TransitionData data = monopole_data(n);
        CocycleVerdict c = verify_cocycle(cover, data);
        CHECK(c.passed);
        CHECK(c.max_residual < 1e-9);
        CocycleVerdict g = glue_check(cover, data);
        CHECK(g.passed);
        CHECK(g.max_residual < 1e-9);
        ChernResult ch = chern_number(cover, data);
        CHECK(ch.integral);
        CHECK(ch.nearest == n);
        CHECK(std::abs(ch.value - static_cast<double>(n)) < 1e-6);
    }
}

TEST_CASE("monopole curvature is -(n/2) sin theta on both patches") {
    CoverSpec cover = sphere_cover();
    TransitionData data = monopole_data(3);
    for (int i = 0; i < 2; ++i) {
        auto F = patch_curvature(cover, data, i);
        REQUIRE(F.size() == 1);
        CHECK(cover.patch().component(F[0], 0, 1) == ScalarExpr(Rational(-3, 2)) * ScalarExpr::sin(theta));
    }
}

TEST_CASE("a tampered transition fails the cocycle check with a witness") {
    CoverSpec cover = sphere_cover();
    TransitionData data = monopole_data(1);
    data.g[{0, 1}] = data.g[{0, 1}] * SymMatrix::rotation(phi);
    CocycleVerdict v = verify_cocycle(cover, data);
    CHECK_FALSE(v.passed);
    const CheckLine* l = line(v, "g_12 g_21 = 1");
    REQUIRE(l);
    CHECK_FALSE(l->passed);
    CHECK(l->max_residual > 1e-3);
    REQUIRE(l->witness.size() == 2);
    CHECK(l->witness[0] > M_PI / 2 - 0.5);
    CHECK(l->witness[0] < M_PI / 2 + 0.5);
}

TEST_CASE("mismatched patch potentials fail the gluing check") {
    CoverSpec cover = sphere_cover();
    TransitionData data = monopole_data(1);
    data.A[1] = monopole_data(2).A[1];
    CocycleVerdict v = glue_check(cover, data);
    CHECK_FALSE(v.passed);
    CHECK(v.max_residual > 0.1);
    CHECK(line(v, "A_2 = g^-1 A_1 g + g^-1 dg")->max_residual > 0.1);
}

TEST_CASE("a tampered potential gives a non-integral Chern number") {
    CoverSpec cover = sphere_cover();
    TransitionData data = monopole_data(1);
    data.A[0][0][1] = data.A[0][0][1] * ScalarExpr(Rational(1, 2));
    ChernResult ch = chern_number(cover, data);
    CHECK_FALSE(ch.integral);
    CHECK(std::abs(ch.value - 0.75) < 1e-6);
    CHECK_FALSE(glue_check(cover, data).passed);
}

TEST_CASE("patchwise gauge transformations leave all verdicts invariant") {
    CoverSpec cover = sphere_cover();
    for (long n : {-1L, 2L}) {
        TransitionData data = with_higgs(monopole_data(n), n);
        const ScalarExpr a0 = theta * theta + phi, a1 = ScalarExpr::sin(theta) * ScalarExpr::cos(phi);
        std::vector<SymMatrix> p = {SymMatrix::rotation(a0), SymMatrix::rotation(a1)};
        std::vector<SymMatrix> p_inv = {SymMatrix::rotation(-a0), SymMatrix::rotation(-a1)};
        TransitionData moved = gauge_transform(cover, data, p, p_inv);
        CHECK(verify_cocycle(cover, moved).passed);
        CHECK(glue_check(cover, moved).passed);
        CHECK(std::abs(chern_number(cover, moved).value - chern_number(cover, data).value) < 1e-6);
    }
}

TEST_CASE("Higgs sections transform by the inverse transition") {
    CoverSpec cover = sphere_cover();
    TransitionData data = with_higgs(monopole_data(2), 2);
    CocycleVerdict v = verify_cocycle(cover, data);
    CHECK(v.passed);
    REQUIRE(line(v, "m_2 = g_12^-1 m_1"));
    CocycleVerdict g = glue_check(cover, data);
    CHECK(g.passed);

    TransitionData wrong = data;
    wrong.higgs[1] = {ScalarExpr(), ScalarExpr::sin(theta)};
    CHECK_FALSE(verify_cocycle(cover, wrong).passed);
}

TEST_CASE("forgetting the Higgs field leaves the group checks unchanged") {
    CoverSpec cover = sphere_cover();
    TransitionData with = with_higgs(monopole_data(1), 1);
    TransitionData without = monopole_data(1);
    CocycleVerdict a = verify_cocycle(cover, with), b = verify_cocycle(cover, without);
    for (const auto& l : b.lines) {
        const CheckLine* m = line(a, l.name);
        REQUIRE(m);
        CHECK(m->max_residual == l.max_residual);
    }
    CHECK(a.lines.size() > b.lines.size());
}

TEST_CASE("matrix groups compute their structure constants") {
    MatrixGroup so2 = MatrixGroup::so2();
    CHECK(so2.n == 2);
    CHECK(so2.algebra.bracket.exact_zero());

    const ScalarExpr o, l(1), m(-1);
    std::vector<SymMatrix> basis = {matrix({{o, o, o}, {o, o, m}, {o, l, o}}),
                                    matrix({{o, o, l}, {o, o, o}, {m, o, o}}),
                                    matrix({{o, m, o}, {l, o, o}, {o, o, o}})};
    MatrixGroup so3 = MatrixGroup::make("so3", basis);
    CHECK(so3.algebra.f(2, 0, 1) == ScalarExpr(1));
    CHECK(so3.algebra.f(0, 1, 2) == ScalarExpr(1));
    CHECK(so3.algebra.f(1, 2, 0) == ScalarExpr(1));
    CHECK(so3.algebra.f(0, 0, 1).is_zero());

    std::vector<ScalarExpr> comps = {theta, ScalarExpr(Rational(2, 3)), phi * phi};
    CHECK(so3.decompose(so3.assemble(comps)) == comps);

    CHECK_THROWS_AS(MatrixGroup::make("not closed", {basis[0], basis[1]}), Error);
}

TEST_CASE("cocycle options control the sample count and seed") {
    CoverSpec cover = sphere_cover();
    TransitionData data = monopole_data(1);
    CocycleOptions o;
    o.samples = 50;
    o.seed = 9;
    CocycleVerdict a = verify_cocycle(cover, data, o), b = verify_cocycle(cover, data, o);
    CHECK(a.samples == 50 * static_cast<int>(a.lines.size()));
    REQUIRE(a.lines.size() == b.lines.size());
    for (std::size_t i = 0; i < a.lines.size(); ++i) CHECK(a.lines[i].witness == b.lines[i].witness);
}
