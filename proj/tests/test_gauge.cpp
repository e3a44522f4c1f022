#include "acw/catalog.hpp"
#include "acw/gauge.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace acw;

namespace {

bool all_zero(const std::vector<GradedElem>& v) {
    for (const auto& e : v)
        if (!e.is_zero()) return false;
    return true;
}

bool all_zero(const std::vector<ScalarExpr>& v) {
    for (const auto& e : v)
        if (!e.is_zero()) return false;
    return true;
}

std::vector<GradedElem> diff(const std::vector<GradedElem>& a, const std::vector<GradedElem>& b) {
    REQUIRE(a.size() == b.size());
    std::vector<GradedElem> out;
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(a[i] - b[i]);
    return out;
}

struct Setup {
    Fixture fx;
    PatchSpec P;
    PatchFieldConfig cfg;

    Setup(const std::string& name, int patch_dim, const Params& params = {})
        : fx(instantiate(name, params)), P(patch_dim), cfg(PatchFieldConfig::generic(fx.spec, P)) {}
};

const std::vector<std::string> kCovariant = {"so3", "abelian", "tangent", "action_so3_R3", "lab_su2_R3",
                                             "tm_torsion_R2", "nonstrict_tm_R3"};

}  // namespace

TEST_CASE("over a point with su(2) constants the engine is ordinary Yang-Mills") {
    Setup s("su2", 3);
    const auto& f = s.fx.spec.bracket;
    const auto& A = s.cfg.A_g;
    auto c = generic_parameter(s.fx.spec, s.P, "c");
    Curvatures C = curvature_components(s.fx.spec, s.fx.adj, s.P, s.cfg.phi, A);
    GaugeVariation V = gauge_variation(s.fx.spec, s.fx.adj, s.P, s.cfg.phi, A, c);
    for (int al = 0; al < 3; ++al) {
        GradedElem F = s.P.d(A[al]), dA = s.P.d(c[al]), dF(s.P.forms());
        for (int be = 0; be < 3; ++be)
            for (int ga = 0; ga < 3; ++ga) {
                F += (Rational(1, 2) * f(al, be, ga)) * (A[be] * A[ga]);
                dA += (f(al, be, ga) * c[ga]) * A[be];
            }
        for (int be = 0; be < 3; ++be)
            for (int ga = 0; ga < 3; ++ga) dF += (f(al, be, ga) * c[ga]) * C.F[be];
        CHECK(C.F[al] == F);
        CHECK(V.A[al] == dA);
        CHECK(V.F[al] == dF);
        CHECK(V.F_lin[al] == dF);
    }
}

TEST_CASE("so(3) over a point satisfies dF + [A, F] = 0") {
    Setup s("so3", 3);
    BianchiResiduals B = bianchi_residuals(s.fx.spec, s.fx.adj, s.P, s.cfg.phi, s.cfg.A_g);
    Curvatures C = curvature_components(s.fx.spec, s.fx.adj, s.P, s.cfg.phi, s.cfg.A_g);
    for (int al = 0; al < 3; ++al) {
        GradedElem r = s.P.d(C.F[al]);
        for (int be = 0; be < 3; ++be)
            for (int ga = 0; ga < 3; ++ga) r += s.fx.spec.f(al, be, ga) * (s.cfg.A_g[be] * C.F[ga]);
        CHECK(r.is_zero());
    }
    CHECK(all_zero(B.F));
}

TEST_CASE("E is the covariant derivative of phi") {
    Setup s("action_so3_R3", 2);
    Curvatures C = curvature_components(s.fx.spec, s.fx.adj, s.P, s.cfg.phi, s.cfg.A_g);
    std::map<std::string, ScalarExpr> at;
    for (int a = 0; a < 3; ++a) at.emplace(s.fx.spec.base.coords()[a], s.cfg.phi[a]);
    for (int a = 0; a < 3; ++a) {
        GradedElem E = s.P.d(s.cfg.phi[a]);
        for (int al = 0; al < 3; ++al) E -= substitute(s.fx.spec.rho(al, a), at) * s.cfg.A_g[al];
        CHECK(C.E[a] == E);
    }
}

TEST_CASE("flatness residuals reproduce the Bianchi identities") {
    for (const std::string name : {"so3", "action_so3_R3", "lab_su2_R3", "tm_torsion_R2", "nonplain_tm_R2"}) {
        CAPTURE(name);
        Setup s(name, 3);
        Curvatures C = curvature_components(s.fx.spec, s.fx.adj, s.P, s.cfg.phi, s.cfg.A_g);
        s.cfg.A_M = C.E;
        s.cfg.B = C.F;
        FlatResiduals R = flat_residuals(s.fx.spec, s.fx.adj, s.P, s.cfg);
        BianchiResiduals B = bianchi_residuals(s.fx.spec, s.fx.adj, s.P, s.cfg.phi, s.cfg.A_g);
        CHECK(all_zero(R.phi));
        CHECK(all_zero(R.A_g));
        CHECK(all_zero(diff(R.A_M, B.E)));
        const bool covariant = name != "nonplain_tm_R2";
        CHECK(all_zero(diff(R.B, B.F)) == covariant);
    }
}

TEST_CASE("Bianchi identities and covariance on covariant fixtures") {
    for (const auto& name : kCovariant) {
        CAPTURE(name);
        Setup s(name, 3);
        auto c = generic_parameter(s.fx.spec, s.P, "c");
        BianchiResiduals B = bianchi_residuals(s.fx.spec, s.fx.adj, s.P, s.cfg.phi, s.cfg.A_g);
        CHECK(all_zero(B.E));
        CHECK(all_zero(B.F));
        CHECK(all_zero(covariance_check(s.fx.spec, s.fx.adj, s.P, s.cfg.phi, s.cfg.A_g, c)));
    }
}

TEST_CASE("covariance fails for the su(2) bundle without primitive") {
    Setup s("lab_su2_R3", 2);
    s.fx.adj.zeta = Tensor(s.fx.adj.zeta.dims());
    auto c = generic_parameter(s.fx.spec, s.P, "c");
    auto res = covariance_check(s.fx.spec, s.fx.adj, s.P, s.cfg.phi, s.cfg.A_g, c);
    CHECK_FALSE(all_zero(res));
}

TEST_CASE("displayed variations agree with linearized curvatures") {
    for (const auto& name : fixture_names()) {
        if (name == "broken_jacobi" || name == "monopole_S2") continue;
        CAPTURE(name);
        Setup s(name, 2);
        if (s.fx.numeric_only) continue;
        auto c = generic_parameter(s.fx.spec, s.P, "c");
        GaugeVariation V = gauge_variation(s.fx.spec, s.fx.adj, s.P, s.cfg.phi, s.cfg.A_g, c);
        CHECK(all_zero(diff(V.E, V.E_lin)));
        const bool covariant = check_covariant(s.fx.spec, s.fx.adj).reached(Tier::Covariant);
        CHECK(all_zero(diff(V.F, V.F_lin)) == covariant);
    }
}

TEST_CASE("truncated ghosts reproduce the gauge variation") {
    for (const std::string name : {"action_so3_R3", "nonplain_tm_R2", "tm_torsion_R2"}) {
        CAPTURE(name);
        Setup s(name, 2);
        GhostConfig g = GhostConfig::generic(s.fx.spec, s.P).truncated();
        Curvatures C = curvature_components(s.fx.spec, s.fx.adj, s.P, s.cfg.phi, s.cfg.A_g);
        s.cfg.A_M = C.E;
        s.cfg.B = C.F;
        FullVariation full = full_variation(s.fx.spec, s.fx.adj, s.P, s.cfg, g);
        GaugeVariation V = gauge_variation(s.fx.spec, s.fx.adj, s.P, s.cfg.phi, s.cfg.A_g, g.c_g);
        CHECK(all_zero(diff(full.A_g, V.A)));
        for (std::size_t a = 0; a < V.phi.size(); ++a) CHECK(full.phi[a] == V.phi[a]);
        CHECK(all_zero(diff(full.A_M, V.E_lin)));
        CHECK(all_zero(diff(full.B, V.F_lin)));
    }
}

TEST_CASE("ghost-for-ghost shifts lambda by -d chi") {
    Setup s("abelian", 3);
    GhostConfig g = GhostConfig::zero(s.fx.spec, s.P);
    g.chi = GhostConfig::generic(s.fx.spec, s.P).chi;
    FullVariation full = full_variation(s.fx.spec, s.fx.adj, s.P, s.cfg, g);
    REQUIRE(full.lambda.size() == 1);
    CHECK(full.lambda[0] == -s.P.d(g.chi[0]));
}

TEST_CASE("closure residual vanishes for plain adjustments") {
    for (const std::string name : {"so3", "abelian", "tangent", "action_so3_R3", "lab_su2_R3", "tm_torsion_R2",
                                   "nonstrict_tm_R3"}) {
        CAPTURE(name);
        Setup s(name, 2);
        auto c1 = generic_parameter(s.fx.spec, s.P, "c1_"), c2 = generic_parameter(s.fx.spec, s.P, "c2_");
        ClosureResult C = closure_residual(s.fx.spec, s.fx.adj, s.P, s.cfg.phi, s.cfg.A_g, c1, c2);
        CHECK(all_zero(C.residual));
        CHECK(all_zero(C.phi_residual));
    }
}

TEST_CASE("closure residual on the non-plain fixture is the basic curvature term") {
    Setup s("nonplain_tm_R2", 3);
    const auto& spec = s.fx.spec;
    auto c1 = generic_parameter(spec, s.P, "c1_"), c2 = generic_parameter(spec, s.P, "c2_");
    ClosureResult C = closure_residual(spec, s.fx.adj, s.P, s.cfg.phi, s.cfg.A_g, c1, c2);
    CHECK(all_zero(C.phi_residual));

    Tensor R = oracle::InvariantCurvature(spec, s.fx.adj).tensor();
    std::map<std::string, ScalarExpr> at;
    for (int a = 0; a < spec.dim(); ++a) at.emplace(spec.base.coords()[a], s.cfg.phi[a]);
    bool nonzero = false;
    for (int al = 0; al < spec.rank; ++al) {
        GradedElem expected(s.P.forms());
        for (int a = 0; a < spec.dim(); ++a) {
            GradedElem E = s.P.d(s.cfg.phi[a]);
            for (int ga = 0; ga < spec.rank; ++ga) E -= substitute(spec.rho(ga, a), at) * s.cfg.A_g[ga];
            for (int be = 0; be < spec.rank; ++be)
                for (int ga = 0; ga < spec.rank; ++ga)
                    expected -= (substitute(R(al, be, ga, a), at) * c1[be] * c2[ga]) * E;
        }
        CHECK(C.residual[al] == expected);
        nonzero = nonzero || !expected.is_zero();
    }
    CHECK(nonzero);
}

TEST_CASE("closure residual is antisymmetric and bilinear in the parameters") {
    Setup s("nonplain_tm_R2", 2);
    const auto& spec = s.fx.spec;
    auto p = generic_parameter(spec, s.P, "p"), q = generic_parameter(spec, s.P, "q"),
         t = generic_parameter(spec, s.P, "t");
    std::vector<ScalarExpr> pt;
    for (std::size_t i = 0; i < p.size(); ++i) pt.push_back(p[i] + Rational(3, 2) * t[i]);
    auto res = [&](const std::vector<ScalarExpr>& a, const std::vector<ScalarExpr>& b) {
        return closure_residual(spec, s.fx.adj, s.P, s.cfg.phi, s.cfg.A_g, a, b).residual;
    };
    auto pq = res(p, q), qp = res(q, p), tq = res(t, q), sum = res(pt, q);
    for (std::size_t al = 0; al < pq.size(); ++al) {
        CHECK(pq[al] == -qp[al]);
        CHECK(sum[al] == pq[al] + Rational(3, 2) * tq[al]);
    }
    CHECK(all_zero(res(p, p)));
}

TEST_CASE("imposing E = 0 removes first jets of phi") {
    Setup s("action_so3_R3", 2);
    Curvatures C = curvature_components(s.fx.spec, s.fx.adj, s.P, s.cfg.phi, s.cfg.A_g);
    for (int a = 0; a < 3; ++a)
        for (int mu = 0; mu < 2; ++mu)
            CHECK(impose_vanishing_E(s.P.component(C.E[a], mu), s.fx.spec, s.P, s.cfg.phi, s.cfg.A_g).is_zero());
}
