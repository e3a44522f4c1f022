#include <random>

#include "acw/adjust.hpp"
#include "acw/catalog.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace acw;

namespace {

const std::vector<std::string> kRationalFixtures = {"abelian",       "so3",           "su2",
                                                    "tangent",       "action_so3_R3", "lab_su2_R3",
                                                    "action_lab_su2", "tm_torsion_R2", "nonplain_tm_R2",
                                                    "nonstrict_tm_R3"};

// Constant primitive on TR^3 with entries in {-1, 0, 1}, pairs ordered (12, 13, 23).
std::array<std::array<int, 3>, 3> draw_zeta(std::mt19937_64& rng) {
    std::array<std::array<int, 3>, 3> z{};
    for (auto& row : z)
        for (auto& v : row) v = static_cast<int>(rng() % 3) - 1;
    return z;
}

AdjustmentData with_zeta(const AlgebroidSpec& s, const std::array<std::array<int, 3>, 3>& z) {
    const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    AdjustmentData adj = AdjustmentData::zero(s);
    for (int al = 0; al < 3; ++al)
        for (int k = 0; k < 3; ++k) {
            adj.zeta(al, pairs[k][0], pairs[k][1]) = z[al][k];
            adj.zeta(al, pairs[k][1], pairs[k][0]) = -z[al][k];
        }
    return adj;
}

}  // namespace

TEST_CASE("action algebroid with the Cartan connection is plain") {
    Fixture fx = instantiate("action_so3_R3");
    CHECK(check_plain(fx.spec, fx.adj).tier == Tier::Plain);
}

TEST_CASE("non-plain tangent connection reports the basic curvature") {
    Fixture fx = instantiate("nonplain_tm_R2");
    AdjustmentVerdict v = check_strict(fx.spec, fx.adj);
    CHECK(v.tier == Tier::None);
    const ConditionResult* plain = v.find("plain");
    REQUIRE(plain);
    CHECK_FALSE(plain->vanishes);
    CHECK_FALSE(plain->failing.empty());
    CHECK(plain->residual == oracle::InvariantCurvature(fx.spec, fx.adj).tensor());
}

TEST_CASE("su(2) bundle with adjoint connection and curvature primitive is strict") {
    Fixture fx = instantiate("lab_su2_R3");
    AdjustmentVerdict v = check_strict(fx.spec, fx.adj);
    CHECK(v.tier == Tier::Strict);
    CHECK(v.confidence == Confidence::Exact);
    CHECK_FALSE(derived_tensors(fx.spec, fx.adj).R_nabla.exact_zero());
}

TEST_CASE("su(2) bundle without primitive fails covariance by R_nabla") {
    Fixture fx = instantiate("lab_su2_R3");
    AdjustmentData bare = fx.adj;
    bare.zeta = Tensor(bare.zeta.dims());
    AdjustmentVerdict v = check_covariant(fx.spec, bare);
    CHECK(v.tier == Tier::Plain);
    CHECK(covariance_residual(fx.spec, bare) == derived_tensors(fx.spec, bare).R_nabla);
}

TEST_CASE("scaling the primitive by 2 keeps plain and breaks covariant") {
    Fixture fx = instantiate("lab_su2_R3");
    AdjustmentData scaled = fx.adj;
    scaled.zeta = scaled.zeta.scaled(2);
    CHECK(check_covariant(fx.spec, scaled).tier == Tier::Plain);
}

TEST_CASE("torsion primitive of a flat opposite connection is strict") {
    Fixture fx = instantiate("tm_torsion_R2");
    CHECK(check_strict(fx.spec, fx.adj).tier == Tier::Strict);
}

TEST_CASE("seeded search for a covariant but not strict constant primitive") {
    Fixture tangent = instantiate("tangent", {{"n", "3"}});
    std::mt19937_64 rng(1);
    std::optional<std::array<std::array<int, 3>, 3>> hit;
    for (int trial = 0; trial < 200 && !hit; ++trial) {
        auto z = draw_zeta(rng);
        AdjustmentVerdict v = check_strict(tangent.spec, with_zeta(tangent.spec, z));
        if (v.tier == Tier::Covariant) hit = z;
    }
    REQUIRE(hit);
    Fixture fx = instantiate("nonstrict_tm_R3");
    CHECK(fx.adj.zeta == with_zeta(tangent.spec, *hit).zeta);

    AdjustmentVerdict v = check_strict(fx.spec, fx.adj);
    CHECK(v.tier == Tier::Covariant);
    const ConditionResult* strict = v.find("strict");
    REQUIRE(strict);
    CHECK_FALSE(strict->failing.empty());
}

TEST_CASE("strictness normalizations and the nabla-zeta cross-check differ by the fixed factor") {
    for (const auto& name : kRationalFixtures) {
        CAPTURE(name);
        Fixture fx = instantiate(name);
        Tensor S = strict_residual(fx.spec, fx.adj);
        CHECK(strict_residual_definition(fx.spec, fx.adj) == S.scaled(6));
        CHECK(nabla_zeta_crosscheck(fx.spec, fx.adj) == S.scaled(strict_crosscheck_factor));
    }
    Fixture ns = instantiate("nonstrict_tm_R3");
    CHECK_FALSE(strict_residual(ns.spec, ns.adj).exact_zero());
    Fixture lab = instantiate("lab_su2_R3");
    CHECK(nabla_zeta_crosscheck(lab.spec, lab.adj).exact_zero());
}

TEST_CASE("tiers are monotone on random instances") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        CAPTURE(seed);
        Fixture fx = random_instance(seed);
        AdjustmentVerdict p = check_plain(fx.spec, fx.adj);
        AdjustmentVerdict c = check_covariant(fx.spec, fx.adj);
        AdjustmentVerdict s = check_strict(fx.spec, fx.adj);
        if (s.reached(Tier::Strict)) CHECK(c.reached(Tier::Covariant));
        if (c.reached(Tier::Covariant)) CHECK(p.reached(Tier::Plain));
        CHECK(p.reached(Tier::Plain) == s.reached(Tier::Plain));
        CHECK(c.reached(Tier::Covariant) == s.reached(Tier::Covariant));
    }
}

TEST_CASE("tier names") {
    CHECK(to_string(Tier::None) == "none");
    CHECK(to_string(Tier::Strict) == "strict");
    CHECK(to_string(Confidence::Numeric) == "numeric");
}

TEST_CASE("pointwise residuals match the symbolic tensors") {
    std::vector<Fixture> fixtures;
    for (const auto& name : kRationalFixtures) fixtures.push_back(instantiate(name));
    for (std::uint64_t seed = 1; seed <= 10; ++seed) fixtures.push_back(random_instance(seed));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (const auto& fx : fixtures) {
        CAPTURE(fx.name);
        if (!fx.expected.valid) continue;
        const DerivedTensors T = derived_tensors(fx.spec, fx.adj);
        const Tensor sym[3] = {T.Rbas, T.R_nabla + T.nabla_bas_zeta, strict_residual(fx.spec, fx.adj)};
        for (int k = 0; k < 3; ++k) {
            NumericPoint p;
            for (const auto& c : fx.spec.base.coords()) p.coords[c] = u(rng);
            const PointResiduals pr = tier_residuals_at(fx.spec, fx.adj, p);
            const std::vector<double>* num[3] = {&pr.plain, &pr.covariant, &pr.strict};
            for (int t = 0; t < 3; ++t) {
                REQUIRE(num[t]->size() == sym[t].size());
                for (std::size_t i = 0; i < sym[t].size(); ++i)
                    CHECK((*num[t])[i] == doctest::Approx(eval(sym[t].data()[i], p)).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("sampled tiers agree with the exact tiers") {
    for (const auto& name : kRationalFixtures) {
        CAPTURE(name);
        Fixture fx = instantiate(name);
        if (!fx.expected.valid) continue;
        CHECK(check_strict_sampled(fx.spec, fx.adj).tier == check_strict(fx.spec, fx.adj).tier);
    }
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        CAPTURE(seed);
        Fixture fx = random_instance(seed);
        AdjustmentVerdict s = check_strict_sampled(fx.spec, fx.adj);
        CHECK(s.tier == check_strict(fx.spec, fx.adj).tier);
        CHECK(s.confidence == Confidence::Numeric);
    }
}

TEST_CASE("the octonion sphere is plain but not covariant") {
    Fixture fx = instantiate("octonion_S7");
    CHECK(fx.numeric_only);
    CHECK(fx.spec.rank == 7);
    SampleOptions o;
    o.points = 5;
    AdjustmentVerdict v = check_strict_sampled(fx.spec, fx.adj, o);
    CHECK(v.tier == Tier::Plain);
    const ConditionResult* cov = v.find("covariant");
    REQUIRE(cov);
    CHECK_FALSE(cov->vanishes);
    CHECK(v.find("plain")->vanishes);

    AdjustmentVerdict flat = check_strict_sampled(fx.spec, AdjustmentData::zero(fx.spec), o);
    CHECK(flat.tier == Tier::None);
}
