// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "acw/catalog.hpp"
#include "acw/gauge.hpp"
#include "oracles.hpp"

using namespace acw;

namespace {

// Pinned tolerances and budgets.
constexpr double kCe_seconds = 10.0;
constexpr double kWeil_seconds = 300.0;
constexpr double kBianchi_seconds = 60.0;
constexpr double kCech_seconds = 5.0;
constexpr double kCech_residual = 1e-9;
constexpr int kCech_points = 1000;
constexpr double kChern_tol = 1e-6;
constexpr int kFd_points = 50;
constexpr double kFd_rel = 1e-6;
constexpr int kWeil_instances = 100;
constexpr int kOracle_instances = 50;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

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

bool rational(const Fixture& fx) {
    for (const Tensor* t : {&fx.spec.anchor, &fx.spec.bracket, &fx.adj.omega, &fx.adj.zeta})
        for (const auto& e : t->data())
            if (!e.is_rational_function()) return false;
    return true;
}

struct Result {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (ok) return;
        pass = false;
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

Result ce_nilpotency() {
    Result r;
    std::vector<std::pair<std::string, Params>> cases = {{"so3", {}}, {"su2", {}}, {"action_so3_R3", {}},
                                                         {"lab_su2_R3", {}}};
    for (int k = 1; k <= 4; ++k) cases.push_back({"abelian", {{"r", std::to_string(k)}}});
    for (int n = 1; n <= 3; ++n) cases.push_back({"tangent", {{"n", std::to_string(n)}}});
    double worst = 0;
    for (const auto& [name, params] : cases) {
        auto t0 = Clock::now();
        Fixture fx = instantiate(name, params);
        SquareReport sq = square_check(build_ce(fx.spec));
        double s = seconds_since(t0);
        worst = std::max(worst, s);
        r.require(sq.exact(), name + " not ExactZero");
        r.require(s < kCe_seconds, name + " took " + fmt("%.2fs", s));
    }
    SquareReport broken = square_check(build_ce(instantiate("broken_jacobi").spec));
    bool nonzero = false;
    for (const auto* f : broken.failures()) nonzero = nonzero || f->verdict.kind == ZeroKind::NonZero;
    r.require(nonzero, "broken_jacobi has no NonZero residual");
    if (r.pass) r.detail = std::to_string(cases.size()) + " fixtures exact, slowest " + fmt("%.2fs", worst);
    return r;
}

Result weil_nilpotency() {
    Result r;
    auto t0 = Clock::now();
    int exact = 0;
    for (std::uint64_t seed = 1; seed <= kWeil_instances; ++seed) {
        Fixture fx = random_instance(seed);
        SquareReport sq = square_check(build_weil(fx.spec, fx.adj, WeilPresentation::Shifted, false).differential);
        if (sq.exact())
            ++exact;
        else
            r.require(false, "seed " + std::to_string(seed));
    }
    double s = seconds_since(t0);
    r.require(s < kWeil_seconds, "took " + fmt("%.1fs", s));
    if (r.pass) r.detail = std::to_string(exact) + " instances exact in " + fmt("%.1fs", s);
    return r;
}

Result oracle_pair() {
    Result r;
    int checked = 0;
    for (std::uint64_t seed = 1; checked < kOracle_instances; ++seed) {
        Fixture fx = random_instance(seed);
        if (!rational(fx)) continue;
        ++checked;
        Tensor coordinate = derived_tensors(fx.spec, fx.adj).Rbas;
        r.require(coordinate == oracle::InvariantCurvature(fx.spec, fx.adj).tensor(), "seed " + std::to_string(seed));
    }
    if (r.pass) r.detail = std::to_string(checked) + " instances identical";
    return r;
}

Result point_reduction() {
    Result r;
    Fixture fx = instantiate("su2");
    PatchSpec P(4);
    auto cfg = PatchFieldConfig::generic(fx.spec, P);
    auto c = generic_parameter(fx.spec, P, "c");
    const auto& f = fx.spec.bracket;
    const auto& A = cfg.A_g;
    r.require(fx.adj.omega.exact_zero() && fx.adj.zeta.exact_zero(), "adjustment not zero");
    Curvatures C = curvature_components(fx.spec, fx.adj, P, cfg.phi, A);
    GaugeVariation V = gauge_variation(fx.spec, fx.adj, P, cfg.phi, A, c);
    for (int al = 0; al < 3; ++al) {
        GradedElem F = P.d(A[al]), dA = P.d(c[al]), dF = P.zero();
        for (int be = 0; be < 3; ++be)
            for (int ga = 0; ga < 3; ++ga) {
                F += (Rational(1, 2) * f(al, be, ga)) * (A[be] * A[ga]);
                dA += (f(al, be, ga) * A[be]) * c[ga];
                dF += (f(al, be, ga) * C.F[be]) * c[ga];
            }
        r.require((C.F[al] - F).is_zero(), "F");
        r.require((V.A[al] - dA).is_zero(), "delta A");
        r.require((V.F_lin[al] - dF).is_zero(), "delta F");
    }
    if (r.pass) r.detail = "F, delta A, delta F exact on a 4-dim patch";
    return r;
}

Result closure() {
    Result r;
    PatchSpec P(3);
    int plain = 0;
    for (const auto& name : fixture_names()) {
        Fixture fx = instantiate(name);
        if (fx.cover || !fx.expected.valid || fx.numeric_only) continue;
        if (!check_plain(fx.spec, fx.adj).reached(Tier::Plain)) continue;
        auto cfg = PatchFieldConfig::generic(fx.spec, P);
        auto c1 = generic_parameter(fx.spec, P, "c1_"), c2 = generic_parameter(fx.spec, P, "c2_");
        ClosureResult C = closure_residual(fx.spec, fx.adj, P, cfg.phi, cfg.A_g, c1, c2);
        r.require(all_zero(C.residual) && all_zero(C.phi_residual), name);
        ++plain;
    }

    Fixture fx = instantiate("nonplain_tm_R2");
    const auto& spec = fx.spec;
    auto cfg = PatchFieldConfig::generic(spec, P);
    auto c1 = generic_parameter(spec, P, "c1_"), c2 = generic_parameter(spec, P, "c2_");
    ClosureResult C = closure_residual(spec, fx.adj, P, cfg.phi, cfg.A_g, c1, c2);
    Tensor R = oracle::InvariantCurvature(spec, fx.adj).tensor();
    std::map<std::string, ScalarExpr> at;
    for (int a = 0; a < spec.dim(); ++a) at.emplace(spec.base.coords()[a], cfg.phi[a]);
    bool nonzero = false;
    for (int al = 0; al < spec.rank; ++al) {
        GradedElem expected = P.zero();
        for (int a = 0; a < spec.dim(); ++a) {
            GradedElem E = P.d(cfg.phi[a]);
            for (int ga = 0; ga < spec.rank; ++ga) E -= substitute(spec.rho(ga, a), at) * cfg.A_g[ga];
            for (int be = 0; be < spec.rank; ++be)
                for (int ga = 0; ga < spec.rank; ++ga)
                    expected += (ScalarExpr(closure_factor) * substitute(R(al, be, ga, a), at) * c1[be] * c2[ga]) * E;
        }
        r.require(C.residual[al] == expected, "nonplain_tm_R2 component " + std::to_string(al + 1));
        nonzero = nonzero || !expected.is_zero();
    }
    r.require(nonzero, "nonplain term vanished");
    if (r.pass) r.detail = std::to_string(plain) + " plain fixtures zero, nonplain term matches";
    return r;
}

Result bianchi() {
    Result r;
    double worst = 0;
    for (const std::string name : {"action_so3_R3", "lab_su2_R3"})
        for (int dim = 1; dim <= 4; ++dim) {
            auto t0 = Clock::now();
            Fixture fx = instantiate(name);
            PatchSpec P(dim);
            auto cfg = PatchFieldConfig::generic(fx.spec, P);
            auto c = generic_parameter(fx.spec, P, "c");
            BianchiResiduals B = bianchi_residuals(fx.spec, fx.adj, P, cfg.phi, cfg.A_g);
            bool ok = all_zero(B.E) && all_zero(B.F) && all_zero(covariance_check(fx.spec, fx.adj, P, cfg.phi, cfg.A_g, c));
            double s = seconds_since(t0);
            worst = std::max(worst, s);
            r.require(ok, name + " patch " + std::to_string(dim));
            r.require(s < kBianchi_seconds, name + " took " + fmt("%.1fs", s));
        }
    if (r.pass) r.detail = "patch dims 1..4 exact, slowest " + fmt("%.2fs", worst);
    return r;
}

Result tiers() {
    Result r;
    Fixture lab = instantiate("lab_su2_R3"), tm = instantiate("tm_torsion_R2"), ns = instantiate("nonstrict_tm_R3");
    r.require(check_strict(lab.spec, lab.adj).tier == Tier::Strict, "lab_su2_R3 not strict");
    r.require(check_strict(tm.spec, tm.adj).tier == Tier::Strict, "tm_torsion_R2 not strict");
    r.require(check_strict(ns.spec, ns.adj).tier == Tier::Covariant, "nonstrict_tm_R3 not exactly covariant");
    Tensor S = strict_residual(ns.spec, ns.adj);
    r.require(!S.exact_zero(), "nonstrict residual vanished");
    r.require(nabla_zeta_crosscheck(ns.spec, ns.adj) == S.scaled(strict_crosscheck_factor), "cross-check factor");
    if (r.pass) r.detail = "cross-check = " + std::to_string(strict_crosscheck_factor) + " x strict residual";
    return r;
}

Result cech() {
    Result r;
    double worst = 0, worst_res = 0, worst_dev = 0;
    CocycleOptions opts;
    opts.samples = kCech_points;
    for (long n = -2; n <= 2; ++n) {
        auto t0 = Clock::now();
        Fixture fx = instantiate("monopole_S2", {{"n", std::to_string(n)}});
        CocycleVerdict c = verify_cocycle(*fx.cover, *fx.transitions, opts);
        CocycleVerdict g = glue_check(*fx.cover, *fx.transitions, opts);
        ChernResult ch = chern_number(*fx.cover, *fx.transitions);
        double s = seconds_since(t0);
        const std::string tag = "n=" + std::to_string(n);
        double res = std::max(c.max_residual, g.max_residual), dev = std::abs(ch.value - static_cast<double>(n));
        r.require(c.passed && g.passed && res < kCech_residual, tag + " residual " + fmt("%.2e", res));
        r.require(dev < kChern_tol, tag + " chern " + fmt("%.9f", ch.value));
        r.require(s < kCech_seconds, tag + " took " + fmt("%.2fs", s));
        worst = std::max(worst, s);
        worst_res = std::max(worst_res, res);
        worst_dev = std::max(worst_dev, dev);
    }
    if (r.pass)
        r.detail = "max residual " + fmt("%.1e", worst_res) + ", max chern deviation " + fmt("%.1e", worst_dev) +
                   ", slowest " + fmt("%.2fs", worst);
    return r;
}

Result derivative_integrity() {
    Result r;
    SpotOptions opts;
    opts.points = kFd_points;
    opts.derivative_tol = kFd_rel;
    int checks = 0;
    double worst = 0;
    auto audit = [&](const Fixture& fx, const std::string& tag) {
        SpotReport s = spot_check(fx, 1, opts);
        checks += s.derivative_checks;
        worst = std::max(worst, s.max_derivative_error);
        r.require(s.derivative_failures == 0 && s.max_derivative_error < kFd_rel, tag);
    };
    for (const auto& name : fixture_names()) audit(instantiate(name), name);
    for (int k = 1; k <= 4; ++k) audit(instantiate("abelian", {{"r", std::to_string(k)}}), "abelian");
    for (int n = 1; n <= 3; ++n) audit(instantiate("tangent", {{"n", std::to_string(n)}}), "tangent");
    for (long n = -2; n <= 2; ++n) audit(instantiate("monopole_S2", {{"n", std::to_string(n)}}), "monopole_S2");
    for (std::uint64_t seed = 1; seed <= kWeil_instances; ++seed)
        audit(random_instance(seed), "random " + std::to_string(seed));
    if (r.pass) r.detail = std::to_string(checks) + " partials, max rel error " + fmt("%.1e", worst);
    return r;
}

Result pullback() {
    Result r;
    int implications = 0;
    auto probe = [&](const std::string& name, const std::function<void(AdjustmentData&)>& tweak) {
        Fixture fx = instantiate(name);
        AdjustmentData base = *fx.base_adj;
        tweak(base);
        AdjustmentVerdict b = check_covariant(*fx.base_spec, base);
        int base_dim = fx.base_spec->dim(), fiber_dim = fx.spec.dim() - base_dim;
        std::vector<std::string> fiber_coords(fx.spec.base.coords().begin() + base_dim, fx.spec.base.coords().end());
        ChartSpec fiber(fx.spec.base.name() + "_fiber", fiber_coords);
        Tensor anchor({fx.spec.rank, fiber_dim});
        for (int al = 0; al < fx.spec.rank; ++al)
            for (int i = 0; i < fiber_dim; ++i) anchor(al, i) = fx.spec.rho(al, base_dim + i);
        ActionPullback pb = pullback_to_action(*fx.base_spec, base, fiber, anchor);
        AdjustmentVerdict p = check_covariant(pb.spec, pb.adj);
        r.require(b.confidence == Confidence::Exact && p.confidence == Confidence::Exact, name + " not exact");
        if (b.reached(Tier::Covariant)) {
            ++implications;
            r.require(p.reached(Tier::Covariant), name + " pullback lost covariance");
        }
    };
    auto keep = [](AdjustmentData&) {};
    probe("action_so3_R3", keep);
    probe("action_lab_su2", keep);
    probe("action_lab_su2", [](AdjustmentData& a) { a.zeta = a.zeta.scaled(2); });
    probe("action_lab_su2", [](AdjustmentData& a) { a.zeta = Tensor(a.zeta.dims()); });
    probe("action_so3_R3", [](AdjustmentData& a) { a.zeta = Tensor(a.zeta.dims()); });
    Fixture so3 = instantiate("action_so3_R3"), lab = instantiate("action_lab_su2");
    r.require(check_covariant(so3.spec, so3.adj).reached(Tier::Covariant), "action_so3_R3 fixture");
    r.require(check_covariant(lab.spec, lab.adj).reached(Tier::Covariant), "action_lab_su2 fixture");
    if (r.pass) r.detail = std::to_string(implications) + " covariant base data stay covariant after pullback";
    return r;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
        {"CE nilpotency on the catalog", ce_nilpotency},
        {"Weil nilpotency on random instances", weil_nilpotency},
        {"basic curvature oracle pair", oracle_pair},
        {"ordinary gauge theory over a point", point_reduction},
        {"closure of gauge transformations", closure},
        {"Bianchi identities and covariance", bianchi},
        {"adjustment tiers", tiers},
        {"Cech cocycles and Chern numbers", cech},
        {"derivative integrity", derivative_integrity},
        {"pullback to action algebroids", pullback},
    };
    int failed = 0, k = 0;
    for (const auto& [name, fn] : criteria) {
        ++k;
        auto t0 = Clock::now();
        Result r;
        try {
            r = fn();
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        std::printf("%s %2d %s (%.1fs): %s\n", r.pass ? "PASS" : "FAIL", k, name.c_str(), seconds_since(t0),
                    r.detail.c_str());
        std::fflush(stdout);
        failed += r.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
