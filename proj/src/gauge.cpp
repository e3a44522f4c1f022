#include "acw/gauge.hpp"

namespace acw {

// ---- patch ----------------------------------------------------------------

PatchSpec::PatchSpec(int dim, std::string prefix) : chart_(ChartSpec::numbered("patch", prefix, dim)) {
    if (dim < 1) throw Error("patch dimension must be at least 1");
    std::vector<Generator> g;
    for (int mu = 1; mu <= dim; ++mu) g.push_back({"d" + prefix + std::to_string(mu), 1, 1, 0});
    gs_ = make_generators(chart_, std::move(g));
    d_.gs = gs_;
    d_.degree = 1;
    d_.gen_images.assign(gs_->size(), GradedElem(gs_));
    for (int mu = 0; mu < dim; ++mu) d_.coord_images.push_back(dx(mu));
    d_.validate();
}

GradedElem PatchSpec::one_form(const std::vector<ScalarExpr>& comps) const {
    if (static_cast<int>(comps.size()) != dim()) throw Error("1-form needs one component per patch coordinate");
    GradedElem r = zero();
    for (int mu = 0; mu < dim(); ++mu) r += comps[mu] * dx(mu);
    return r;
}

ScalarExpr PatchSpec::component(const GradedElem& form, int mu) const {
    Exponents m(gs_->size(), 0);
    m[mu] = 1;
    return form.coefficient(m);
}

ScalarExpr PatchSpec::component(const GradedElem& form, int mu, int nu) const {
    if (mu == nu) return {};
    Exponents m(gs_->size(), 0);
    m[mu] = 1;
    m[nu] = 1;
    ScalarExpr c = form.coefficient(m);
    return mu < nu ? c : -c;
}

ScalarExpr PatchSpec::scalar_part(const GradedElem& e) const { return e.coefficient(Exponents(gs_->size(), 0)); }

GradedElem PatchSpec::d(const GradedElem& e) const { return apply_derivation(d_, e); }
GradedElem PatchSpec::d(const ScalarExpr& f) const { return apply_derivation(d_, f); }

ScalarExpr PatchSpec::field(const std::string& name) const {
    std::vector<ScalarExpr> args;
    for (const auto& c : chart_.coords()) args.push_back(ScalarExpr::coord(c));
    return ScalarExpr::opaque(name, std::move(args));
}

// ---- configurations ----------------------------------------------------------

namespace {

std::string idx(int i) { return std::to_string(i + 1); }

GradedElem generic_one_form(const PatchSpec& patch, const std::string& stem) {
    GradedElem r = patch.zero();
    for (int mu = 0; mu < patch.dim(); ++mu) r += patch.field(stem + "_" + idx(mu)) * patch.dx(mu);
    return r;
}

GradedElem generic_two_form(const PatchSpec& patch, const std::string& stem) {
    GradedElem r = patch.zero();
    for (int mu = 0; mu < patch.dim(); ++mu)
        for (int nu = mu + 1; nu < patch.dim(); ++nu)
            r += patch.field(stem + "_" + idx(mu) + "_" + idx(nu)) * (patch.dx(mu) * patch.dx(nu));
    return r;
}

}  // namespace

PatchFieldConfig PatchFieldConfig::generic(const AlgebroidSpec& spec, const PatchSpec& patch) {
    PatchFieldConfig c;
    for (int a = 0; a < spec.dim(); ++a) {
        c.phi.push_back(patch.field("phi" + idx(a)));
        c.A_M.push_back(generic_one_form(patch, "AM" + idx(a)));
    }
    for (int al = 0; al < spec.rank; ++al) {
        c.A_g.push_back(generic_one_form(patch, "A" + idx(al)));
        c.B.push_back(generic_two_form(patch, "B" + idx(al)));
    }
    return c;
}

std::vector<ScalarExpr> generic_parameter(const AlgebroidSpec& spec, const PatchSpec& patch,
                                          const std::string& prefix) {
    std::vector<ScalarExpr> c;
    for (int al = 0; al < spec.rank; ++al) c.push_back(patch.field(prefix + idx(al)));
    return c;
}

GhostConfig GhostConfig::generic(const AlgebroidSpec& spec, const PatchSpec& patch) {
    GhostConfig g;
    g.c_g = generic_parameter(spec, patch, "c");
    g.chi = generic_parameter(spec, patch, "chi");
    for (int a = 0; a < spec.dim(); ++a) g.c_M.push_back(patch.field("cM" + idx(a)));
    for (int al = 0; al < spec.rank; ++al) g.lambda.push_back(generic_one_form(patch, "lam" + idx(al)));
    return g;
}

GhostConfig GhostConfig::zero(const AlgebroidSpec& spec, const PatchSpec& patch) {
    GhostConfig g;
    g.c_g.assign(spec.rank, ScalarExpr());
    g.chi.assign(spec.rank, ScalarExpr());
    g.c_M.assign(spec.dim(), ScalarExpr());
    g.lambda.assign(spec.rank, patch.zero());
    return g;
}

GhostConfig GhostConfig::truncated() const {
    GhostConfig g = *this;
    for (auto& x : g.c_M) x = ScalarExpr();
    for (auto& x : g.chi) x = ScalarExpr();
    for (auto& x : g.lambda) x = GradedElem(x.gens());
    return g;
}

// ---- pullback along phi --------------------------------------------------------

PulledBack::PulledBack(const AlgebroidSpec& spec, const AdjustmentData& adj, const std::vector<ScalarExpr>& phi) {
    if (static_cast<int>(phi.size()) != spec.dim()) throw Error("phi needs one component per base coordinate");
    const int r = spec.rank, n = spec.dim();
    const auto& coords = spec.base.coords();
    std::map<std::string, ScalarExpr> at;
    for (int a = 0; a < n; ++a) at.emplace(coords[a], phi[a]);
    auto pull = [&](const ScalarExpr& e) { return substitute(e, at); };

    const auto T = derived_tensors(spec, adj);
    rho = spec.anchor.map(pull);
    f = spec.bracket.map(pull);
    omega = adj.omega.map(pull);
    zeta = adj.zeta.map(pull);
    Rbas = T.Rbas.map(pull);
    Rcov = (T.R_nabla + T.nabla_bas_zeta).map(pull);
    nabla_zeta = T.nabla_zeta.map(pull);

    drho = Tensor({r, n, n});
    for (int al = 0; al < r; ++al)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) drho(al, a, b) = pull(differentiate(spec.rho(al, a), coords[b]));

    const ScalarExpr half(Rational(1, 2)), sixth(Rational(1, 6));
    cubic = Tensor({r, n, n, n});
    for (int al = 0; al < r; ++al)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) {
                    ScalarExpr k = sixth * T.dnabla_zeta(al, a, b, c);
                    for (int d = 0; d < n; ++d)
                        for (int be = 0; be < r; ++be)
                            k -= half * adj.zeta(al, a, d) * spec.rho(be, d) * adj.zeta(be, b, c);
                    cubic(al, a, b, c) = pull(k);
                }
}

namespace {

void check_fields(const AlgebroidSpec& spec, const std::vector<ScalarExpr>& phi, const std::vector<GradedElem>& A) {
    if (static_cast<int>(phi.size()) != spec.dim()) throw Error("phi has the wrong number of components");
    if (static_cast<int>(A.size()) != spec.rank) throw Error("A has the wrong number of components");
}

// K^alpha_{beta gamma} = f^alpha_{beta gamma} + r^a_gamma omega^alpha_{a beta}
ScalarExpr K(const PulledBack& P, int al, int be, int ga, int n) {
    ScalarExpr k = P.f(al, be, ga);
    for (int a = 0; a < n; ++a) k += P.rho(ga, a) * P.omega(al, a, be);
    return k;
}

}  // namespace

Curvatures curvature_components(const AlgebroidSpec& spec, const AdjustmentData& adj, const PatchSpec& patch,
                                const std::vector<ScalarExpr>& phi, const std::vector<GradedElem>& A) {
    check_fields(spec, phi, A);
    const int r = spec.rank, n = spec.dim();
    PulledBack P(spec, adj, phi);
    const ScalarExpr half(Rational(1, 2));
    Curvatures C;
    for (int a = 0; a < n; ++a) {
        GradedElem e = patch.d(phi[a]);
        for (int al = 0; al < r; ++al) e -= P.rho(al, a) * A[al];
        C.E.push_back(e);
    }
    for (int al = 0; al < r; ++al) {
        GradedElem F = patch.d(A[al]);
        for (int be = 0; be < r; ++be)
            for (int ga = 0; ga < r; ++ga)
                if (!P.f(al, be, ga).is_zero()) F += (half * P.f(al, be, ga)) * (A[be] * A[ga]);
        for (int a = 0; a < n; ++a)
            for (int be = 0; be < r; ++be)
                if (!P.omega(al, a, be).is_zero()) F += P.omega(al, a, be) * (C.E[a] * A[be]);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (!P.zeta(al, a, b).is_zero()) F += (half * P.zeta(al, a, b)) * (C.E[a] * C.E[b]);
        C.F.push_back(F);
    }
    return C;
}

FlatResiduals flat_residuals(const AlgebroidSpec& spec, const AdjustmentData& adj, const PatchSpec& patch,
                             const PatchFieldConfig& cfg) {
    check_fields(spec, cfg.phi, cfg.A_g);
    if (static_cast<int>(cfg.A_M.size()) != spec.dim() || static_cast<int>(cfg.B.size()) != spec.rank)
        throw Error("field configuration has the wrong number of components");
    const WeilAlgebra W = build_weil(spec, adj, WeilPresentation::Shifted, false);
    std::map<std::string, ScalarExpr> at;
    for (int a = 0; a < spec.dim(); ++a) at.emplace(spec.base.coords()[a], cfg.phi[a]);
    auto coeff = [&](const ScalarExpr& e) { return substitute(e, at); };
    std::vector<GradedElem> images(W.gs->size());
    for (int al = 0; al < spec.rank; ++al) {
        images[W.xi[al]] = cfg.A_g[al];
        images[W.xibar[al]] = cfg.B[al];
    }
    for (int a = 0; a < spec.dim(); ++a) images[W.mbar[a]] = cfg.A_M[a];
    auto Phi = [&](const GradedElem& e) { return apply_morphism(e, patch.forms(), coeff, images); };
    const auto& D = W.differential;

    FlatResiduals R;
    for (int a = 0; a < spec.dim(); ++a) R.phi.push_back(patch.d(cfg.phi[a]) - Phi(D.coord_images[a]));
    for (int a = 0; a < spec.dim(); ++a) {
        std::size_t g = W.mbar[a];
        R.A_M.push_back(patch.d(images[g]) - Phi(D.gen_images[g]));
    }
    for (int al = 0; al < spec.rank; ++al) {
        std::size_t g = W.xi[al];
        R.A_g.push_back(patch.d(images[g]) - Phi(D.gen_images[g]));
    }
    for (int al = 0; al < spec.rank; ++al) {
        std::size_t g = W.xibar[al];
        R.B.push_back(patch.d(images[g]) - Phi(D.gen_images[g]));
    }
    return R;
}

BianchiResiduals bianchi_residuals(const AlgebroidSpec& spec, const AdjustmentData& adj, const PatchSpec& patch,
                                   const std::vector<ScalarExpr>& phi, const std::vector<GradedElem>& A) {
    const int r = spec.rank, n = spec.dim();
    const Curvatures C = curvature_components(spec, adj, patch, phi, A);
    PulledBack P(spec, adj, phi);
    const ScalarExpr half(Rational(1, 2));
    BianchiResiduals B;
    for (int a = 0; a < n; ++a) {
        GradedElem res = patch.d(C.E[a]);
        for (int al = 0; al < r; ++al) {
            if (P.rho(al, a).is_zero()) continue;
            GradedElem inner = C.F[al];
            for (int b = 0; b < n; ++b) {
                for (int be = 0; be < r; ++be)
                    if (!P.omega(al, b, be).is_zero()) inner -= P.omega(al, b, be) * (C.E[b] * A[be]);
                for (int c = 0; c < n; ++c)
                    if (!P.zeta(al, b, c).is_zero()) inner -= (half * P.zeta(al, b, c)) * (C.E[b] * C.E[c]);
            }
            res += P.rho(al, a) * inner;
        }
        for (int al = 0; al < r; ++al)
            for (int b = 0; b < n; ++b)
                if (!P.drho(al, a, b).is_zero()) res -= P.drho(al, a, b) * (A[al] * C.E[b]);
        B.E.push_back(res);
    }
    for (int al = 0; al < r; ++al) {
        GradedElem res = patch.d(C.F[al]);
        for (int be = 0; be < r; ++be)
            for (int ga = 0; ga < r; ++ga) {
                ScalarExpr k = K(P, al, be, ga, n);
                if (!k.is_zero()) res += k * (A[be] * C.F[ga]);
            }
        for (int a = 0; a < n; ++a)
            for (int be = 0; be < r; ++be)
                if (!P.nabla_zeta(al, a, be).is_zero()) res += P.nabla_zeta(al, a, be) * (C.E[a] * C.F[be]);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    if (!P.cubic(al, a, b, c).is_zero()) res -= P.cubic(al, a, b, c) * (C.E[a] * C.E[b] * C.E[c]);
        B.F.push_back(res);
    }
    return B;
}

// ---- variations -------------------------------------------------------------------

FieldVariation::FieldVariation(const PatchSpec& patch) : patch_(patch) {
    D_.gs = patch.forms();
    D_.degree = 0;
    D_.coord_images.assign(patch.dim(), patch.zero());
    D_.gen_images.assign(patch.forms()->size(), patch.zero());
    D_.atom_image = [this](AtomId t) -> std::optional<GradedElem> {
        const auto& info = atom_info(t);
        if (info.kind != AtomKind::Opaque) return std::nullopt;
        auto it = vars_.find(info.name);
        if (it == vars_.end()) return std::nullopt;
        if (auto m = memo_.find(t); m != memo_.end()) return m->second;
        const auto& coords = patch_.chart().coords();
        if (info.args.size() != coords.size()) throw Error("field " + info.name + " is not a patch field");
        for (std::size_t k = 0; k < coords.size(); ++k)
            if (info.args[k] != ScalarExpr::coord(coords[k]))
                throw Error("field " + info.name + " must be evaluated at the patch coordinates");
        ScalarExpr v = it->second;
        for (int k : info.partials) v = differentiate(v, coords[k]);
        GradedElem img = patch_.scalar(v);
        memo_.emplace(t, img);
        return img;
    };
}

void FieldVariation::set(const ScalarExpr& field, const ScalarExpr& variation) {
    auto atoms = top_atoms(field);
    if (atoms.size() != 1 || field != ScalarExpr::opaque(atom_info(atoms[0]).name, atom_info(atoms[0]).args,
                                                         atom_info(atoms[0]).partials))
        throw Error("variations need opaque fields, got " + field.str());
    const auto& info = atom_info(atoms[0]);
    if (info.kind != AtomKind::Opaque || !info.partials.empty())
        throw Error("variations need opaque fields, got " + field.str());
    vars_[info.name] = variation;
    memo_.clear();
}

void FieldVariation::set_form(const GradedElem& field, const GradedElem& variation) {
    for (const auto& [m, c] : field.terms()) set(c, variation.coefficient(m));
}

ScalarExpr FieldVariation::apply(const ScalarExpr& e) const {
    return patch_.scalar_part(apply_derivation(D_, e));
}

GradedElem FieldVariation::apply(const GradedElem& e) const { return apply_derivation(D_, e); }

namespace {

GaugeVariation basic_variation(const AlgebroidSpec& spec, const PulledBack& P, const PatchSpec& patch,
                               const Curvatures& C, const std::vector<GradedElem>& A,
                               const std::vector<ScalarExpr>& c) {
    const int r = spec.rank, n = spec.dim();
    if (static_cast<int>(c.size()) != r) throw Error("gauge parameter has the wrong number of components");
    GaugeVariation V;
    for (int a = 0; a < n; ++a) {
        ScalarExpr s;
        for (int al = 0; al < r; ++al) s += P.rho(al, a) * c[al];
        V.phi.push_back(s);
    }
    for (int al = 0; al < r; ++al) {
        GradedElem s = patch.d(c[al]);
        for (int be = 0; be < r; ++be)
            for (int ga = 0; ga < r; ++ga)
                if (!P.f(al, be, ga).is_zero()) s += (P.f(al, be, ga) * c[ga]) * A[be];
        for (int a = 0; a < n; ++a)
            for (int be = 0; be < r; ++be)
                if (!P.omega(al, a, be).is_zero()) s += (P.omega(al, a, be) * c[be]) * C.E[a];
        V.A.push_back(s);
    }
    return V;
}

}  // namespace

GaugeVariation gauge_variation(const AlgebroidSpec& spec, const AdjustmentData& adj, const PatchSpec& patch,
                               const std::vector<ScalarExpr>& phi, const std::vector<GradedElem>& A,
                               const std::vector<ScalarExpr>& c) {
    check_fields(spec, phi, A);
    const int r = spec.rank, n = spec.dim();
    PulledBack P(spec, adj, phi);
    const Curvatures C = curvature_components(spec, adj, patch, phi, A);
    GaugeVariation V = basic_variation(spec, P, patch, C, A, c);

    for (int a = 0; a < n; ++a) {
        GradedElem s = patch.zero();
        for (int al = 0; al < r; ++al)
            for (int b = 0; b < n; ++b) {
                ScalarExpr k;
                for (int be = 0; be < r; ++be) k -= P.rho(al, a) * P.omega(al, b, be) * c[be];
                k += P.drho(al, a, b) * c[al];
                if (!k.is_zero()) s += k * C.E[b];
            }
        V.E.push_back(s);
    }
    for (int al = 0; al < r; ++al) {
        GradedElem s = patch.zero();
        for (int be = 0; be < r; ++be)
            for (int ga = 0; ga < r; ++ga) {
                ScalarExpr k = K(P, al, be, ga, n);
                if (!k.is_zero()) s -= (k * c[be]) * C.F[ga];
            }
        V.F.push_back(s);
    }

    FieldVariation delta(patch);
    for (int a = 0; a < n; ++a) delta.set(phi[a], V.phi[a]);
    for (int al = 0; al < r; ++al) delta.set_form(A[al], V.A[al]);
    for (const auto& e : C.E) V.E_lin.push_back(delta.apply(e));
    for (const auto& f : C.F) V.F_lin.push_back(delta.apply(f));
    return V;
}

FullVariation full_variation(const AlgebroidSpec& spec, const AdjustmentData& adj, const PatchSpec& patch,
                             const PatchFieldConfig& cfg, const GhostConfig& g) {
    check_fields(spec, cfg.phi, cfg.A_g);
    const int r = spec.rank, n = spec.dim();
    if (static_cast<int>(g.c_g.size()) != r || static_cast<int>(g.c_M.size()) != n ||
        static_cast<int>(g.lambda.size()) != r || static_cast<int>(g.chi.size()) != r)
        throw Error("ghost configuration has the wrong number of components");
    PulledBack P(spec, adj, cfg.phi);
    const ScalarExpr half(Rational(1, 2));
    const auto& Ag = cfg.A_g;
    const auto& AM = cfg.A_M;
    auto lam = [&](int al) { return g.lambda[al].is_zero() ? patch.zero() : g.lambda[al]; };

    FullVariation V;
    for (int a = 0; a < n; ++a) {
        ScalarExpr s = g.c_M[a];
        for (int al = 0; al < r; ++al) s += P.rho(al, a) * g.c_g[al];
        V.phi.push_back(s);
    }
    // the bracket lambda - omega (c_M A_g - A_M c_g) - zeta c_M A_M, shared by A_M and A_g
    std::vector<GradedElem> shifted;
    for (int al = 0; al < r; ++al) {
        GradedElem s = lam(al);
        for (int b = 0; b < n; ++b) {
            for (int be = 0; be < r; ++be) {
                const ScalarExpr& w = P.omega(al, b, be);
                if (w.is_zero()) continue;
                s -= (w * g.c_M[b]) * Ag[be] - (w * g.c_g[be]) * AM[b];
            }
            for (int c = 0; c < n; ++c)
                if (!P.zeta(al, b, c).is_zero()) s -= (P.zeta(al, b, c) * g.c_M[b]) * AM[c];
        }
        shifted.push_back(s);
    }
    for (int a = 0; a < n; ++a) {
        GradedElem s = patch.d(g.c_M[a]);
        for (int al = 0; al < r; ++al) {
            s -= P.rho(al, a) * shifted[al];
            for (int b = 0; b < n; ++b)
                if (!P.drho(al, a, b).is_zero())
                    s += (P.drho(al, a, b) * g.c_g[al]) * AM[b] - (P.drho(al, a, b) * g.c_M[b]) * Ag[al];
        }
        V.A_M.push_back(s);
    }
    for (int al = 0; al < r; ++al) {
        GradedElem s = patch.d(g.c_g[al]) + shifted[al];
        for (int be = 0; be < r; ++be)
            for (int ga = 0; ga < r; ++ga)
                if (!P.f(al, be, ga).is_zero()) s += (P.f(al, be, ga) * g.c_g[ga]) * Ag[be];
        V.A_g.push_back(s);
    }
    for (int al = 0; al < r; ++al) {
        GradedElem s = patch.d(lam(al));
        for (int be = 0; be < r; ++be)
            for (int ga = 0; ga < r; ++ga) {
                ScalarExpr k = K(P, al, be, ga, n);
                if (!k.is_zero()) s -= k * (g.c_g[be] * cfg.B[ga] - Ag[be] * lam(ga));
            }
        for (int a = 0; a < n; ++a)
            for (int be = 0; be < r; ++be) {
                const ScalarExpr& k = P.nabla_zeta(al, a, be);
                if (!k.is_zero()) s -= k * (g.c_M[a] * cfg.B[be] - AM[a] * lam(be));
            }
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    if (!P.cubic(al, a, b, c).is_zero())
                        s += (ScalarExpr(3) * P.cubic(al, a, b, c) * g.c_M[a]) * (AM[b] * AM[c]);
        for (int be = 0; be < r; ++be)
            for (int ga = 0; ga < r; ++ga)
                for (int a = 0; a < n; ++a) {
                    const ScalarExpr& k = P.Rbas(al, be, ga, a);
                    if (k.is_zero()) continue;
                    s += (k * g.c_g[be]) * (Ag[ga] * AM[a]) + (half * k * g.c_M[a]) * (Ag[be] * Ag[ga]);
                }
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int be = 0; be < r; ++be) {
                    const ScalarExpr& k = P.Rcov(al, a, b, be);
                    if (k.is_zero()) continue;
                    s += (k * g.c_M[a]) * (AM[b] * Ag[be]) + (half * k * g.c_g[be]) * (AM[a] * AM[b]);
                }
        V.B.push_back(s);
    }
    for (int a = 0; a < n; ++a) {
        ScalarExpr s;
        for (int al = 0; al < r; ++al) s -= P.rho(al, a) * g.chi[al];
        V.c_M.push_back(s);
    }
    V.c_g = g.chi;
    for (int al = 0; al < r; ++al) {
        GradedElem s = -patch.d(g.chi[al]);
        for (int be = 0; be < r; ++be)
            for (int ga = 0; ga < r; ++ga) {
                ScalarExpr k = K(P, al, be, ga, n);
                if (!k.is_zero()) s -= (k * g.chi[ga]) * Ag[be];
            }
        for (int a = 0; a < n; ++a)
            for (int be = 0; be < r; ++be)
                if (!P.nabla_zeta(al, a, be).is_zero()) s -= (P.nabla_zeta(al, a, be) * g.chi[be]) * AM[a];
        V.lambda.push_back(s);
    }
    return V;
}

ClosureResult closure_residual(const AlgebroidSpec& spec, const AdjustmentData& adj, const PatchSpec& patch,
                               const std::vector<ScalarExpr>& phi, const std::vector<GradedElem>& A,
                               const std::vector<ScalarExpr>& c1, const std::vector<ScalarExpr>& c2) {
    check_fields(spec, phi, A);
    const int r = spec.rank, n = spec.dim();
    PulledBack P(spec, adj, phi);
    const Curvatures C = curvature_components(spec, adj, patch, phi, A);
    const GaugeVariation V1 = basic_variation(spec, P, patch, C, A, c1);
    const GaugeVariation V2 = basic_variation(spec, P, patch, C, A, c2);

    FieldVariation d1(patch), d2(patch);
    for (int a = 0; a < n; ++a) {
        d1.set(phi[a], V1.phi[a]);
        d2.set(phi[a], V2.phi[a]);
    }
    for (int al = 0; al < r; ++al) {
        d1.set_form(A[al], V1.A[al]);
        d2.set_form(A[al], V2.A[al]);
    }

    ClosureResult R;
    for (int al = 0; al < r; ++al) {
        ScalarExpr s;
        for (int be = 0; be < r; ++be)
            for (int ga = 0; ga < r; ++ga) s += P.f(al, be, ga) * c1[be] * c2[ga];
        R.c3.push_back(s);
    }
    const GaugeVariation V3 = basic_variation(spec, P, patch, C, A, R.c3);
    for (int a = 0; a < n; ++a) R.phi_residual.push_back(d1.apply(V2.phi[a]) - d2.apply(V1.phi[a]) - V3.phi[a]);
    for (int al = 0; al < r; ++al) {
        R.residual.push_back(d1.apply(V2.A[al]) - d2.apply(V1.A[al]) - V3.A[al]);
        GradedElem e = patch.zero();
        for (int be = 0; be < r; ++be)
            for (int ga = 0; ga < r; ++ga)
                for (int a = 0; a < n; ++a) {
                    const ScalarExpr& k = P.Rbas(al, be, ga, a);
                    if (!k.is_zero()) e += (ScalarExpr(closure_factor) * k * c1[be] * c2[ga]) * C.E[a];
                }
        R.expected.push_back(e);
    }
    return R;
}

std::vector<GradedElem> covariance_check(const AlgebroidSpec& spec, const AdjustmentData& adj,
                                         const PatchSpec& patch, const std::vector<ScalarExpr>& phi,
                                         const std::vector<GradedElem>& A, const std::vector<ScalarExpr>& c) {
    const GaugeVariation V = gauge_variation(spec, adj, patch, phi, A, c);
    // displayed delta F is exactly -(f + r omega) c F
    std::vector<GradedElem> out;
    for (int al = 0; al < spec.rank; ++al) out.push_back(V.F_lin[al] - V.F[al]);
    return out;
}

ScalarExpr impose_vanishing_E(const ScalarExpr& e, const AlgebroidSpec& spec, const PatchSpec& patch,
                              const std::vector<ScalarExpr>& phi, const std::vector<GradedElem>& A) {
    check_fields(spec, phi, A);
    PulledBack P(spec, AdjustmentData::zero(spec), phi);
    std::map<AtomId, ScalarExpr> repl;
    for (int a = 0; a < spec.dim(); ++a) {
        auto atoms = top_atoms(phi[a]);
        if (atoms.size() != 1 || atom_info(atoms[0]).kind != AtomKind::Opaque)
            throw Error("impose_vanishing_E needs opaque phi components");
        const auto& info = atom_info(atoms[0]);
        for (int mu = 0; mu < patch.dim(); ++mu) {
            ScalarExpr jet = ScalarExpr::opaque(info.name, info.args, {mu});
            ScalarExpr v;
            for (int al = 0; al < spec.rank; ++al) v += P.rho(al, a) * patch.component(A[al], mu);
            repl.emplace(top_atoms(jet).at(0), v);
        }
    }
    return substitute_atoms(e, repl);
}

}  // namespace acw
