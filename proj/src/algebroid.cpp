#include "acw/algebroid.hpp"

#include <algorithm>

namespace acw {

// ---- Tensor ---------------------------------------------------------------

Tensor::Tensor(std::vector<int> dims) : dims_(std::move(dims)) {
    std::size_t n = 1;
    for (int d : dims_) {
        if (d < 0) throw Error("negative tensor dimension");
        n *= static_cast<std::size_t>(d);
    }
    data_.assign(n, ScalarExpr());
}

std::size_t Tensor::offset(std::initializer_list<int> idx) const {
    if (idx.size() != dims_.size()) throw Error("tensor index has wrong rank");
    std::size_t off = 0, k = 0;
    for (int i : idx) {
        if (i < 0 || i >= dims_[k]) throw Error("tensor index out of range");
        off = off * static_cast<std::size_t>(dims_[k++]) + static_cast<std::size_t>(i);
    }
    return off;
}

std::size_t Tensor::offset(const std::vector<int>& idx) const {
    if (idx.size() != dims_.size()) throw Error("tensor index has wrong rank");
    std::size_t off = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] < 0 || idx[k] >= dims_[k]) throw Error("tensor index out of range");
        off = off * static_cast<std::size_t>(dims_[k]) + static_cast<std::size_t>(idx[k]);
    }
    return off;
}

std::vector<int> Tensor::index_of(std::size_t flat) const {
    std::vector<int> idx(dims_.size());
    for (std::size_t k = dims_.size(); k-- > 0;) {
        idx[k] = static_cast<int>(flat % static_cast<std::size_t>(dims_[k]));
        flat /= static_cast<std::size_t>(dims_[k]);
    }
    return idx;
}

bool Tensor::exact_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](const ScalarExpr& e) { return e.is_zero(); });
}

Tensor Tensor::operator+(const Tensor& o) const {
    if (dims_ != o.dims_) throw Error("tensor shape mismatch");
    Tensor r = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] += o.data_[i];
    return r;
}

Tensor Tensor::operator-(const Tensor& o) const {
    if (dims_ != o.dims_) throw Error("tensor shape mismatch");
    Tensor r = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] -= o.data_[i];
    return r;
}

Tensor Tensor::scaled(const ScalarExpr& c) const {
    Tensor r = *this;
    for (auto& x : r.data_) x *= c;
    return r;
}

Tensor Tensor::map(const std::function<ScalarExpr(const ScalarExpr&)>& f) const {
    Tensor r = *this;
    for (auto& x : r.data_) x = f(x);
    return r;
}

// ---- specs ----------------------------------------------------------------

AlgebroidSpec::AlgebroidSpec(std::string n, ChartSpec b, int r)
    : name(std::move(n)), base(std::move(b)), rank(r), anchor({r, base.dim()}), bracket({r, r, r}), symbols(base) {}

void AlgebroidSpec::check() const {
    const int r = rank, n = dim();
    if (anchor.dims() != std::vector<int>{r, n}) throw Error(name + ": anchor must be rank x dim");
    if (bracket.dims() != std::vector<int>{r, r, r}) throw Error(name + ": bracket must be rank^3");
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b)
            for (int c = 0; c < r; ++c)
                if (!(f(a, b, c) + f(a, c, b)).is_zero())
                    throw Error(name + ": bracket not antisymmetric at f^" + std::to_string(a + 1) + "_" +
                                std::to_string(b + 1) + std::to_string(c + 1));
}

AdjustmentData AdjustmentData::zero(const AlgebroidSpec& spec) {
    const int r = spec.rank, n = spec.dim();
    return {Tensor({r, n, r}), Tensor({r, n, n})};
}

void AdjustmentData::check(const AlgebroidSpec& spec) const {
    const int r = spec.rank, n = spec.dim();
    if (omega.dims() != std::vector<int>{r, n, r}) throw Error("omega must be rank x dim x rank");
    if (zeta.dims() != std::vector<int>{r, n, n}) throw Error("zeta must be rank x dim x dim");
    for (int al = 0; al < r; ++al)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (!(zeta(al, a, b) + zeta(al, b, a)).is_zero())
                    throw Error("zeta not antisymmetric at zeta^" + std::to_string(al + 1) + "_" +
                                std::to_string(a + 1) + std::to_string(b + 1));
}

// ---- CE -------------------------------------------------------------------

GenSetPtr ce_generators(const AlgebroidSpec& spec) {
    std::vector<Generator> g;
    for (int i = 1; i <= spec.rank; ++i) g.push_back({"xi" + std::to_string(i), 1, 0, 1});
    return make_generators(spec.base, std::move(g));
}

DerivationSpec build_ce(const AlgebroidSpec& spec) {
    spec.check();
    auto gs = ce_generators(spec);
    const int r = spec.rank, n = spec.dim();
    DerivationSpec D;
    D.gs = gs;
    D.degree = 1;
    D.coord_images.assign(n, GradedElem(gs));
    D.gen_images.assign(r, GradedElem(gs));
    for (int a = 0; a < n; ++a)
        for (int al = 0; al < r; ++al) D.coord_images[a] += spec.rho(al, a) * GradedElem::generator(gs, al);
    const ScalarExpr half(Rational(-1, 2));
    for (int al = 0; al < r; ++al)
        for (int b = 0; b < r; ++b)
            for (int c = 0; c < r; ++c) {
                if (spec.f(al, b, c).is_zero()) continue;
                D.gen_images[al] += GradedElem::monomial(gs, {std::size_t(b), std::size_t(c)}, half * spec.f(al, b, c));
            }
    D.validate();
    return D;
}

ValidationReport validate(const AlgebroidSpec& spec, const ZeroTestOptions& opts) {
    ValidationReport rep;
    try {
        spec.check();
    } catch (const Error& e) {
        rep.antisymmetric = false;
        rep.messages.emplace_back(e.what());
        return rep;
    }
    rep.square = square_check(build_ce(spec), opts);
    rep.passed = rep.square.clean();
    for (const auto* f : rep.square.failures()) {
        bool is_coord = spec.base.has(f->symbol);
        rep.messages.push_back(std::string(is_coord ? "anchor is not a bracket morphism" : "Jacobiator") +
                               " residual on D^2(" + f->symbol + ") = " + f->residual.str());
    }
    return rep;
}

// ---- connection tensors ----------------------------------------------------

DerivedTensors derived_tensors(const AlgebroidSpec& spec, const AdjustmentData& adj) {
    spec.check();
    adj.check(spec);
    const int r = spec.rank, n = spec.dim();
    const auto& coords = spec.base.coords();
    auto d = [&](const ScalarExpr& e, int a) { return differentiate(e, coords[a]); };
    const Tensor& w = adj.omega;
    const Tensor& z = adj.zeta;

    DerivedTensors T;
    T.R_nabla = Tensor({r, n, n, r});
    for (int al = 0; al < r; ++al)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int be = 0; be < r; ++be) {
                    ScalarExpr s = d(w(al, b, be), a) - d(w(al, a, be), b);
                    for (int g = 0; g < r; ++g) s += w(al, a, g) * w(g, b, be) - w(al, b, g) * w(g, a, be);
                    T.R_nabla(al, a, b, be) = s;
                }

    T.Rbas = Tensor({r, r, r, n});
    for (int al = 0; al < r; ++al)
        for (int be = 0; be < r; ++be)
            for (int ga = 0; ga < r; ++ga)
                for (int a = 0; a < n; ++a) {
                    ScalarExpr s = d(spec.f(al, be, ga), a);
                    for (int de = 0; de < r; ++de) s += spec.f(de, be, ga) * w(al, a, de);
                    for (int b = 0; b < n; ++b) {
                        s += w(al, b, be) * d(spec.rho(ga, b), a) - w(al, b, ga) * d(spec.rho(be, b), a);
                        for (int de = 0; de < r; ++de)
                            s -= (w(al, b, be) * w(de, a, ga) - w(al, b, ga) * w(de, a, be)) * spec.rho(de, b);
                        s += d(w(al, a, be), b) * spec.rho(ga, b) - d(w(al, a, ga), b) * spec.rho(be, b);
                    }
                    for (int de = 0; de < r; ++de)
                        s -= spec.f(al, be, de) * w(de, a, ga) - spec.f(al, ga, de) * w(de, a, be);
                    T.Rbas(al, be, ga, a) = s;
                }

    T.dnabla_zeta = Tensor({r, n, n, n});
    for (int al = 0; al < r; ++al)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) {
                    ScalarExpr s = d(z(al, b, c), a) + d(z(al, c, a), b) + d(z(al, a, b), c);
                    for (int be = 0; be < r; ++be)
                        s += w(al, a, be) * z(be, b, c) + w(al, b, be) * z(be, c, a) + w(al, c, be) * z(be, a, b);
                    T.dnabla_zeta(al, a, b, c) = s;
                }

    T.nabla_bas_zeta = Tensor({r, n, n, r});
    for (int al = 0; al < r; ++al)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int be = 0; be < r; ++be) {
                    ScalarExpr s;
                    for (int ga = 0; ga < r; ++ga) s += spec.f(al, be, ga) * z(ga, a, b);
                    for (int c = 0; c < n; ++c) {
                        s += spec.rho(be, c) * d(z(al, a, b), c);
                        for (int ga = 0; ga < r; ++ga) s += w(al, c, be) * spec.rho(ga, c) * z(ga, a, b);
                        ScalarExpr tb = d(spec.rho(be, c), b), ta = d(spec.rho(be, c), a);
                        for (int ga = 0; ga < r; ++ga) {
                            tb -= spec.rho(ga, c) * w(ga, b, be);
                            ta -= spec.rho(ga, c) * w(ga, a, be);
                        }
                        s += z(al, a, c) * tb - z(al, b, c) * ta;
                    }
                    T.nabla_bas_zeta(al, a, b, be) = s;
                }

    T.nabla_zeta = Tensor({r, n, r});
    for (int al = 0; al < r; ++al)
        for (int a = 0; a < n; ++a)
            for (int be = 0; be < r; ++be) {
                ScalarExpr s = w(al, a, be);
                for (int b = 0; b < n; ++b) s -= z(al, a, b) * spec.rho(be, b);
                T.nabla_zeta(al, a, be) = s;
            }
    return T;
}

// ---- Weil ------------------------------------------------------------------

std::vector<std::size_t> WeilAlgebra::curvature_generators() const {
    std::vector<std::size_t> out = mbar;
    out.insert(out.end(), xibar.begin(), xibar.end());
    return out;
}

WeilAlgebra build_weil(const AlgebroidSpec& spec, const AdjustmentData& adj_in, WeilPresentation presentation,
                       bool verify, const ZeroTestOptions& opts) {
    spec.check();
    adj_in.check(spec);
    AdjustmentData adj = adj_in;
    if (presentation == WeilPresentation::PreChange) adj.zeta = AdjustmentData::zero(spec).zeta;

    const int r = spec.rank, n = spec.dim();
    std::vector<Generator> g;
    for (int i = 1; i <= r; ++i) g.push_back({"xi" + std::to_string(i), 1, 0, 1});
    for (int i = 1; i <= n; ++i) g.push_back({"mbar" + std::to_string(i), 1, 1, 0});
    for (int i = 1; i <= r; ++i) g.push_back({"xibar" + std::to_string(i), 2, 1, 1});
    WeilAlgebra W;
    W.presentation = presentation;
    W.gs = make_generators(spec.base, std::move(g));
    for (int i = 0; i < r; ++i) W.xi.push_back(i);
    for (int i = 0; i < n; ++i) W.mbar.push_back(r + i);
    for (int i = 0; i < r; ++i) W.xibar.push_back(r + n + i);

    const auto& gs = W.gs;
    auto mono = [&](std::initializer_list<std::size_t> gens, const ScalarExpr& c) {
        return GradedElem::monomial(gs, std::vector<std::size_t>(gens), c);
    };
    const auto T = derived_tensors(spec, adj);
    const auto& coords = spec.base.coords();
    const Tensor& w = adj.omega;
    const Tensor& z = adj.zeta;
    const ScalarExpr half(Rational(1, 2)), sixth(Rational(1, 6));

    DerivationSpec& D = W.differential;
    D.gs = gs;
    D.degree = 1;
    D.coord_images.assign(n, GradedElem(gs));
    D.gen_images.assign(gs->size(), GradedElem(gs));

    for (int a = 0; a < n; ++a) {
        GradedElem img = GradedElem::generator(gs, W.mbar[a]);
        for (int al = 0; al < r; ++al) img += mono({W.xi[al]}, spec.rho(al, a));
        D.coord_images[a] = img;
    }

    // The bracketed combination xibar - omega mbar xi - 1/2 zeta mbar mbar
    // recurs in d(xi) and d(mbar).
    std::vector<GradedElem> shifted(r, GradedElem(gs));
    for (int al = 0; al < r; ++al) {
        GradedElem s = GradedElem::generator(gs, W.xibar[al]);
        for (int b = 0; b < n; ++b) {
            for (int be = 0; be < r; ++be) s -= mono({W.mbar[b], W.xi[be]}, w(al, b, be));
            for (int c = 0; c < n; ++c) s -= mono({W.mbar[b], W.mbar[c]}, half * z(al, b, c));
        }
        shifted[al] = s;
    }

    for (int al = 0; al < r; ++al) {
        GradedElem img = shifted[al];
        for (int be = 0; be < r; ++be)
            for (int ga = 0; ga < r; ++ga) img -= mono({W.xi[be], W.xi[ga]}, half * spec.f(al, be, ga));
        D.gen_images[W.xi[al]] = img;
    }

    for (int a = 0; a < n; ++a) {
        GradedElem img(gs);
        for (int al = 0; al < r; ++al) {
            img -= spec.rho(al, a) * shifted[al];
            for (int b = 0; b < n; ++b)
                img += mono({W.xi[al], W.mbar[b]}, differentiate(spec.rho(al, a), coords[b]));
        }
        D.gen_images[W.mbar[a]] = img;
    }

    for (int al = 0; al < r; ++al) {
        GradedElem img(gs);
        for (int be = 0; be < r; ++be)
            for (int ga = 0; ga < r; ++ga) {
                ScalarExpr c = spec.f(al, be, ga);
                for (int a = 0; a < n; ++a) c += spec.rho(ga, a) * w(al, a, be);
                img -= mono({W.xi[be], W.xibar[ga]}, c);
            }
        for (int a = 0; a < n; ++a)
            for (int be = 0; be < r; ++be) img -= mono({W.mbar[a], W.xibar[be]}, T.nabla_zeta(al, a, be));
        for (int be = 0; be < r; ++be)
            for (int ga = 0; ga < r; ++ga)
                for (int a = 0; a < n; ++a)
                    img += mono({W.xi[be], W.xi[ga], W.mbar[a]}, half * T.Rbas(al, be, ga, a));
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) {
                    ScalarExpr k = sixth * T.dnabla_zeta(al, a, b, c);
                    for (int d = 0; d < n; ++d)
                        for (int be = 0; be < r; ++be) k -= half * z(al, a, d) * spec.rho(be, d) * z(be, b, c);
                    img += mono({W.mbar[a], W.mbar[b], W.mbar[c]}, k);
                }
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int be = 0; be < r; ++be)
                    img += mono({W.mbar[a], W.mbar[b], W.xi[be]},
                                half * (T.R_nabla(al, a, b, be) + T.nabla_bas_zeta(al, a, b, be)));
        D.gen_images[W.xibar[al]] = img;
    }
    D.validate();

    if (verify) {
        auto sq = square_check(D, opts);
        if (!sq.clean()) {
            const auto* f = sq.failures().front();
            throw Error("Weil differential of " + spec.name + " is not nilpotent: D^2(" + f->symbol +
                        ") = " + f->residual.str());
        }
    }
    return W;
}

GradedElem project_to_ce(const WeilAlgebra& W, const GradedElem& e, const GenSetPtr& ce) {
    GradedElem r(ce);
    for (const auto& [m, c] : e.terms()) {
        bool keep = true;
        for (std::size_t g : W.curvature_generators()) keep = keep && m[g] == 0;
        if (!keep) continue;
        Exponents k(ce->size(), 0);
        for (std::size_t i = 0; i < W.xi.size(); ++i) k[i] = m[W.xi[i]];
        r.add_term(k, c);
    }
    return r;
}

// ---- jets at sampled points -------------------------------------------------

// ---- action pullback --------------------------------------------------------

ActionPullback pullback_to_action(const AlgebroidSpec& g, const AdjustmentData& adj, const ChartSpec& fiber,
                                  const Tensor& fiber_anchor, std::string name) {
    g.check();
    adj.check(g);
    const int r = g.rank, n = g.dim(), k = fiber.dim();
    if (fiber_anchor.dims() != std::vector<int>{r, k}) throw Error("fiber anchor must be rank x fiber dim");
    std::vector<std::string> coords = g.base.coords();
    for (const auto& c : fiber.coords()) {
        if (g.base.has(c)) throw Error("fiber coordinate " + c + " clashes with the base chart");
        coords.push_back(c);
    }
    ActionPullback out;
    out.spec = AlgebroidSpec(name.empty() ? g.name + "_action" : std::move(name),
                             ChartSpec(g.base.name() + "x" + fiber.name(), coords), r);
    out.spec.symbols = g.symbols;
    out.spec.symbols.chart = out.spec.base;
    out.spec.bracket = g.bracket;
    for (int al = 0; al < r; ++al) {
        for (int a = 0; a < n; ++a) out.spec.anchor(al, a) = g.rho(al, a);
        for (int i = 0; i < k; ++i) out.spec.anchor(al, n + i) = fiber_anchor(al, i);
    }
    out.adj = AdjustmentData::zero(out.spec);
    for (int al = 0; al < r; ++al)
        for (int a = 0; a < n; ++a) {
            for (int be = 0; be < r; ++be) out.adj.omega(al, a, be) = adj.omega(al, a, be);
            for (int b = 0; b < n; ++b) out.adj.zeta(al, a, b) = adj.zeta(al, a, b);
        }
    return out;
}

}  // namespace acw
