#include "acw/adjust.hpp"

#include <cmath>
#include <random>

namespace acw {

std::string to_string(Tier t) {
    switch (t) {
        case Tier::None: return "none";
        case Tier::Plain: return "plain";
        case Tier::Covariant: return "covariant";
        case Tier::Strict: return "strict";
    }
    return "?";
}

std::string to_string(Confidence c) { return c == Confidence::Exact ? "exact" : "numeric"; }

const ConditionResult* AdjustmentVerdict::find(const std::string& name) const {
    for (const auto& c : conditions)
        if (c.name == name) return &c;
    return nullptr;
}

namespace {

ConditionResult judge(std::string name, Tensor residual, const ZeroTestOptions& opts) {
    ConditionResult out;
    out.name = std::move(name);
    out.vanishes = true;
    for (std::size_t i = 0; i < residual.size(); ++i) {
        const ScalarExpr& e = residual.data()[i];
        if (e.is_zero()) continue;
        ZeroVerdict v = is_zero(e, opts);
        for (const auto& c : v.caveats) out.caveats.push_back(c);
        if (v.kind == ZeroKind::NumericZero) out.confidence = Confidence::Numeric;
        if (v.kind == ZeroKind::NonZero) {
            out.vanishes = false;
            out.failing.push_back(residual.index_of(i));
        }
    }
    out.residual = std::move(residual);
    return out;
}

// T_{abc} = zeta^alpha_{ad} r^d_beta zeta^beta_{bc}, summed cyclically in (a, b, c)
Tensor cyclic_zrz(const AlgebroidSpec& spec, const AdjustmentData& adj) {
    const int r = spec.rank, n = spec.dim();
    const Tensor& z = adj.zeta;
    auto T = [&](int al, int a, int b, int c) {
        ScalarExpr s;
        for (int d = 0; d < n; ++d)
            for (int be = 0; be < r; ++be) {
                if (z(al, a, d).is_zero() || spec.rho(be, d).is_zero()) continue;
                s += z(al, a, d) * spec.rho(be, d) * z(be, b, c);
            }
        return s;
    };
    Tensor out({r, n, n, n});
    for (int al = 0; al < r; ++al)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) out(al, a, b, c) = T(al, a, b, c) + T(al, b, c, a) + T(al, c, a, b);
    return out;
}

AdjustmentVerdict run(const AlgebroidSpec& spec, const AdjustmentData& adj, Tier upto, const ZeroTestOptions& opts) {
    AdjustmentVerdict v;
    const DerivedTensors T = derived_tensors(spec, adj);
    auto record = [&](ConditionResult c, Tier t) {
        bool ok = c.vanishes;
        if (c.confidence == Confidence::Numeric) v.confidence = Confidence::Numeric;
        v.conditions.push_back(std::move(c));
        if (ok && static_cast<int>(v.tier) + 1 == static_cast<int>(t)) v.tier = t;
    };
    record(judge("plain", T.Rbas, opts), Tier::Plain);
    if (upto == Tier::Plain) return v;
    record(judge("covariant", T.R_nabla + T.nabla_bas_zeta, opts), Tier::Covariant);
    if (upto == Tier::Covariant) return v;
    record(judge("strict", strict_residual(spec, adj), opts), Tier::Strict);
    return v;
}

}  // namespace

Tensor covariance_residual(const AlgebroidSpec& spec, const AdjustmentData& adj) {
    const DerivedTensors T = derived_tensors(spec, adj);
    return T.R_nabla + T.nabla_bas_zeta;
}

Tensor strict_residual_definition(const AlgebroidSpec& spec, const AdjustmentData& adj) {
    return derived_tensors(spec, adj).dnabla_zeta - cyclic_zrz(spec, adj);
}

Tensor strict_residual(const AlgebroidSpec& spec, const AdjustmentData& adj) {
    const DerivedTensors T = derived_tensors(spec, adj);
    const ScalarExpr sixth(Rational(1, 6)), half(Rational(1, 2)), third(Rational(1, 3));
    // 1/6 d^nabla zeta - 1/2 Alt(zeta r zeta); Alt of a tensor skew in its last pair is the cyclic mean
    Tensor S = T.dnabla_zeta.scaled(sixth) - cyclic_zrz(spec, adj).scaled(half * third);
    Tensor D = strict_residual_definition(spec, adj);
    if (!(D == S.scaled(ScalarExpr(6)))) throw Error("strictness normalizations disagree");
    return S;
}

Tensor nabla_zeta_crosscheck(const AlgebroidSpec& spec, const AdjustmentData& adj) {
    spec.check();
    adj.check(spec);
    const int r = spec.rank, n = spec.dim();
    const auto& coords = spec.base.coords();
    const Tensor& z = adj.zeta;
    const Tensor w = derived_tensors(spec, adj).nabla_zeta;
    auto term = [&](int al, int a, int b, int c) {
        ScalarExpr s = differentiate(z(al, b, c), coords[a]);
        for (int be = 0; be < r; ++be) s += w(al, a, be) * z(be, b, c);
        return s;
    };
    Tensor out({r, n, n, n});
    for (int al = 0; al < r; ++al)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    out(al, a, b, c) = term(al, a, b, c) + term(al, b, c, a) + term(al, c, a, b);
    return out;
}

AdjustmentVerdict check_plain(const AlgebroidSpec& spec, const AdjustmentData& adj, const ZeroTestOptions& opts) {
    return run(spec, adj, Tier::Plain, opts);
}

AdjustmentVerdict check_covariant(const AlgebroidSpec& spec, const AdjustmentData& adj,
                                  const ZeroTestOptions& opts) {
    return run(spec, adj, Tier::Covariant, opts);
}

AdjustmentVerdict check_strict(const AlgebroidSpec& spec, const AdjustmentData& adj, const ZeroTestOptions& opts) {
    return run(spec, adj, Tier::Strict, opts);
}

namespace {

// Value and gradient of every entry of a tensor at one point.
struct Jet {
    std::vector<int> dims;
    std::vector<double> v, g;  // g[flat * n + a]
    int n = 0;

    std::size_t flat(int i, int j, int k) const { return (static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + k; }
    std::size_t flat(int i, int j) const { return static_cast<std::size_t>(i) * dims[1] + j; }
};

std::vector<Jet> jets_at(const std::vector<const Tensor*>& ts, const std::vector<std::string>& coords,
                         const NumericPoint& p) {
    std::vector<ScalarExpr> all;
    for (const Tensor* t : ts) all.insert(all.end(), t->data().begin(), t->data().end());
    const std::vector<TaylorValue> tv = eval_taylor(all, coords, p, 1);
    const int n = static_cast<int>(coords.size());
    std::vector<Jet> out;
    std::size_t k = 0;
    for (const Tensor* t : ts) {
        Jet j;
        j.dims = t->dims();
        j.n = n;
        j.v.resize(t->size());
        j.g.resize(t->size() * n);
        for (std::size_t i = 0; i < t->size(); ++i, ++k) {
            j.v[i] = tv[k].value;
            for (int a = 0; a < n; ++a) j.g[i * n + a] = tv[k].gradient[a];
        }
        out.push_back(std::move(j));
    }
    return out;
}

}  // namespace

PointResiduals tier_residuals_at(const AlgebroidSpec& spec, const AdjustmentData& adj, const NumericPoint& p) {
    spec.check();
    adj.check(spec);
    const int r = spec.rank, n = spec.dim();
    const std::vector<Jet> J = jets_at({&spec.anchor, &spec.bracket, &adj.omega, &adj.zeta}, spec.base.coords(), p);
    const Jet &A = J[0], &F = J[1], &W = J[2], &Z = J[3];
    auto rho = [&](int al, int a) { return A.v[A.flat(al, a)]; };
    auto drho = [&](int al, int a, int b) { return A.g[A.flat(al, a) * n + b]; };
    auto f = [&](int al, int be, int ga) { return F.v[F.flat(al, be, ga)]; };
    auto df = [&](int al, int be, int ga, int a) { return F.g[F.flat(al, be, ga) * n + a]; };
    auto w = [&](int al, int a, int be) { return W.v[W.flat(al, a, be)]; };
    auto dw = [&](int al, int a, int be, int b) { return W.g[W.flat(al, a, be) * n + b]; };
    auto z = [&](int al, int a, int b) { return Z.v[Z.flat(al, a, b)]; };
    auto dz = [&](int al, int a, int b, int c) { return Z.g[Z.flat(al, a, b) * n + c]; };

    PointResiduals out;
    out.plain.assign(static_cast<std::size_t>(r) * r * r * n, 0.0);
    std::size_t k = 0;
    for (int al = 0; al < r; ++al)
        for (int be = 0; be < r; ++be)
            for (int ga = 0; ga < r; ++ga)
                for (int a = 0; a < n; ++a, ++k) {
                    double s = df(al, be, ga, a);
                    for (int de = 0; de < r; ++de) {
                        s += f(de, be, ga) * w(al, a, de);
                        s -= f(al, be, de) * w(de, a, ga) - f(al, ga, de) * w(de, a, be);
                    }
                    for (int b = 0; b < n; ++b) {
                        s += w(al, b, be) * drho(ga, b, a) - w(al, b, ga) * drho(be, b, a);
                        for (int de = 0; de < r; ++de)
                            s -= (w(al, b, be) * w(de, a, ga) - w(al, b, ga) * w(de, a, be)) * rho(de, b);
                        s += dw(al, a, be, b) * rho(ga, b) - dw(al, a, ga, b) * rho(be, b);
                    }
                    out.plain[k] = s;
                }

    out.covariant.assign(static_cast<std::size_t>(r) * n * n * r, 0.0);
    k = 0;
    for (int al = 0; al < r; ++al)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int be = 0; be < r; ++be, ++k) {
                    double s = dw(al, b, be, a) - dw(al, a, be, b);
                    for (int g = 0; g < r; ++g) {
                        s += w(al, a, g) * w(g, b, be) - w(al, b, g) * w(g, a, be);
                        s += f(al, be, g) * z(g, a, b);
                    }
                    for (int c = 0; c < n; ++c) {
                        s += rho(be, c) * dz(al, a, b, c);
                        double tb = drho(be, c, b), ta = drho(be, c, a);
                        for (int g = 0; g < r; ++g) {
                            s += w(al, c, be) * rho(g, c) * z(g, a, b);
                            tb -= rho(g, c) * w(g, b, be);
                            ta -= rho(g, c) * w(g, a, be);
                        }
                        s += z(al, a, c) * tb - z(al, b, c) * ta;
                    }
                    out.covariant[k] = s;
                }

    // zeta r zeta contracted once, then the cyclic sums
    std::vector<double> zr(static_cast<std::size_t>(r) * n * r, 0.0);
    for (int al = 0; al < r; ++al)
        for (int a = 0; a < n; ++a)
            for (int be = 0; be < r; ++be) {
                double s = 0;
                for (int d = 0; d < n; ++d) s += z(al, a, d) * rho(be, d);
                zr[(static_cast<std::size_t>(al) * n + a) * r + be] = s;
            }
    auto cyc = [&](int al, int a, int b, int c) {
        double s = 0;
        for (int be = 0; be < r; ++be) s += zr[(static_cast<std::size_t>(al) * n + a) * r + be] * z(be, b, c);
        return s;
    };
    out.strict.assign(static_cast<std::size_t>(r) * n * n * n, 0.0);
    k = 0;
    for (int al = 0; al < r; ++al)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c, ++k) {
                    double s = dz(al, b, c, a) + dz(al, c, a, b) + dz(al, a, b, c);
                    for (int be = 0; be < r; ++be)
                        s += w(al, a, be) * z(be, b, c) + w(al, b, be) * z(be, c, a) + w(al, c, be) * z(be, a, b);
                    s -= cyc(al, a, b, c) + cyc(al, b, c, a) + cyc(al, c, a, b);
                    out.strict[k] = s / 6.0;
                }
    return out;
}

AdjustmentVerdict check_strict_sampled(const AlgebroidSpec& spec, const AdjustmentData& adj,
                                       const SampleOptions& opts) {
    const int r = spec.rank, n = spec.dim();
    const char* names[3] = {"plain", "covariant", "strict"};
    const std::vector<int> dims[3] = {{r, r, r, n}, {r, n, n, r}, {r, n, n, n}};
    std::vector<double> worst[3];
    for (int k = 0; k < 3; ++k) {
        std::size_t size = 1;
        for (int d : dims[k]) size *= static_cast<std::size_t>(d);
        worst[k].assign(size, 0.0);
    }

    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> u(-opts.box, opts.box);
    int points = 0, attempts = 0;
    while (points < opts.points) {
        if (++attempts > 10 * opts.points) throw EvalError("sampling failed: structure functions undefined in the box");
        NumericPoint p;
        for (const auto& c : spec.base.coords()) p.coords[c] = u(rng);
        PointResiduals res;
        try {
            res = tier_residuals_at(spec, adj, p);
        } catch (const EvalError&) {
            continue;
        }
        ++points;
        const std::vector<double>* vals[3] = {&res.plain, &res.covariant, &res.strict};
        for (int k = 0; k < 3; ++k)
            for (std::size_t i = 0; i < worst[k].size(); ++i)
                worst[k][i] = std::max(worst[k][i], std::abs((*vals[k])[i]));
    }

    AdjustmentVerdict v;
    v.confidence = Confidence::Numeric;
    for (int k = 0; k < 3; ++k) {
        ConditionResult c;
        c.name = names[k];
        c.confidence = Confidence::Numeric;
        c.vanishes = true;
        c.residual = Tensor(dims[k]);
        for (std::size_t i = 0; i < worst[k].size(); ++i) {
            c.residual.data()[i] = ScalarExpr(Rational(worst[k][i]));
            if (worst[k][i] > opts.tolerance) {
                c.vanishes = false;
                c.failing.push_back(c.residual.index_of(i));
            }
        }
        if (c.vanishes && static_cast<int>(v.tier) == k) v.tier = static_cast<Tier>(k + 1);
        v.conditions.push_back(std::move(c));
    }
    return v;
}

}  // namespace acw
