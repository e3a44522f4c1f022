#include "acw/cocycle.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

namespace acw {

// ---- symbolic matrices ----------------------------------------------------------

SymMatrix SymMatrix::identity(int n) {
    SymMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1;
    return m;
}

SymMatrix SymMatrix::rotation(const ScalarExpr& angle) {
    SymMatrix m(2, 2);
    m(0, 0) = ScalarExpr::cos(angle);
    m(0, 1) = -ScalarExpr::sin(angle);
    m(1, 0) = ScalarExpr::sin(angle);
    m(1, 1) = ScalarExpr::cos(angle);
    return m;
}

SymMatrix SymMatrix::operator*(const SymMatrix& o) const {
    if (cols != o.rows) throw Error("matrix dimension mismatch");
    SymMatrix r(rows, o.cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < o.cols; ++j) {
            ScalarExpr s;
            for (int k = 0; k < cols; ++k)
                if (!(*this)(i, k).is_zero() && !o(k, j).is_zero()) s += (*this)(i, k) * o(k, j);
            r(i, j) = s;
        }
    return r;
}

SymMatrix SymMatrix::operator+(const SymMatrix& o) const {
    if (rows != o.rows || cols != o.cols) throw Error("matrix dimension mismatch");
    SymMatrix r = *this;
    for (std::size_t k = 0; k < entries.size(); ++k) r.entries[k] += o.entries[k];
    return r;
}

SymMatrix SymMatrix::scaled(const ScalarExpr& c) const {
    return map([&](const ScalarExpr& e) { return c * e; });
}

SymMatrix SymMatrix::transposed() const {
    SymMatrix r(cols, rows);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) r(j, i) = (*this)(i, j);
    return r;
}

SymMatrix SymMatrix::map(const std::function<ScalarExpr(const ScalarExpr&)>& f) const {
    SymMatrix r(rows, cols);
    for (std::size_t k = 0; k < entries.size(); ++k) r.entries[k] = f(entries[k]);
    return r;
}

// ---- matrix groups -------------------------------------------------------------------

namespace {

ScalarExpr pairing(const SymMatrix& a, const SymMatrix& b) {
    ScalarExpr s;
    for (std::size_t k = 0; k < a.entries.size(); ++k)
        if (!a.entries[k].is_zero() && !b.entries[k].is_zero()) s += a.entries[k] * b.entries[k];
    return s;
}

}  // namespace

std::vector<ScalarExpr> MatrixGroup::decompose(const SymMatrix& m) const {
    const int r = static_cast<int>(basis.size());
    // Gram system G a = c with constant rational G
    std::vector<std::vector<ScalarExpr>> G(r, std::vector<ScalarExpr>(r + 1));
    for (int a = 0; a < r; ++a) {
        for (int b = 0; b < r; ++b) G[a][b] = pairing(basis[a], basis[b]);
        G[a][r] = pairing(basis[a], m);
    }
    for (int col = 0; col < r; ++col) {
        int piv = col;
        while (piv < r && G[piv][col].is_zero()) ++piv;
        if (piv == r) throw Error("matrix group basis is linearly dependent");
        std::swap(G[col], G[piv]);
        ScalarExpr inv = ScalarExpr(1) / G[col][col];
        for (auto& x : G[col]) x *= inv;
        for (int row = 0; row < r; ++row) {
            if (row == col || G[row][col].is_zero()) continue;
            ScalarExpr k = G[row][col];
            for (int c = 0; c <= r; ++c) G[row][c] -= k * G[col][c];
        }
    }
    std::vector<ScalarExpr> out;
    for (int a = 0; a < r; ++a) out.push_back(G[a][r]);
    return out;
}

SymMatrix MatrixGroup::assemble(const std::vector<ScalarExpr>& comps) const {
    SymMatrix m(n, n);
    for (std::size_t a = 0; a < basis.size(); ++a)
        if (!comps.at(a).is_zero()) m = m + basis[a].scaled(comps[a]);
    return m;
}

MatrixGroup MatrixGroup::make(std::string name, std::vector<SymMatrix> basis) {
    MatrixGroup G;
    G.name = std::move(name);
    if (basis.empty()) throw Error("matrix group needs a nonempty algebra basis");
    G.n = basis[0].rows;
    for (const auto& b : basis)
        if (b.rows != G.n || b.cols != G.n) throw Error("algebra basis matrices must be square of one size");
    G.basis = std::move(basis);
    const int r = static_cast<int>(G.basis.size());
    G.algebra = AlgebroidSpec(G.name, ChartSpec("pt", {}), r);
    for (int b = 0; b < r; ++b)
        for (int c = 0; c < r; ++c) {
            SymMatrix comm = G.basis[b] * G.basis[c] + (G.basis[c] * G.basis[b]).scaled(ScalarExpr(-1));
            auto f = G.decompose(comm);
            if (!(G.assemble(f) == comm)) throw Error("algebra basis is not closed under commutators");
            for (int a = 0; a < r; ++a) G.algebra.bracket(a, b, c) = f[a];
        }
    return G;
}

MatrixGroup MatrixGroup::so2() {
    SymMatrix J(2, 2);
    J(0, 1) = -1;
    J(1, 0) = 1;
    return make("so2", {J});
}

const Overlap& CoverSpec::overlap(int i, int j) const {
    for (const auto& o : overlaps)
        if (o.i == i && o.j == j) return o;
    throw Error("cover has no overlap (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
}

// ---- numerics ------------------------------------------------------------------------

namespace {

using Mat = Eigen::MatrixXd;

std::map<std::string, ScalarExpr> coord_map(int dim, const std::vector<ScalarExpr>& images) {
    std::map<std::string, ScalarExpr> m;
    for (int mu = 0; mu < dim; ++mu) m.emplace("x" + std::to_string(mu + 1), images.at(mu));
    return m;
}

SymMatrix compose(const SymMatrix& m, int dim, const std::vector<ScalarExpr>& change) {
    auto at = coord_map(dim, change);
    return m.map([&](const ScalarExpr& e) { return substitute(e, at); });
}

SymMatrix partial(const SymMatrix& m, int mu) {
    const std::string x = "x" + std::to_string(mu + 1);
    return m.map([&](const ScalarExpr& e) { return differentiate(e, x); });
}

Mat evalm(const SymMatrix& m, const NumericPoint& p) {
    Mat r(m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) r(i, j) = eval(m(i, j), p);
    return r;
}

SymMatrix column(const std::vector<ScalarExpr>& v) {
    SymMatrix m(static_cast<int>(v.size()), 1);
    for (std::size_t k = 0; k < v.size(); ++k) m.entries[k] = v[k];
    return m;
}

// J(lambda, mu) = d change^lambda / d x^mu
std::vector<std::vector<ScalarExpr>> jacobian(int dim, const std::vector<ScalarExpr>& change) {
    std::vector<std::vector<ScalarExpr>> J(dim, std::vector<ScalarExpr>(dim));
    for (int l = 0; l < dim; ++l)
        for (int mu = 0; mu < dim; ++mu) J[l][mu] = differentiate(change.at(l), "x" + std::to_string(mu + 1));
    return J;
}

std::vector<SymMatrix> one_form(const TransitionData& data, int i, int dim) {
    std::vector<SymMatrix> out;
    for (int mu = 0; mu < dim; ++mu) {
        std::vector<ScalarExpr> comps;
        for (const auto& a : data.A.at(i)) comps.push_back(a.at(mu));
        out.push_back(data.group.assemble(comps));
    }
    return out;
}

std::vector<SymMatrix> pull_one_form(const std::vector<SymMatrix>& A, int dim, const std::vector<ScalarExpr>& change) {
    auto J = jacobian(dim, change);
    std::vector<SymMatrix> out;
    for (int mu = 0; mu < dim; ++mu) {
        SymMatrix s(A[0].rows, A[0].cols);
        for (int l = 0; l < dim; ++l)
            if (!J[l][mu].is_zero()) s = s + compose(A[l], dim, change).scaled(J[l][mu]);
        out.push_back(s);
    }
    return out;
}

// 2-form components indexed by pairs mu < nu
using TwoForm = std::map<std::pair<int, int>, SymMatrix>;

TwoForm curvature_matrix(const CoverSpec& cover, const TransitionData& data, int i) {
    PatchSpec P = cover.patch();
    auto F = patch_curvature(cover, data, i);
    TwoForm out;
    for (int mu = 0; mu < cover.dim; ++mu)
        for (int nu = mu + 1; nu < cover.dim; ++nu) {
            std::vector<ScalarExpr> comps;
            for (const auto& f : F) comps.push_back(P.component(f, mu, nu));
            out[{mu, nu}] = data.group.assemble(comps);
        }
    return out;
}

TwoForm pull_two_form(const TwoForm& F, int dim, const std::vector<ScalarExpr>& change, int n) {
    auto J = jacobian(dim, change);
    TwoForm out;
    for (int mu = 0; mu < dim; ++mu)
        for (int nu = mu + 1; nu < dim; ++nu) {
            SymMatrix s(n, n);
            for (const auto& [lk, m] : F) {
                auto [l, k] = lk;
                ScalarExpr w = J[l][mu] * J[k][nu] - J[k][mu] * J[l][nu];
                if (!w.is_zero()) s = s + compose(m, dim, change).scaled(w);
            }
            out[{mu, nu}] = s;
        }
    return out;
}

double maxabs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

class Sampler {
  public:
    Sampler(const CocycleOptions& opts, std::uint64_t salt) : rng_(opts.seed ^ (salt * 0x9e3779b97f4a7c15ULL)) {}

    NumericPoint draw(const Box& box, std::vector<double>& coords) {
        NumericPoint p;
        coords.clear();
        for (std::size_t mu = 0; mu < box.size(); ++mu) {
            std::uniform_real_distribution<double> u(box[mu].first, box[mu].second);
            double v = u(rng_);
            coords.push_back(v);
            p.coords["x" + std::to_string(mu + 1)] = v;
        }
        return p;
    }

  private:
    std::mt19937_64 rng_;
};

// Runs `residual` at opts.samples points of `box`, resampling on evaluation errors.
template <typename F>
CheckLine sample_check(std::string name, const Box& box, const CocycleOptions& opts, std::uint64_t salt, F residual) {
    CheckLine line;
    line.name = std::move(name);
    Sampler s(opts, salt);
    int good = 0, attempts = 0;
    std::vector<double> x;
    while (good < opts.samples) {
        if (++attempts > 10 * opts.samples) throw EvalError("sampling failed for " + line.name);
        NumericPoint p = s.draw(box, x);
        double r;
        try {
            r = residual(p);
        } catch (const EvalError&) {
            continue;
        }
        if (!std::isfinite(r)) continue;
        ++good;
        if (r >= line.max_residual) {
            line.max_residual = r;
            line.witness = x;
        }
    }
    line.passed = line.max_residual < opts.tolerance;
    return line;
}

void add(CocycleVerdict& v, CheckLine line, int samples) {
    v.max_residual = std::max(v.max_residual, line.max_residual);
    v.passed = v.passed && line.passed;
    v.samples += samples;
    v.lines.push_back(std::move(line));
}

std::string pair_name(int i, int j) { return std::to_string(i + 1) + std::to_string(j + 1); }

void check_shapes(const CoverSpec& cover, const TransitionData& data) {
    const int n = data.group.n;
    for (const auto& [ij, g] : data.g)
        if (g.rows != n || g.cols != n) throw Error("transition g_" + pair_name(ij.first, ij.second) + " has wrong size");
    if (!data.higgs.empty() && data.higgs.size() != cover.patches.size())
        throw Error("Higgs data needs one map per patch");
    for (const auto& m : data.higgs)
        if (static_cast<int>(m.size()) != n) throw Error("Higgs map has wrong dimension");
    if (!data.A.empty()) {
        if (data.A.size() != cover.patches.size()) throw Error("connection data needs one 1-form per patch");
        for (const auto& Ai : data.A) {
            if (Ai.size() != data.group.basis.size()) throw Error("connection has wrong rank");
            for (const auto& a : Ai)
                if (static_cast<int>(a.size()) != cover.dim) throw Error("connection has wrong form components");
        }
    }
    for (const auto& o : cover.overlaps)
        if (static_cast<int>(o.change.size()) != cover.dim || static_cast<int>(o.box.size()) != cover.dim)
            throw Error("overlap " + pair_name(o.i, o.j) + " has wrong dimension");
}

const SymMatrix& transition(const TransitionData& data, int i, int j) {
    auto it = data.g.find({i, j});
    if (it == data.g.end()) throw Error("missing transition g_" + pair_name(i, j));
    return it->second;
}

}  // namespace

CocycleVerdict verify_cocycle(const CoverSpec& cover, const TransitionData& data, const CocycleOptions& opts) {
    check_shapes(cover, data);
    const int d = cover.dim, n = data.group.n;
    const Mat I = Mat::Identity(n, n);
    CocycleVerdict v;
    std::uint64_t salt = 1;

    for (std::size_t i = 0; i < cover.patches.size(); ++i) {
        auto it = data.g.find({static_cast<int>(i), static_cast<int>(i)});
        if (it == data.g.end()) continue;
        const SymMatrix& g = it->second;
        add(v, sample_check("g_" + pair_name(i, i) + " = 1", cover.patches[i].domain, opts, salt++,
                            [&](const NumericPoint& p) { return maxabs(evalm(g, p) - I); }),
            opts.samples);
    }
    for (const auto& o : cover.overlaps) {
        const SymMatrix& gij = transition(data, o.i, o.j);
        const SymMatrix gji = compose(transition(data, o.j, o.i), d, o.change);
        add(v, sample_check("g_" + pair_name(o.i, o.j) + " g_" + pair_name(o.j, o.i) + " = 1", o.box, opts, salt++,
                            [&](const NumericPoint& p) { return maxabs(evalm(gij, p) * evalm(gji, p) - I); }),
            opts.samples);
        if (!data.higgs.empty()) {
            const SymMatrix mi = column(data.higgs[o.i]);
            const SymMatrix mj = compose(column(data.higgs[o.j]), d, o.change);
            add(v, sample_check("m_" + std::to_string(o.j + 1) + " = g_" + pair_name(o.i, o.j) + "^-1 m_" +
                                    std::to_string(o.i + 1),
                                o.box, opts, salt++,
                                [&](const NumericPoint& p) {
                                    Mat g = evalm(gij, p);
                                    return maxabs(g * evalm(mj, p) - evalm(mi, p));
                                }),
                opts.samples);
        }
    }
    for (const auto& t : cover.triples) {
        const SymMatrix& gij = transition(data, t.i, t.j);
        const SymMatrix& gik = transition(data, t.i, t.k);
        const SymMatrix gjk = compose(transition(data, t.j, t.k), d, cover.overlap(t.i, t.j).change);
        add(v, sample_check("g_" + pair_name(t.i, t.k) + " = g_" + pair_name(t.i, t.j) + " g_" + pair_name(t.j, t.k),
                            t.box, opts, salt++,
                            [&](const NumericPoint& p) {
                                return maxabs(evalm(gik, p) - evalm(gij, p) * evalm(gjk, p));
                            }),
            opts.samples);
    }
    return v;
}

std::vector<GradedElem> patch_curvature(const CoverSpec& cover, const TransitionData& data, int i) {
    PatchSpec P = cover.patch();
    std::vector<GradedElem> A;
    for (const auto& comps : data.A.at(i)) A.push_back(P.one_form(comps));
    const auto& alg = data.group.algebra;
    return curvature_components(alg, AdjustmentData::zero(alg), P, {}, A).F;
}

CocycleVerdict glue_check(const CoverSpec& cover, const TransitionData& data, const CocycleOptions& opts) {
    check_shapes(cover, data);
    if (data.A.empty()) throw Error("glue_check needs connection data");
    const int d = cover.dim, n = data.group.n;
    CocycleVerdict v;
    std::uint64_t salt = 101;
    std::vector<TwoForm> F;
    for (std::size_t i = 0; i < cover.patches.size(); ++i) F.push_back(curvature_matrix(cover, data, static_cast<int>(i)));

    for (const auto& o : cover.overlaps) {
        const SymMatrix& g = transition(data, o.i, o.j);
        const auto Ai = one_form(data, o.i, d);
        const auto Aj = pull_one_form(one_form(data, o.j, d), d, o.change);
        std::vector<SymMatrix> dg;
        for (int mu = 0; mu < d; ++mu) dg.push_back(partial(g, mu));
        add(v, sample_check("A_" + std::to_string(o.j + 1) + " = g^-1 A_" + std::to_string(o.i + 1) + " g + g^-1 dg",
                            o.box, opts, salt++,
                            [&](const NumericPoint& p) {
                                Mat G = evalm(g, p), Gi = G.inverse();
                                double r = 0;
                                for (int mu = 0; mu < d; ++mu)
                                    r = std::max(r, maxabs(evalm(Aj[mu], p) - Gi * evalm(Ai[mu], p) * G -
                                                           Gi * evalm(dg[mu], p)));
                                return r;
                            }),
            opts.samples);

        const TwoForm Fj = pull_two_form(F[o.j], d, o.change, n);
        const TwoForm& Fi = F[o.i];
        add(v, sample_check("F_" + std::to_string(o.j + 1) + " = g^-1 F_" + std::to_string(o.i + 1) + " g", o.box,
                            opts, salt++,
                            [&](const NumericPoint& p) {
                                Mat G = evalm(g, p), Gi = G.inverse();
                                double r = 0;
                                for (const auto& [k, m] : Fi)
                                    r = std::max(r, maxabs(evalm(Fj.at(k), p) - Gi * evalm(m, p) * G));
                                return r;
                            }),
            opts.samples);

        if (!data.higgs.empty()) {
            const SymMatrix mi = column(data.higgs[o.i]);
            const SymMatrix mj = compose(column(data.higgs[o.j]), d, o.change);
            std::vector<SymMatrix> Di, Dj;
            for (int mu = 0; mu < d; ++mu) {
                Di.push_back(partial(mi, mu) + Ai[mu] * mi);
                Dj.push_back(partial(mj, mu) + Aj[mu] * mj);
            }
            add(v, sample_check("Dm_" + std::to_string(o.j + 1) + " = g^-1 Dm_" + std::to_string(o.i + 1), o.box,
                                opts, salt++,
                                [&](const NumericPoint& p) {
                                    Mat Gi = evalm(g, p).inverse();
                                    double r = 0;
                                    for (int mu = 0; mu < d; ++mu)
                                        r = std::max(r, maxabs(evalm(Dj[mu], p) - Gi * evalm(Di[mu], p)));
                                    return r;
                                }),
                opts.samples);
        }
    }
    return v;
}

// ---- quadrature --------------------------------------------------------------------------

namespace {

struct GaussRule {
    std::vector<double> x, w;  // on [-1, 1]
};

GaussRule gauss_legendre(int m) {
    GaussRule g;
    g.x.resize(m);
    g.w.resize(m);
    for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = z;
            for (int k = 2; k <= m; ++k) {
                double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = m * (z * p1 - p0) / (z * z - 1);
            double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        g.x[i] = z;
        g.w[i] = 2 / ((1 - z * z) * dp * dp);
    }
    return g;
}

double integrate_box(const ScalarExpr& f, const Box& box, int panels, const GaussRule& rule, int& nodes) {
    double total = 0;
    const double hx = (box[0].second - box[0].first) / panels, hy = (box[1].second - box[1].first) / panels;
    NumericPoint p;
    for (int a = 0; a < panels; ++a)
        for (int b = 0; b < panels; ++b)
            for (std::size_t i = 0; i < rule.x.size(); ++i)
                for (std::size_t j = 0; j < rule.x.size(); ++j) {
                    p.coords["x1"] = box[0].first + hx * (a + 0.5 * (rule.x[i] + 1));
                    p.coords["x2"] = box[1].first + hy * (b + 0.5 * (rule.x[j] + 1));
                    total += rule.w[i] * rule.w[j] * eval(f, p);
                    ++nodes;
                }
    return total * hx * hy / 4;
}

}  // namespace

ChernResult chern_number(const CoverSpec& cover, const TransitionData& data, double tol) {
    if (cover.dim != 2) throw Error("chern_number needs a 2-dimensional base");
    if (data.group.n != 2 || data.group.basis.size() != 1) throw Error("chern_number needs SO(2) data");
    check_shapes(cover, data);
    const SymMatrix& J = data.group.basis[0];
    const GaussRule rule = gauss_legendre(12);
    ChernResult res;
    double total = 0;
    for (std::size_t i = 0; i < cover.patches.size(); ++i) {
        const auto F = curvature_matrix(cover, data, static_cast<int>(i));
        const SymMatrix JF = J * F.at({0, 1});
        const ScalarExpr integrand = JF(0, 0) + JF(1, 1);
        if (cover.patches[i].domain.size() != 2) throw Error("patch domain must be 2-dimensional");
        double prev = integrate_box(integrand, cover.patches[i].domain, 1, rule, res.nodes);
        bool converged = false;
        for (int panels = 2; panels <= 64; panels *= 2) {
            double cur = integrate_box(integrand, cover.patches[i].domain, panels, rule, res.nodes);
            if (std::abs(cur - prev) < tol * std::max(1.0, std::abs(cur))) {
                prev = cur;
                converged = true;
                break;
            }
            prev = cur;
        }
        if (!converged) throw Error("quadrature did not converge on patch " + cover.patches[i].name);
        total += prev;
    }
    // F = f J and i <-> J, so (i / 2 pi) int F = (1 / 4 pi) int tr(J F)
    res.value = total / (4 * std::numbers::pi);
    res.nearest = std::lround(res.value);
    res.deviation = std::abs(res.value - static_cast<double>(res.nearest));
    res.integral = res.deviation < 1e-6;
    return res;
}

TransitionData gauge_transform(const CoverSpec& cover, const TransitionData& data, const std::vector<SymMatrix>& p,
                               const std::vector<SymMatrix>& p_inv) {
    check_shapes(cover, data);
    const int d = cover.dim;
    if (p.size() != cover.patches.size() || p_inv.size() != p.size())
        throw Error("gauge_transform needs one matrix per patch");
    TransitionData out = data;
    for (auto& [ij, g] : out.g) {
        auto [i, j] = ij;
        SymMatrix pj = i == j ? p[j] : compose(p[j], d, cover.overlap(i, j).change);
        g = p_inv[i] * g * pj;
    }
    for (std::size_t i = 0; i < out.higgs.size(); ++i) {
        SymMatrix m = p_inv[i] * column(data.higgs[i]);
        out.higgs[i] = m.entries;
    }
    for (std::size_t i = 0; i < out.A.size(); ++i) {
        const auto A = one_form(data, static_cast<int>(i), d);
        for (int mu = 0; mu < d; ++mu) {
            SymMatrix m = p_inv[i] * A[mu] * p[i] + p_inv[i] * partial(p[i], mu);
            auto comps = data.group.decompose(m);
            const SymMatrix back = data.group.assemble(comps);
            for (std::size_t k = 0; k < m.entries.size(); ++k)
                if (!is_zero(back.entries[k] - m.entries[k]).vanishes())
                    throw Error("transformed connection left the Lie algebra");
            for (std::size_t al = 0; al < comps.size(); ++al) out.A[i][al][mu] = comps[al];
        }
    }
    return out;
}

// ---- S^2 monopole ---------------------------------------------------------------------

CoverSpec sphere_cover() {
    const double pi = std::numbers::pi;
    CoverSpec c;
    c.name = "S2";
    c.dim = 2;
    c.patches.push_back({"north", {{0.0, pi / 2}, {0.0, 2 * pi}}});
    c.patches.push_back({"south", {{pi / 2, pi}, {0.0, 2 * pi}}});
    const Box band = {{pi / 2 - 0.5, pi / 2 + 0.5}, {0.0, 2 * pi}};
    const std::vector<ScalarExpr> id = {ScalarExpr::coord("x1"), ScalarExpr::coord("x2")};
    c.overlaps.push_back({0, 1, band, id});
    c.overlaps.push_back({1, 0, band, id});
    return c;
}

TransitionData monopole_data(long n) {
    TransitionData t;
    t.group = MatrixGroup::so2();
    const ScalarExpr theta = ScalarExpr::coord("x1"), phi = ScalarExpr::coord("x2");
    const ScalarExpr N(n);
    t.g[{0, 0}] = SymMatrix::identity(2);
    t.g[{1, 1}] = SymMatrix::identity(2);
    t.g[{0, 1}] = SymMatrix::rotation(N * phi);
    t.g[{1, 0}] = SymMatrix::rotation(-N * phi);
    const ScalarExpr half_n = N * ScalarExpr(Rational(1, 2));
    t.A = {{{ScalarExpr(), -half_n * (ScalarExpr(1) - ScalarExpr::cos(theta))}},
           {{ScalarExpr(), half_n * (ScalarExpr(1) + ScalarExpr::cos(theta))}}};
    return t;
}

}  // namespace acw
