#include "acw/catalog.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace acw {

namespace {

ScalarExpr m(int a) { return ScalarExpr::coord("m" + std::to_string(a + 1)); }

int eps(int i, int j, int k) {
    if (i == j || j == k || i == k) return 0;
    return ((j - i + 3) % 3 == 1) ? 1 : -1;
}

AlgebroidSpec point_algebra(std::string name, int rank) {
    return AlgebroidSpec(std::move(name), ChartSpec("pt", {}), rank);
}

AlgebroidSpec so3_algebra(std::string name) {
    AlgebroidSpec s = point_algebra(std::move(name), 3);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) s.bracket(a, b, c) = eps(a, b, c);
    return s;
}

AlgebroidSpec tangent(int n, std::string name) {
    AlgebroidSpec s(std::move(name), ChartSpec::numbered("R" + std::to_string(n), "m", n), n);
    for (int a = 0; a < n; ++a) s.anchor(a, a) = 1;
    return s;
}

int int_param(const Params& p, const std::string& key, int fallback, int lo, int hi) {
    auto it = p.find(key);
    if (it == p.end()) return fallback;
    int v;
    try {
        std::size_t used = 0;
        v = std::stoi(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
        throw Error("parameter " + key + " must be an integer, got '" + it->second + "'");
    }
    if (v < lo || v > hi)
        throw Error("parameter " + key + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
}

void reject_unknown(const Params& p, std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : p) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) throw Error("unknown parameter '" + k + "'");
    }
}

ExpectedVerdicts strict_clean() {
    ExpectedVerdicts e;
    e.tier = Tier::Strict;
    e.closure_zero = true;
    e.bianchi_zero = true;
    return e;
}

// Lie algebra bundle su(2) x R^3 with omega = ad(A) and zeta the curvature of A.
void lab_adjustment(Fixture& fx, const std::vector<ScalarExpr>& A) {
    const auto& s = fx.spec;
    AdjustmentData adj = AdjustmentData::zero(s);
    auto Abg = [&](int al, int a) { return A[static_cast<std::size_t>(3 * al + a)]; };
    for (int al = 0; al < 3; ++al)
        for (int a = 0; a < 3; ++a)
            for (int be = 0; be < 3; ++be) {
                ScalarExpr w;
                for (int ga = 0; ga < 3; ++ga)
                    if (!s.f(al, ga, be).is_zero()) w += s.f(al, ga, be) * Abg(ga, a);
                adj.omega(al, a, be) = w;
            }
    for (int al = 0; al < 3; ++al)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                ScalarExpr z = differentiate(Abg(al, b), "m" + std::to_string(a + 1)) -
                               differentiate(Abg(al, a), "m" + std::to_string(b + 1));
                for (int be = 0; be < 3; ++be)
                    for (int ga = 0; ga < 3; ++ga)
                        if (!s.f(al, be, ga).is_zero()) z += s.f(al, be, ga) * Abg(be, a) * Abg(ga, b);
                adj.zeta(al, a, b) = z;
            }
    fx.adj = adj;
}

const char* const kLabDefault = "m2; 0; m1*m2; 0; m3; m1^2; m3; m1; 0";

std::vector<ScalarExpr> parse_list(const std::string& text, const ChartSpec& chart, std::size_t count) {
    std::vector<ScalarExpr> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ';')) out.push_back(parse(item, chart));
    if (out.size() != count)
        throw Error("expected " + std::to_string(count) + " ';'-separated expressions, got " +
                    std::to_string(out.size()));
    return out;
}

// so(3) acting on its fiber R^3 by rotations: anchor eps_{alpha i j} y^j
Tensor rotation_anchor(const ChartSpec& fiber) {
    Tensor t({3, 3});
    for (int al = 0; al < 3; ++al)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (eps(al, i, j) != 0) t(al, i) += ScalarExpr(eps(al, i, j)) * ScalarExpr::coord(fiber.coords()[j]);
    return t;
}

// A covariant-but-not-strict constant primitive on the tangent algebroid of R^3,
// the first hit of the seeded search in the tests.
const int kNonstrictZeta[3][3] = {{1, -1, -1}, {-1, -1, -1}, {1, -1, 1}};  // zeta(alpha, (12,13,23))

// Octonion product of basis units e_i e_j = sign * e_k, with e_0 = 1.
std::pair<int, int> octonion_unit_product(int i, int j) {
    static const int triples[7][3] = {{1, 2, 3}, {1, 4, 5}, {1, 7, 6}, {2, 4, 6}, {2, 5, 7}, {3, 4, 7}, {3, 6, 5}};
    if (i == 0) return {1, j};
    if (j == 0) return {1, i};
    if (i == j) return {-1, 0};
    for (const auto& t : triples)
        for (int r = 0; r < 3; ++r)
            if (t[r] == i && t[(r + 1) % 3] == j) return {1, t[(r + 2) % 3]};
            else if (t[r] == j && t[(r + 1) % 3] == i) return {-1, t[(r + 2) % 3]};
    throw Error("octonion table incomplete");
}

// Unit octonions p = (s, y / 10) with s = sqrt(1 - |y|^2 / 100) and the global
// frame V_i(p) = p e_i. The connection is nabla_{V_i} V_j = [V_i, V_j], whose
// opposite connection keeps the frame parallel.
AlgebroidSpec octonion_sphere(AdjustmentData& adj) {
    const int n = 7;
    ChartSpec chart = ChartSpec::numbered("S7", "y", n);
    const ScalarExpr tenth(Rational(1, 10));
    ScalarExpr r2;
    std::vector<ScalarExpr> p(8);
    for (int a = 0; a < n; ++a) {
        p[a + 1] = tenth * ScalarExpr::coord(chart.coords()[a]);
        r2 += p[a + 1] * p[a + 1];
    }
    p[0] = ScalarExpr::sqrt(ScalarExpr(1) - r2);

    // R[i][k][b]: component k of e_b e_i
    std::vector<std::vector<std::vector<int>>> R(8, std::vector<std::vector<int>>(8, std::vector<int>(8, 0)));
    for (int i = 0; i < 8; ++i)
        for (int b = 0; b < 8; ++b) {
            auto [sg, k] = octonion_unit_product(b, i);
            R[i][k][b] = sg;
        }
    auto right = [&](int i, const std::vector<ScalarExpr>& v) {
        std::vector<ScalarExpr> out(8);
        for (int k = 0; k < 8; ++k)
            for (int b = 0; b < 8; ++b)
                if (R[i][k][b] != 0) out[k] += ScalarExpr(R[i][k][b]) * v[b];
        return out;
    };
    auto dot = [](const std::vector<ScalarExpr>& u, const std::vector<ScalarExpr>& v) {
        ScalarExpr s;
        for (std::size_t k = 0; k < u.size(); ++k) s += u[k] * v[k];
        return s;
    };

    std::vector<std::vector<ScalarExpr>> V(n), dp(n);
    for (int i = 0; i < n; ++i) V[i] = right(i + 1, p);
    for (int a = 0; a < n; ++a)
        for (int k = 0; k < 8; ++k) dp[a].push_back(differentiate(p[k], chart.coords()[a]));

    AlgebroidSpec s("octonion_S7", chart, n);
    Tensor theta({n, n});  // dual coframe, theta(i, a) = <dp_a, V_i>
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < n; ++a) {
            theta(i, a) = dot(dp[a], V[i]);
            s.anchor(i, a) = ScalarExpr(10) * V[i][a + 1];
        }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (j <= i) continue;
            // [V_i, V_j] = (R_j R_i - R_i R_j) p
            std::vector<ScalarExpr> a = right(j + 1, right(i + 1, p)), b = right(i + 1, right(j + 1, p)), c(8);
            for (int k = 0; k < 8; ++k) c[k] = a[k] - b[k];
            for (int k = 0; k < n; ++k) {
                ScalarExpr f = dot(c, V[k]);
                s.bracket(k, i, j) = f;
                s.bracket(k, j, i) = -f;
            }
        }
    adj = AdjustmentData::zero(s);
    for (int k = 0; k < n; ++k)
        for (int a = 0; a < n; ++a)
            for (int j = 0; j < n; ++j) {
                ScalarExpr w;
                for (int i = 0; i < n; ++i)
                    if (!s.bracket(k, i, j).is_zero()) w += theta(i, a) * s.bracket(k, i, j);
                adj.omega(k, a, j) = w;
            }
    return s;
}

}  // namespace

std::vector<std::string> fixture_names() {
    return {"abelian",         "so3",       "su2",           "tangent",         "action_so3_R3", "lab_su2_R3",
            "action_lab_su2",  "tm_torsion_R2", "broken_jacobi", "nonplain_tm_R2", "nonstrict_tm_R3",
            "octonion_S7",     "monopole_S2"};
}

Fixture instantiate(const std::string& name, const Params& params) {
    Fixture fx;
    fx.name = name;
    fx.params = params;

    if (name == "abelian") {
        reject_unknown(params, {"r"});
        int r = int_param(params, "r", 1, 1, 8);
        fx.spec = point_algebra("abelian" + std::to_string(r), r);
        fx.description = "abelian Lie algebra of rank " + std::to_string(r);
        fx.expected = strict_clean();
    } else if (name == "so3") {
        reject_unknown(params, {});
        fx.spec = so3_algebra("so3");
        fx.description = "so(3) in the rotation generator basis, [L_a, L_b] = eps_abc L_c";
        fx.expected = strict_clean();
    } else if (name == "su2") {
        reject_unknown(params, {});
        fx.spec = so3_algebra("su2");
        fx.description = "su(2) in the basis -i sigma_a / 2";
        fx.expected = strict_clean();
    } else if (name == "tangent") {
        reject_unknown(params, {"n"});
        int n = int_param(params, "n", 2, 1, 6);
        fx.spec = tangent(n, "tangent_R" + std::to_string(n));
        fx.description = "tangent algebroid of R^" + std::to_string(n) + " with the trivial connection";
        fx.expected = strict_clean();
    } else if (name == "action_so3_R3") {
        reject_unknown(params, {});
        AlgebroidSpec g = so3_algebra("so3");
        ChartSpec fiber = ChartSpec::numbered("R3", "m", 3);
        auto pb = pullback_to_action(g, AdjustmentData::zero(g), fiber, rotation_anchor(fiber), "action_so3_R3");
        fx.spec = pb.spec;
        fx.adj = pb.adj;
        fx.base_spec = g;
        fx.base_adj = AdjustmentData::zero(g);
        fx.description = "so(3) acting on R^3 by rotations, flat Cartan connection";
        fx.expected = strict_clean();
    } else if (name == "lab_su2_R3" || name == "action_lab_su2") {
        reject_unknown(params, {"A_bg"});
        AlgebroidSpec lab = so3_algebra("lab_su2_R3");
        lab.base = ChartSpec::numbered("R3", "m", 3);
        lab.anchor = Tensor({3, 3});
        lab.symbols.chart = lab.base;
        auto it = params.find("A_bg");
        auto A = parse_list(it == params.end() ? kLabDefault : it->second, lab.base, 9);
        fx.spec = lab;
        lab_adjustment(fx, A);
        fx.description = "su(2) Lie algebra bundle over R^3, omega = ad(A_bg), zeta = dA_bg + 1/2 [A_bg, A_bg]";
        fx.expected = strict_clean();
        if (name == "action_lab_su2") {
            ChartSpec fiber = ChartSpec::numbered("R3y", "y", 3);
            auto pb = pullback_to_action(lab, fx.adj, fiber, rotation_anchor(fiber), "action_lab_su2");
            fx.base_spec = lab;
            fx.base_adj = fx.adj;
            fx.spec = pb.spec;
            fx.adj = pb.adj;
            fx.description = "the su(2) bundle over R^3 acting on R^3 x R^3 fiberwise by rotations";
            fx.expected.closure_zero.reset();
            fx.expected.bianchi_zero.reset();
        }
    } else if (name == "tm_torsion_R2") {
        reject_unknown(params, {});
        fx.spec = tangent(2, "tm_torsion_R2");
        fx.adj = AdjustmentData::zero(fx.spec);
        fx.adj.omega(0, 0, 0) = 1;
        fx.adj.omega(1, 1, 0) = 1;
        fx.adj.omega(0, 1, 1) = 1;
        // zeta = torsion of nabla
        for (int al = 0; al < 2; ++al)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) fx.adj.zeta(al, a, b) = fx.adj.omega(al, a, b) - fx.adj.omega(al, b, a);
        fx.description = "tangent algebroid of R^2, constant non-symmetric omega with flat opposite connection, "
                         "zeta = torsion";
        fx.expected = strict_clean();
    } else if (name == "broken_jacobi") {
        reject_unknown(params, {});
        fx.spec = point_algebra("broken_jacobi", 3);
        auto set = [&](int a, int b, int c, int v) {
            fx.spec.bracket(c, a, b) = v;
            fx.spec.bracket(c, b, a) = -v;
        };
        set(0, 1, 2, 1);  // [e1, e2] = e3
        set(1, 2, 0, 1);  // [e2, e3] = e1
        set(2, 0, 0, 1);  // [e3, e1] = e1
        fx.description = "antisymmetric bracket violating the Jacobi identity";
        fx.expected.valid = false;
    } else if (name == "nonplain_tm_R2") {
        reject_unknown(params, {});
        fx.spec = tangent(2, "nonplain_tm_R2");
        fx.adj = AdjustmentData::zero(fx.spec);
        fx.adj.omega(0, 0, 1) = m(0);
        fx.description = "tangent algebroid of R^2 with omega^1_{12} = m1, whose opposite connection is curved";
        fx.expected.tier = Tier::None;
        fx.expected.closure_zero = false;
    } else if (name == "nonstrict_tm_R3") {
        reject_unknown(params, {});
        fx.spec = tangent(3, "nonstrict_tm_R3");
        fx.adj = AdjustmentData::zero(fx.spec);
        const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
        for (int al = 0; al < 3; ++al)
            for (int k = 0; k < 3; ++k) {
                fx.adj.zeta(al, pairs[k][0], pairs[k][1]) = kNonstrictZeta[al][k];
                fx.adj.zeta(al, pairs[k][1], pairs[k][0]) = -kNonstrictZeta[al][k];
            }
        fx.description = "tangent algebroid of R^3, trivial connection, constant primitive failing strictness";
        fx.expected.tier = Tier::Covariant;
        fx.expected.closure_zero = true;
    } else if (name == "octonion_S7") {
        reject_unknown(params, {});
        fx.spec = octonion_sphere(fx.adj);
        fx.numeric_only = true;
        fx.description = "unit octonions S^7 as a graph over the imaginary part, frame p e_i, nabla_{V_i} V_j = [V_i, V_j]";
        fx.expected.tier = Tier::Plain;
    } else if (name == "monopole_S2") {
        reject_unknown(params, {"n"});
        int n = int_param(params, "n", 1, -1000, 1000);
        fx.transitions = monopole_data(n);
        fx.cover = sphere_cover();
        fx.spec = fx.transitions->group.algebra;
        fx.description = "charge " + std::to_string(n) + " monopole on S^2, U(1) written as SO(2)";
        fx.expected = strict_clean();
        fx.expected.chern = n;
    } else {
        throw Error("unknown fixture '" + name + "'");
    }
    if (fx.adj.omega.dims().empty()) fx.adj = AdjustmentData::zero(fx.spec);
    fx.spec.symbols.chart = fx.spec.base;
    return fx;
}

// ---- random instances -------------------------------------------------------------

namespace {

using Matrix = std::vector<std::vector<ScalarExpr>>;

Matrix inverse(Matrix M) {
    const int n = static_cast<int>(M.size());
    Matrix I(n, std::vector<ScalarExpr>(n));
    for (int i = 0; i < n; ++i) I[i][i] = 1;
    for (int c = 0; c < n; ++c) {
        int p = c;
        while (p < n && M[p][c].is_zero()) ++p;
        if (p == n) throw Error("frame change is singular");
        std::swap(M[c], M[p]);
        std::swap(I[c], I[p]);
        ScalarExpr inv = ScalarExpr(1) / M[c][c];
        for (int k = 0; k < n; ++k) {
            M[c][k] *= inv;
            I[c][k] *= inv;
        }
        for (int r = 0; r < n; ++r) {
            if (r == c || M[r][c].is_zero()) continue;
            ScalarExpr f = M[r][c];
            for (int k = 0; k < n; ++k) {
                M[r][k] -= f * M[c][k];
                I[r][k] -= f * I[c][k];
            }
        }
    }
    return I;
}

// Algebroid of a linear action: anchor -(X_alpha m), bracket from matrix commutators.
AlgebroidSpec linear_action(std::string name, const std::vector<SymMatrix>& X) {
    MatrixGroup G = MatrixGroup::make(name, X);
    const int r = static_cast<int>(X.size()), n = X[0].rows;
    AlgebroidSpec s(std::move(name), ChartSpec::numbered("R" + std::to_string(n), "m", n), r);
    s.bracket = G.algebra.bracket;
    for (int al = 0; al < r; ++al)
        for (int a = 0; a < n; ++a) {
            ScalarExpr v;
            for (int b = 0; b < n; ++b)
                if (!X[al](a, b).is_zero()) v -= X[al](a, b) * m(b);
            s.anchor(al, a) = v;
        }
    return s;
}

SymMatrix unit(int n, int i, int j) {
    SymMatrix E(n, n);
    E(i, j) = 1;
    return E;
}

// e'_alpha = M_alpha^beta e_beta
AlgebroidSpec change_frame(const AlgebroidSpec& s, const Matrix& M) {
    const int r = s.rank, n = s.dim();
    const Matrix Minv = inverse(M);
    AlgebroidSpec t(s.name, s.base, r);
    for (int al = 0; al < r; ++al)
        for (int a = 0; a < n; ++a) {
            ScalarExpr v;
            for (int be = 0; be < r; ++be) v += M[al][be] * s.rho(be, a);
            t.anchor(al, a) = v;
        }
    auto along = [&](int al, const ScalarExpr& f) {
        ScalarExpr v;
        for (int a = 0; a < n; ++a)
            if (!t.rho(al, a).is_zero()) v += t.rho(al, a) * differentiate(f, s.base.coords()[a]);
        return v;
    };
    for (int al = 0; al < r; ++al)
        for (int be = 0; be < r; ++be) {
            std::vector<ScalarExpr> C(r);
            for (int ep = 0; ep < r; ++ep) {
                ScalarExpr c = along(al, M[be][ep]) - along(be, M[al][ep]);
                for (int ga = 0; ga < r; ++ga)
                    for (int de = 0; de < r; ++de)
                        if (!s.f(ep, ga, de).is_zero()) c += M[al][ga] * M[be][de] * s.f(ep, ga, de);
                C[ep] = c;
            }
            for (int ka = 0; ka < r; ++ka) {
                ScalarExpr v;
                for (int ep = 0; ep < r; ++ep) v += C[ep] * Minv[ep][ka];
                t.bracket(ka, al, be) = v;
            }
        }
    return t;
}

}  // namespace

Fixture random_instance(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    Fixture fx;
    fx.name = "random";
    fx.params["seed"] = std::to_string(seed);
    fx.numeric_only = false;

    AlgebroidSpec s;
    switch (uni(0, 6)) {
        case 0: {
            std::vector<SymMatrix> L;
            for (int al = 0; al < 3; ++al) {
                SymMatrix X(3, 3);
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) X(a, b) = -eps(al, a, b);
                L.push_back(X);
            }
            s = linear_action("so3_on_R3", L);
            break;
        }
        case 1: s = linear_action("aff1_on_R2", {unit(2, 1, 1), unit(2, 1, 0)}); break;
        case 2: s = linear_action("heisenberg_on_R3", {unit(3, 0, 1), unit(3, 1, 2), unit(3, 0, 2)}); break;
        case 3: {
            SymMatrix H(2, 2);
            H(0, 0) = 1;
            H(1, 1) = -1;
            s = linear_action("sl2_on_R2", {H, unit(2, 0, 1), unit(2, 1, 0)});
            break;
        }
        case 4: {
            int n = uni(1, 3);
            s = tangent(n, "tangent_R" + std::to_string(n));
            break;
        }
        case 5: {
            int r = uni(1, 3);
            s = point_algebra("abelian" + std::to_string(r), r);
            break;
        }
        default: {
            // Lie algebra bundle with pointwise rescaled so(3) or aff(1) brackets
            int n = uni(1, 3);
            ScalarExpr h = ScalarExpr(uni(1, 2)) + ScalarExpr(uni(-1, 1)) * m(uni(0, n - 1));
            if (uni(0, 1) == 0) {
                s = so3_algebra("lab_so3");
                for (auto& x : s.bracket.data()) x *= h;
            } else {
                s = point_algebra("lab_aff1", 2);
                s.bracket(1, 0, 1) = h;
                s.bracket(1, 1, 0) = -h;
            }
            s.base = ChartSpec::numbered("R" + std::to_string(n), "m", n);
            s.anchor = Tensor({s.rank, n});
            break;
        }
    }
    const int r = s.rank, n = s.dim();
    if (r > 1 && uni(0, 1) == 1) {
        // constant invertible C times a unipotent polynomial factor
        Matrix C(r, std::vector<ScalarExpr>(r));
        for (;;) {
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < r; ++j) C[i][j] = uni(-2, 2);
            try {
                inverse(C);
                break;
            } catch (const Error&) {
            }
        }
        if (n > 0) {
            ScalarExpr u = ScalarExpr(uni(-1, 1)) * m(uni(0, n - 1));
            for (int i = 0; i < r; ++i) C[i][r - 1] += C[i][0] * u;
        }
        s = change_frame(s, C);
    }
    s.symbols.chart = s.base;
    fx.spec = s;

    auto poly = [&]() {
        if (uni(0, 3) == 0) return ScalarExpr();
        ScalarExpr p = uni(-2, 2);
        for (int a = 0; a < n; ++a) {
            p += ScalarExpr(uni(-2, 2)) * m(a);
            for (int b = a; b < n; ++b)
                if (uni(0, 2) == 0) p += ScalarExpr(uni(-2, 2)) * m(a) * m(b);
        }
        return p;
    };
    fx.adj = AdjustmentData::zero(s);
    for (auto& x : fx.adj.omega.data()) x = poly();
    for (int al = 0; al < r; ++al)
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                ScalarExpr z = poly();
                fx.adj.zeta(al, a, b) = z;
                fx.adj.zeta(al, b, a) = -z;
            }
    fx.description = s.name + " with random polynomial connection data";
    return fx;
}

// ---- spot checks ----------------------------------------------------------------

double derivative_mismatch(const ScalarExpr& e, const std::string& coord, const NumericPoint& p, double h) {
    const double sym = eval(differentiate(e, coord), p);
    NumericPoint lo = p, hi = p;
    lo.coords[coord] -= h;
    hi.coords[coord] += h;
    const double fd = (eval(e, hi) - eval(e, lo)) / (2 * h);
    return std::abs(fd - sym) / std::max(1.0, std::abs(sym));
}

namespace {

struct Residual {
    std::string name;
    std::vector<ScalarExpr> comps;
    bool symbolic_zero = true;
};

Residual tensor_residual(std::string name, const Tensor& t, bool symbolic) {
    Residual r{std::move(name), {}, true};
    for (const auto& e : t.data()) {
        if (e.is_zero()) continue;
        r.comps.push_back(e);
        if (symbolic && !is_zero(e).vanishes()) r.symbolic_zero = false;
    }
    return r;
}

void collect_functions(const Tensor& t, std::vector<ScalarExpr>& out) {
    for (const auto& e : t.data())
        if (!e.is_constant()) out.push_back(e);
}

}  // namespace

SpotReport spot_check(const Fixture& fx, std::uint64_t seed, const SpotOptions& opts) {
    SpotReport rep;
    rep.fixture = fx.name;
    rep.seed = seed;
    const bool symbolic = !fx.numeric_only;

    std::vector<Residual> residuals;
    {
        SquareReport sq = square_check(build_ce(fx.spec));
        for (const auto& e : sq.entries) {
            Residual r{"ce_square:" + e.symbol, {}, e.verdict.vanishes()};
            for (const auto& [mono, c] : e.residual.terms()) r.comps.push_back(c);
            residuals.push_back(std::move(r));
        }
    }
    const std::size_t tiers = residuals.size();
    if (symbolic) {
        const DerivedTensors T = derived_tensors(fx.spec, fx.adj);
        residuals.push_back(tensor_residual("plain", T.Rbas, symbolic));
        residuals.push_back(tensor_residual("covariant", T.R_nabla + T.nabla_bas_zeta, symbolic));
        residuals.push_back(tensor_residual("strict", strict_residual(fx.spec, fx.adj), symbolic));
    } else {
        for (const char* name : {"plain", "covariant", "strict"}) residuals.push_back(Residual{name, {}, false});
    }

    std::vector<ScalarExpr> functions;
    collect_functions(fx.spec.anchor, functions);
    collect_functions(fx.spec.bracket, functions);
    collect_functions(fx.adj.omega, functions);
    collect_functions(fx.adj.zeta, functions);
    const auto& coords = fx.spec.base.coords();

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-opts.box, opts.box);
    std::vector<double> maxima(residuals.size(), 0.0);
    int attempts = 0;
    while (rep.points < opts.points) {
        if (++attempts > 10 * opts.points) throw EvalError("spot check sampling failed for " + fx.name);
        NumericPoint p;
        for (const auto& c : coords) p.coords[c] = u(rng);
        std::vector<double> vals(residuals.size(), 0.0);
        double worst_derivative = 0.0;
        int checks = 0, fails = 0;
        try {
            for (std::size_t k = 0; k < residuals.size(); ++k)
                for (const auto& e : residuals[k].comps) vals[k] = std::max(vals[k], std::abs(eval(e, p)));
            if (symbolic) {
                for (const auto& f : functions)
                    for (const auto& c : coords) {
                        double d = derivative_mismatch(f, c, p, opts.h);
                        ++checks;
                        if (!(d <= opts.derivative_tol)) ++fails;
                        worst_derivative = std::max(worst_derivative, d);
                    }
            } else {
                const PointResiduals pr = tier_residuals_at(fx.spec, fx.adj, p);
                const std::vector<double>* v[3] = {&pr.plain, &pr.covariant, &pr.strict};
                for (std::size_t k = 0; k < 3; ++k)
                    for (double x : *v[k]) vals[tiers + k] = std::max(vals[tiers + k], std::abs(x));
                // forward-mode gradients against central differences
                const std::vector<TaylorValue> tv = eval_taylor(functions, coords, p, 1);
                for (std::size_t i = 0; i < functions.size(); ++i)
                    for (std::size_t a = 0; a < coords.size(); ++a) {
                        NumericPoint lo = p, hi = p;
                        lo.coords[coords[a]] -= opts.h;
                        hi.coords[coords[a]] += opts.h;
                        const double fd = (eval(functions[i], hi) - eval(functions[i], lo)) / (2 * opts.h);
                        const double sym = tv[i].gradient[a];
                        double d = std::abs(fd - sym) / std::max(1.0, std::abs(sym));
                        ++checks;
                        if (!(d <= opts.derivative_tol)) ++fails;
                        worst_derivative = std::max(worst_derivative, d);
                    }
            }
        } catch (const EvalError&) {
            continue;
        }
        ++rep.points;
        for (std::size_t k = 0; k < residuals.size(); ++k) maxima[k] = std::max(maxima[k], vals[k]);
        rep.derivative_checks += checks;
        rep.derivative_failures += fails;
        rep.max_derivative_error = std::max(rep.max_derivative_error, worst_derivative);
    }

    if (fx.cover && fx.transitions) {
        // transition functions and patch potentials on their overlaps
        std::vector<std::pair<ScalarExpr, const Box*>> fs;
        for (const auto& o : fx.cover->overlaps) {
            for (const auto& e : fx.transitions->g.at({o.i, o.j}).entries) fs.emplace_back(e, &o.box);
            for (const auto& a : fx.transitions->A.at(o.i))
                for (const auto& e : a) fs.emplace_back(e, &o.box);
        }
        for (int k = 0; k < opts.points; ++k)
            for (const auto& [e, box] : fs) {
                NumericPoint p;
                for (std::size_t mu = 0; mu < box->size(); ++mu) {
                    std::uniform_real_distribution<double> w((*box)[mu].first, (*box)[mu].second);
                    p.coords["x" + std::to_string(mu + 1)] = w(rng);
                }
                for (std::size_t mu = 0; mu < box->size(); ++mu) {
                    double d = derivative_mismatch(e, "x" + std::to_string(mu + 1), p, opts.h);
                    ++rep.derivative_checks;
                    if (!(d <= opts.derivative_tol)) ++rep.derivative_failures;
                    rep.max_derivative_error = std::max(rep.max_derivative_error, d);
                }
            }
    }

    for (std::size_t k = 0; k < residuals.size(); ++k) {
        SpotLine line;
        line.name = residuals[k].name;
        line.max_abs = maxima[k];
        line.symbolic_zero = residuals[k].symbolic_zero;
        line.numeric_zero = maxima[k] < opts.residual_tol;
        line.consistent = !symbolic || line.symbolic_zero == line.numeric_zero;
        rep.max_residual = std::max(rep.max_residual, maxima[k]);
        rep.consistent = rep.consistent && line.consistent;
        rep.lines.push_back(std::move(line));
    }
    rep.consistent = rep.consistent && rep.derivative_failures == 0;
    return rep;
}

}  // namespace acw
