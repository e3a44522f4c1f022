#pragma once

// Cech cocycles of matrix-group bundles and linear action groupoids on
// finite covers, checked numerically at sampled overlap points.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "acw/gauge.hpp"

namespace acw {

/// Dense matrix of symbolic entries.
struct SymMatrix {
    int rows = 0, cols = 0;
    std::vector<ScalarExpr> entries;  // row-major

    SymMatrix() = default;
    SymMatrix(int r, int c) : rows(r), cols(c), entries(static_cast<std::size_t>(r * c)) {}
    static SymMatrix identity(int n);
    static SymMatrix rotation(const ScalarExpr& angle);  // SO(2)

    ScalarExpr& operator()(int i, int j) { return entries[static_cast<std::size_t>(i * cols + j)]; }
    const ScalarExpr& operator()(int i, int j) const { return entries[static_cast<std::size_t>(i * cols + j)]; }
    SymMatrix operator*(const SymMatrix& o) const;
    SymMatrix operator+(const SymMatrix& o) const;
    SymMatrix scaled(const ScalarExpr& c) const;
    SymMatrix transposed() const;
    SymMatrix map(const std::function<ScalarExpr(const ScalarExpr&)>& f) const;
    bool operator==(const SymMatrix& o) const = default;
};

/// Matrix Lie group given by a basis of its Lie algebra.
struct MatrixGroup {
    std::string name;
    int n = 0;
    std::vector<SymMatrix> basis;  // constant matrices T_alpha
    AlgebroidSpec algebra;         // over a point, [T_b, T_c] = f^a_bc T_a

    static MatrixGroup make(std::string name, std::vector<SymMatrix> basis);
    static MatrixGroup so2();

    /// Components of an algebra-valued matrix in the basis (trace pairing).
    std::vector<ScalarExpr> decompose(const SymMatrix& m) const;
    SymMatrix assemble(const std::vector<ScalarExpr>& comps) const;
};

/// Coordinate box used for sampling and quadrature.
using Box = std::vector<std::pair<double, double>>;

struct CoverPatch {
    std::string name;
    Box domain;  // region of the patch used for integration; the domains tile the base
};

/// Ordered overlap (i, j): a sampling box in patch-i coordinates and the
/// coordinate change x_j = change(x_i).
struct Overlap {
    int i = 0, j = 0;
    Box box;
    std::vector<ScalarExpr> change;
};

/// Triple overlap sampled in patch-i coordinates.
struct TripleOverlap {
    int i = 0, j = 0, k = 0;
    Box box;
};

struct CoverSpec {
    std::string name;
    int dim = 0;  // every patch uses coordinates x1..xdim
    std::vector<CoverPatch> patches;
    std::vector<Overlap> overlaps;
    std::vector<TripleOverlap> triples;

    PatchSpec patch() const { return PatchSpec(dim); }
    const Overlap& overlap(int i, int j) const;
};

struct TransitionData {
    MatrixGroup group;
    /// g_ij as a function of patch-i coordinates, for each ordered overlap.
    std::map<std::pair<int, int>, SymMatrix> g;
    /// Optional Higgs maps m_i into R^n, acted on by m <| g = g^{-1} m.
    std::vector<std::vector<ScalarExpr>> higgs;
    /// A_i: components A[i][alpha][mu] of the algebra-valued 1-form.
    std::vector<std::vector<std::vector<ScalarExpr>>> A;
};

struct CheckLine {
    std::string name;
    double max_residual = 0.0;
    bool passed = true;
    std::vector<double> witness;  // patch-i coordinates of the worst point
};

struct CocycleVerdict {
    bool passed = true;
    double max_residual = 0.0;
    int samples = 0;
    std::vector<CheckLine> lines;
};

struct CocycleOptions {
    int samples = 1000;
    double tolerance = 1e-9;
    std::uint64_t seed = 0x5eed;
};

/// g_ij g_ji = 1, g_ik = g_ij g_jk on triples, m_j = g_ij^{-1} m_i.
CocycleVerdict verify_cocycle(const CoverSpec& cover, const TransitionData& data, const CocycleOptions& opts = {});

/// A_j = g^{-1} A_i g + g^{-1} dg and F_j = g^{-1} F_i g on every overlap;
/// with Higgs data also dm_j + A_j m_j = g^{-1}(dm_i + A_i m_i).
CocycleVerdict glue_check(const CoverSpec& cover, const TransitionData& data, const CocycleOptions& opts = {});

/// Matrix curvature dA + A A of patch i as components F[alpha] over the patch forms.
std::vector<GradedElem> patch_curvature(const CoverSpec& cover, const TransitionData& data, int i);

struct ChernResult {
    double value = 0.0;
    long nearest = 0;
    double deviation = 0.0;
    bool integral = false;
    int nodes = 0;
};

/// (i / 2 pi) int F for SO(2) = U(1) bundles on a 2-dimensional base,
/// integrating over each patch domain.
ChernResult chern_number(const CoverSpec& cover, const TransitionData& data, double tol = 1e-12);

/// Patchwise change of trivialization by p_i (with p_inv_i = p_i^{-1}):
/// g'_ij = p_i^{-1} g_ij p_j, A'_i = p_i^{-1} A_i p_i + p_i^{-1} dp_i, m'_i = p_i^{-1} m_i.
TransitionData gauge_transform(const CoverSpec& cover, const TransitionData& data, const std::vector<SymMatrix>& p,
                               const std::vector<SymMatrix>& p_inv);

/// Two-chart cover of S^2 in polar coordinates (x1 = theta, x2 = phi).
CoverSpec sphere_cover();
/// Charge-n monopole in SO(2) form with clutching rotation by n phi.
TransitionData monopole_data(long n);

}  // namespace acw
