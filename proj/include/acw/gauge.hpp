#pragma once

// Local adjusted connections on a coordinate patch: curvatures, flatness
// and Bianchi residuals, gauge variations and their closure.
//
// Gauge parameters are commuting parameter fields; every displayed
// transformation is read with the parameter in the position written.

#include <string>
#include <vector>

#include "acw/algebroid.hpp"

namespace acw {

/// Patch chart x1..xd with the de Rham generators dx1..dxd.
class PatchSpec {
  public:
    explicit PatchSpec(int dim, std::string prefix = "x");

    const ChartSpec& chart() const { return chart_; }
    const GenSetPtr& forms() const { return gs_; }
    int dim() const { return chart_.dim(); }

    GradedElem zero() const { return GradedElem(gs_); }
    GradedElem scalar(const ScalarExpr& f) const { return GradedElem::scalar(gs_, f); }
    GradedElem dx(int mu) const { return GradedElem::generator(gs_, static_cast<std::size_t>(mu)); }
    GradedElem one_form(const std::vector<ScalarExpr>& comps) const;
    /// Coefficient of dx^mu in a 1-form.
    ScalarExpr component(const GradedElem& form, int mu) const;
    /// Coefficient of dx^mu dx^nu (mu < nu) in a 2-form.
    ScalarExpr component(const GradedElem& form, int mu, int nu) const;
    /// Scalar part of a 0-form.
    ScalarExpr scalar_part(const GradedElem& e) const;

    /// Exterior derivative.
    GradedElem d(const GradedElem& e) const;
    GradedElem d(const ScalarExpr& f) const;

    /// Opaque field symbol name(x1, ..., xd).
    ScalarExpr field(const std::string& name) const;
    const DerivationSpec& de_rham() const { return d_; }

  private:
    ChartSpec chart_;
    GenSetPtr gs_;
    DerivationSpec d_;
};

struct PatchFieldConfig {
    std::vector<ScalarExpr> phi;  // phi^a
    std::vector<GradedElem> A_g;  // A^alpha, 1-forms
    std::vector<GradedElem> A_M;  // A_M^a, 1-forms
    std::vector<GradedElem> B;    // B^alpha, 2-forms

    /// Opaque fields phi<a>, A<alpha>_<mu>, AM<a>_<mu>, B<alpha>_<mu>_<nu>.
    static PatchFieldConfig generic(const AlgebroidSpec& spec, const PatchSpec& patch);
};

struct GhostConfig {
    std::vector<ScalarExpr> c_g;     // c^alpha
    std::vector<ScalarExpr> c_M;     // c_M^a
    std::vector<GradedElem> lambda;  // lambda^alpha, 1-forms
    std::vector<ScalarExpr> chi;     // chi^alpha

    /// Opaque parameters c<alpha>, cM<a>, lam<alpha>_<mu>, chi<alpha>.
    static GhostConfig generic(const AlgebroidSpec& spec, const PatchSpec& patch);
    static GhostConfig zero(const AlgebroidSpec& spec, const PatchSpec& patch);
    /// c_M = lambda = chi = 0.
    GhostConfig truncated() const;
};

/// Opaque gauge parameter prefix<alpha> for alpha = 1..rank.
std::vector<ScalarExpr> generic_parameter(const AlgebroidSpec& spec, const PatchSpec& patch,
                                          const std::string& prefix);

/// Structure functions and derived tensors composed with phi.
struct PulledBack {
    Tensor rho;     // (alpha, a)
    Tensor drho;    // (alpha, a, b) = d_b r^a_alpha
    Tensor f;       // (alpha, beta, gamma)
    Tensor omega;   // (alpha, a, beta)
    Tensor zeta;    // (alpha, a, b)
    Tensor Rbas;    // (alpha, beta, gamma, a)
    Tensor Rcov;    // (alpha, a, b, beta) = R + nabla^bas zeta
    Tensor cubic;   // (alpha, a, b, c) = 1/6 d^nabla zeta - 1/2 zeta r zeta
    Tensor nabla_zeta;  // (alpha, a, beta)

    PulledBack(const AlgebroidSpec& spec, const AdjustmentData& adj, const std::vector<ScalarExpr>& phi);
};

struct Curvatures {
    std::vector<GradedElem> E;  // E^a
    std::vector<GradedElem> F;  // F^alpha
};

Curvatures curvature_components(const AlgebroidSpec& spec, const AdjustmentData& adj, const PatchSpec& patch,
                                const std::vector<ScalarExpr>& phi, const std::vector<GradedElem>& A);

/// Residuals of the flatness equations in the order phi, A_M, A_g, B.
struct FlatResiduals {
    std::vector<GradedElem> phi, A_M, A_g, B;
};

FlatResiduals flat_residuals(const AlgebroidSpec& spec, const AdjustmentData& adj, const PatchSpec& patch,
                             const PatchFieldConfig& cfg);

struct BianchiResiduals {
    std::vector<GradedElem> E;  // per a
    std::vector<GradedElem> F;  // per alpha
};

BianchiResiduals bianchi_residuals(const AlgebroidSpec& spec, const AdjustmentData& adj, const PatchSpec& patch,
                                   const std::vector<ScalarExpr>& phi, const std::vector<GradedElem>& A);

struct GaugeVariation {
    std::vector<ScalarExpr> phi;      // delta phi^a
    std::vector<GradedElem> A;        // delta A^alpha
    std::vector<GradedElem> E, F;     // displayed formulas
    std::vector<GradedElem> E_lin, F_lin;  // linearization of curvature_components
};

GaugeVariation gauge_variation(const AlgebroidSpec& spec, const AdjustmentData& adj, const PatchSpec& patch,
                               const std::vector<ScalarExpr>& phi, const std::vector<GradedElem>& A,
                               const std::vector<ScalarExpr>& c);

struct FullVariation {
    std::vector<ScalarExpr> phi;
    std::vector<GradedElem> A_M, A_g, B;
    std::vector<ScalarExpr> c_M, c_g;
    std::vector<GradedElem> lambda;
};

FullVariation full_variation(const AlgebroidSpec& spec, const AdjustmentData& adj, const PatchSpec& patch,
                             const PatchFieldConfig& cfg, const GhostConfig& ghosts);

struct ClosureResult {
    std::vector<ScalarExpr> phi_residual;  // [d1, d2] phi - d3 phi
    std::vector<GradedElem> residual;      // [d1, d2] A - d3 A
    std::vector<GradedElem> expected;      // closure_factor * Rbas(c1, c2)(E)
    std::vector<ScalarExpr> c3;            // f(c1, c2)
};

/// residual^alpha = closure_factor * Rbas^alpha_{beta gamma a} c1^beta c2^gamma E^a
inline constexpr int closure_factor = -1;

ClosureResult closure_residual(const AlgebroidSpec& spec, const AdjustmentData& adj, const PatchSpec& patch,
                               const std::vector<ScalarExpr>& phi, const std::vector<GradedElem>& A,
                               const std::vector<ScalarExpr>& c1, const std::vector<ScalarExpr>& c2);

/// delta F (linearized) + (f + r omega) c F, per alpha.
std::vector<GradedElem> covariance_check(const AlgebroidSpec& spec, const AdjustmentData& adj,
                                         const PatchSpec& patch, const std::vector<ScalarExpr>& phi,
                                         const std::vector<GradedElem>& A, const std::vector<ScalarExpr>& c);

/// Variation derivation acting on opaque patch fields: each (field, variation)
/// pair sends the field's jets to the matching derivatives of the variation.
class FieldVariation {
  public:
    explicit FieldVariation(const PatchSpec& patch);
    FieldVariation(const FieldVariation&) = delete;
    FieldVariation& operator=(const FieldVariation&) = delete;
    void set(const ScalarExpr& field, const ScalarExpr& variation);
    void set_form(const GradedElem& field, const GradedElem& variation);

    ScalarExpr apply(const ScalarExpr& e) const;
    GradedElem apply(const GradedElem& e) const;

  private:
    const PatchSpec& patch_;
    std::map<std::string, ScalarExpr> vars_;
    mutable std::map<AtomId, GradedElem> memo_;
    DerivationSpec D_;
};

/// Replace every first jet of phi by the anchor image of A (imposes E = 0).
ScalarExpr impose_vanishing_E(const ScalarExpr& e, const AlgebroidSpec& spec, const PatchSpec& patch,
                              const std::vector<ScalarExpr>& phi, const std::vector<GradedElem>& A);

}  // namespace acw
