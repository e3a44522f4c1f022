#pragma once

// Lie algebroids in a global frame over one chart, their connection data
// and the Chevalley-Eilenberg and split Weil differentials.

#include <initializer_list>
#include <string>
#include <vector>

#include "acw/coeff.hpp"
#include "acw/gca.hpp"

namespace acw {

/// Dense table of ScalarExpr with row-major indexing.
class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(std::vector<int> dims);

    const std::vector<int>& dims() const { return dims_; }
    std::size_t size() const { return data_.size(); }
    std::vector<ScalarExpr>& data() { return data_; }
    const std::vector<ScalarExpr>& data() const { return data_; }

    template <typename... I>
    ScalarExpr& operator()(I... idx) {
        return data_[offset({static_cast<int>(idx)...})];
    }
    template <typename... I>
    const ScalarExpr& operator()(I... idx) const {
        return data_[offset({static_cast<int>(idx)...})];
    }
    ScalarExpr& at(const std::vector<int>& idx) { return data_[offset(idx)]; }
    const ScalarExpr& at(const std::vector<int>& idx) const { return data_[offset(idx)]; }
    std::vector<int> index_of(std::size_t flat) const;

    bool exact_zero() const;
    Tensor operator+(const Tensor& o) const;
    Tensor operator-(const Tensor& o) const;
    Tensor scaled(const ScalarExpr& c) const;
    Tensor map(const std::function<ScalarExpr(const ScalarExpr&)>& f) const;
    bool operator==(const Tensor& o) const { return dims_ == o.dims_ && data_ == o.data_; }

  private:
    std::size_t offset(std::initializer_list<int> idx) const;
    std::size_t offset(const std::vector<int>& idx) const;

    std::vector<int> dims_;
    std::vector<ScalarExpr> data_;
};

struct AlgebroidSpec {
    std::string name;
    ChartSpec base;   // coordinates m^a
    int rank = 0;
    Tensor anchor;    // anchor(alpha, a)         = r^a_alpha
    Tensor bracket;   // bracket(alpha, beta, gamma) = f^alpha_{beta gamma}
    SymbolTable symbols;  // opaque symbols used by the coefficients

    AlgebroidSpec() = default;
    AlgebroidSpec(std::string name, ChartSpec base, int rank);

    int dim() const { return base.dim(); }
    const ScalarExpr& rho(int alpha, int a) const { return anchor(alpha, a); }
    const ScalarExpr& f(int alpha, int beta, int gamma) const { return bracket(alpha, beta, gamma); }

    /// Shape and exact antisymmetry of the bracket; throws Error.
    void check() const;
};

struct AdjustmentData {
    Tensor omega;  // omega(alpha, a, beta) = omega^alpha_{a beta}
    Tensor zeta;   // zeta(alpha, a, b)     = zeta^alpha_{ab}

    static AdjustmentData zero(const AlgebroidSpec& spec);
    void check(const AlgebroidSpec& spec) const;
};

struct DerivedTensors {
    Tensor R_nabla;         // (alpha, a, b, beta)
    Tensor Rbas;            // (alpha, beta, gamma, a)
    Tensor nabla_bas_zeta;  // (alpha, a, b, beta)
    Tensor dnabla_zeta;     // (alpha, a, b, c)
    Tensor nabla_zeta;      // (alpha, a, beta): omega^alpha_{a beta} - zeta^alpha_{ab} r^b_beta
};

/// Generators xi1..xir of degree 1 over the base chart.
GenSetPtr ce_generators(const AlgebroidSpec& spec);
DerivationSpec build_ce(const AlgebroidSpec& spec);

struct ValidationReport {
    bool passed = false;
    bool antisymmetric = true;
    SquareReport square;
    std::vector<std::string> messages;
};

ValidationReport validate(const AlgebroidSpec& spec, const ZeroTestOptions& opts = {});

DerivedTensors derived_tensors(const AlgebroidSpec& spec, const AdjustmentData& adj);

enum class WeilPresentation { Shifted, PreChange };

struct WeilAlgebra {
    GenSetPtr gs;
    DerivationSpec differential;
    WeilPresentation presentation = WeilPresentation::Shifted;
    std::vector<std::size_t> xi, mbar, xibar;  // generator indices

    /// Generators spanning the curvature part {mbar, xibar}.
    std::vector<std::size_t> curvature_generators() const;
};

/// Builds the Weil algebra differential. When `verify` is set the
/// nilpotency residuals must vanish, otherwise Error is thrown.
WeilAlgebra build_weil(const AlgebroidSpec& spec, const AdjustmentData& adj,
                       WeilPresentation presentation = WeilPresentation::Shifted, bool verify = true,
                       const ZeroTestOptions& opts = {});

/// Image of a Weil element under the projection to the CE algebra
/// (mbar, xibar set to zero).
GradedElem project_to_ce(const WeilAlgebra& W, const GradedElem& e, const GenSetPtr& ce);

/// Action algebroid of `g` acting on N = base x fiber along the projection
/// to the base. `fiber_anchor(alpha, i)` is the component of the action
/// vector field along fiber coordinate i. The connection and primitive are
/// pulled back along the projection.
struct ActionPullback {
    AlgebroidSpec spec;
    AdjustmentData adj;
};

ActionPullback pullback_to_action(const AlgebroidSpec& g, const AdjustmentData& adj, const ChartSpec& fiber,
                                  const Tensor& fiber_anchor, std::string name = {});

}  // namespace acw
