#pragma once

// Plain, covariant and strict adjustments of a connection on an algebroid.

#include <cstdint>
#include <string>
#include <vector>

#include "acw/algebroid.hpp"

namespace acw {

enum class Tier { None, Plain, Covariant, Strict };
enum class Confidence { Exact, Numeric };

std::string to_string(Tier t);
std::string to_string(Confidence c);

struct ConditionResult {
    std::string name;
    Tensor residual;
    bool vanishes = false;
    Confidence confidence = Confidence::Exact;
    /// Index tuples (0-based) of the components that failed.
    std::vector<std::vector<int>> failing;
    std::vector<std::string> caveats;
};

struct AdjustmentVerdict {
    Tier tier = Tier::None;
    Confidence confidence = Confidence::Exact;
    std::vector<ConditionResult> conditions;  // plain, covariant, strict as far as checked

    bool reached(Tier t) const { return static_cast<int>(tier) >= static_cast<int>(t); }
    const ConditionResult* find(const std::string& name) const;
};

/// Rbas == 0.
AdjustmentVerdict check_plain(const AlgebroidSpec& spec, const AdjustmentData& adj, const ZeroTestOptions& opts = {});
/// Plain and R_nabla + nabla^bas zeta == 0.
AdjustmentVerdict check_covariant(const AlgebroidSpec& spec, const AdjustmentData& adj,
                                  const ZeroTestOptions& opts = {});
/// Covariant and Alt[1/6 d^nabla zeta - 1/2 zeta r zeta] == 0.
AdjustmentVerdict check_strict(const AlgebroidSpec& spec, const AdjustmentData& adj,
                               const ZeroTestOptions& opts = {});

struct SampleOptions {
    int points = 20;
    double tolerance = 1e-9;  // absolute, per component
    double box = 2.0;         // coordinates drawn from [-box, box]
    std::uint64_t seed = 0x5eed;
};

/// Values at p of the three tier residuals (plain, covariance, strictness),
/// flattened in the index order of the symbolic tensors. Computed in floating
/// point from the values and first derivatives of the structure functions.
struct PointResiduals {
    std::vector<double> plain, covariant, strict;
};
PointResiduals tier_residuals_at(const AlgebroidSpec& spec, const AdjustmentData& adj, const NumericPoint& p);

/// The strict-tier conditions evaluated at sampled points through first jets
/// of the structure functions. For data too large to normalize symbolically;
/// the residual tensors hold the largest absolute value seen per component.
AdjustmentVerdict check_strict_sampled(const AlgebroidSpec& spec, const AdjustmentData& adj,
                                       const SampleOptions& opts = {});

/// Covariance residual R_nabla + nabla^bas zeta, indexed (alpha, a, b, beta).
Tensor covariance_residual(const AlgebroidSpec& spec, const AdjustmentData& adj);
/// Strictness residual Alt[1/6 d^nabla zeta - 1/2 zeta r zeta], indexed (alpha, a, b, c).
Tensor strict_residual(const AlgebroidSpec& spec, const AdjustmentData& adj);
/// The same condition in the form Alt[d^nabla zeta - 3 zeta r zeta].
Tensor strict_residual_definition(const AlgebroidSpec& spec, const AdjustmentData& adj);

/// d^{nabla^zeta} zeta for the connection omega - zeta r.
Tensor nabla_zeta_crosscheck(const AlgebroidSpec& spec, const AdjustmentData& adj);

/// crosscheck == strict_crosscheck_factor * strict_residual.
inline constexpr int strict_crosscheck_factor = 6;

}  // namespace acw
