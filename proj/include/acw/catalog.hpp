#pragma once

// Built-in example algebroids, adjustments and bundle cocycles, with the
// verdicts each is expected to produce, plus a numeric spot-check harness.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "acw/adjust.hpp"
#include "acw/cocycle.hpp"

namespace acw {

using Params = std::map<std::string, std::string>;

struct ExpectedVerdicts {
    bool valid = true;
    std::optional<Tier> tier;
    std::optional<bool> closure_zero;     // closure residual vanishes on generic fields
    std::optional<bool> bianchi_zero;     // Bianchi and covariance residuals vanish
    std::optional<long> chern;            // bundle fixtures
};

struct Fixture {
    std::string name;
    Params params;
    std::string description;
    AlgebroidSpec spec;
    AdjustmentData adj;
    ExpectedVerdicts expected;
    bool numeric_only = false;  // structure functions only reliable at sampled points
    std::optional<CoverSpec> cover;
    std::optional<TransitionData> transitions;
    /// For action fixtures: the base algebroid and adjustment that were pulled back.
    std::optional<AlgebroidSpec> base_spec;
    std::optional<AdjustmentData> base_adj;
};

std::vector<std::string> fixture_names();
/// Throws Error for unknown names or bad parameters.
Fixture instantiate(const std::string& name, const Params& params = {});

/// Seeded random algebroid with polynomial connection data of degree <= 2,
/// base dimension <= 3 and rank <= 3.
Fixture random_instance(std::uint64_t seed);

struct SpotLine {
    std::string name;
    double max_abs = 0.0;      // over the sampled points
    bool symbolic_zero = false;
    bool numeric_zero = false;  // max_abs < 1e-9
    bool consistent = true;
};

struct SpotReport {
    std::string fixture;
    std::uint64_t seed = 0;
    int points = 0;
    std::vector<SpotLine> lines;
    int derivative_checks = 0;
    int derivative_failures = 0;
    double max_derivative_error = 0.0;  // relative
    double max_residual = 0.0;
    bool consistent = true;
};

struct SpotOptions {
    int points = 50;
    double h = 1e-5;
    double derivative_tol = 1e-6;
    double residual_tol = 1e-9;
    double box = 2.0;
};

/// Evaluates the fixture's symbolic residuals at seeded random points and
/// cross-checks every structure-function derivative by central differences.
SpotReport spot_check(const Fixture& fixture, std::uint64_t seed, const SpotOptions& opts = {});

/// Relative central-difference mismatch of d e / d coord at p.
double derivative_mismatch(const ScalarExpr& e, const std::string& coord, const NumericPoint& p, double h);

}  // namespace acw
