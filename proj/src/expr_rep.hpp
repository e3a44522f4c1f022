#pragma once

#include <string>
#include <vector>

#include "acw/coeff.hpp"
#include "poly.hpp"

namespace acw::detail {

struct ExprRep {
    Poly num;
    Poly den;  // 1, or non-constant and normalized (structurally leading coefficient 1)
    std::vector<std::string> caveats;
};

struct AtomRecord {
    AtomInfo info;
    std::vector<AtomId> deps;  // sorted leaf atoms this atom depends on (itself if a leaf)
    bool transcendental = false;  // sin/cos/exp/sqrt occurs in this atom
};

const AtomRecord& record(AtomId id);
AtomId intern(AtomKind kind, std::string name, std::vector<int> partials,
              std::vector<ScalarExpr> args);

/// Canonicalize num/den (cancels common factors, records caveats).
ScalarExpr make_expr(Poly num, Poly den, std::vector<std::string> caveats = {});
ScalarExpr from_poly(Poly p);

std::string poly_text(const Poly& p);
/// Structural monomial comparison used for printing and denominator
/// normalization; independent of atom interning order.
int structural_compare(const Monomial& a, const Monomial& b);

}  // namespace acw::detail
