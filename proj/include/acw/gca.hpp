#pragma once

// Free graded-commutative algebras over ScalarExpr coefficients.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "acw/coeff.hpp"

namespace acw {

struct Generator {
    std::string name;
    int degree = 1;
    // bigrading metadata; signs only use `degree`
    int form_degree = 0;
    int ghost_degree = 0;
};

class GeneratorSet {
  public:
    GeneratorSet(ChartSpec chart, std::vector<Generator> gens);

    const ChartSpec& chart() const { return chart_; }
    const std::vector<Generator>& generators() const { return gens_; }
    std::size_t size() const { return gens_.size(); }
    int degree(std::size_t i) const { return gens_[i].degree; }
    bool odd(std::size_t i) const { return (gens_[i].degree & 1) != 0; }
    int index_of(std::string_view name) const;  // -1 if absent

    bool operator==(const GeneratorSet& o) const;

  private:
    ChartSpec chart_;
    std::vector<Generator> gens_;
};

using GenSetPtr = std::shared_ptr<const GeneratorSet>;
GenSetPtr make_generators(ChartSpec chart, std::vector<Generator> gens);

/// Exponent vector in generator order; odd generators have exponent 0 or 1.
using Exponents = std::vector<std::uint8_t>;

class GradedElem {
  public:
    GradedElem() = default;
    explicit GradedElem(GenSetPtr gs) : gs_(std::move(gs)) {}

    static GradedElem scalar(GenSetPtr gs, const ScalarExpr& c);
    static GradedElem generator(GenSetPtr gs, std::string_view name);
    static GradedElem generator(GenSetPtr gs, std::size_t index);
    /// Product of the listed generators (in the listed order) times c.
    static GradedElem monomial(GenSetPtr gs, const std::vector<std::size_t>& gens, const ScalarExpr& c = 1);

    const GenSetPtr& gens() const { return gs_; }
    const std::map<Exponents, ScalarExpr>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    ScalarExpr coefficient(const Exponents& m) const;
    int term_degree(const Exponents& m) const;
    /// Degree if all terms share one, else nullopt; zero is homogeneous of any degree.
    std::optional<int> homogeneous_degree() const;

    GradedElem operator-() const;
    GradedElem& operator+=(const GradedElem& o);
    GradedElem& operator-=(const GradedElem& o);
    friend GradedElem operator+(GradedElem a, const GradedElem& b) { return a += b; }
    friend GradedElem operator-(GradedElem a, const GradedElem& b) { return a -= b; }
    friend GradedElem operator*(const GradedElem& a, const GradedElem& b);
    friend GradedElem operator*(const ScalarExpr& c, const GradedElem& a);
    friend GradedElem operator*(const GradedElem& a, const ScalarExpr& c) { return c * a; }

    bool operator==(const GradedElem& o) const;
    bool operator!=(const GradedElem& o) const { return !(*this == o); }

    GradedElem map_coefficients(const std::function<ScalarExpr(const ScalarExpr&)>& f) const;
    /// Keep only terms whose exponent on every listed generator is zero.
    GradedElem drop_generators(const std::vector<std::size_t>& gens) const;

    std::string str() const;

    /// Adds c * m, with m already in normal form.
    void add_term(const Exponents& m, const ScalarExpr& c);

  private:
    void require_same(const GradedElem& o) const;

    GenSetPtr gs_;
    std::map<Exponents, ScalarExpr> terms_;
};

std::ostream& operator<<(std::ostream& os, const GradedElem& e);

/// Sorted, sign-normalized element from raw (generator sequence, coefficient) pairs.
GradedElem normal_form(GenSetPtr gs, const std::vector<std::pair<std::vector<std::string>, ScalarExpr>>& raw);

/// A graded derivation of the algebra generated by chart coordinates and
/// generators. Coefficients are differentiated as
///   D(f) = sum_a (d f / d m^a) D(m^a) + sum_t (d f / d t) D(t)
/// where t runs over non-coordinate leaf atoms with an `atom_image`.
struct DerivationSpec {
    GenSetPtr gs;
    int degree = 1;
    std::vector<GradedElem> coord_images;  // per chart coordinate
    std::vector<GradedElem> gen_images;    // per generator
    std::function<std::optional<GradedElem>(AtomId)> atom_image;

    /// Validates homogeneity: image of a symbol of degree k has degree k + degree.
    static DerivationSpec make(GenSetPtr gs, int degree, std::map<std::string, GradedElem> coord_images,
                               std::map<std::string, GradedElem> gen_images);
    void validate() const;
};

GradedElem apply_derivation(const DerivationSpec& D, const GradedElem& e);
/// D applied to a degree-0 coefficient.
GradedElem apply_derivation(const DerivationSpec& D, const ScalarExpr& f);

/// Overall verdict on whether an element vanishes: ExactZero if no terms,
/// NonZero if any coefficient is NonZero, else NumericZero.
ZeroVerdict vanishes(const GradedElem& e, const ZeroTestOptions& opts = {});

struct SquareResidual {
    std::string symbol;
    GradedElem residual;
    ZeroVerdict verdict;
};

struct SquareReport {
    std::vector<SquareResidual> entries;  // one per coordinate and generator
    bool clean() const;                   // every residual vanishes
    bool exact() const;                   // every residual ExactZero
    std::vector<const SquareResidual*> failures() const;
};

SquareReport square_check(const DerivationSpec& D, const ZeroTestOptions& opts = {});

/// Degree-preserving algebra morphism: coefficients mapped by `coeff`,
/// generator i sent to `images[i]`, products preserved in order.
GradedElem apply_morphism(const GradedElem& e, const GenSetPtr& target,
                          const std::function<ScalarExpr(const ScalarExpr&)>& coeff,
                          const std::vector<GradedElem>& images);

}  // namespace acw
