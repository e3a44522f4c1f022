#pragma once

// Sparse multivariate polynomials over Q in interned atoms.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "acw/coeff.hpp"

namespace acw::detail {

struct Monomial {
    // (atom, exponent) pairs sorted by atom id, exponents > 0
    std::vector<std::pair<AtomId, std::uint32_t>> f;

    bool is_one() const { return f.empty(); }
    std::uint32_t degree() const;
    std::uint32_t exponent(AtomId v) const;
    bool operator==(const Monomial& o) const { return f == o.f; }
};

/// Lexicographic order, smaller atom ids weigh more. Returns <0, 0, >0.
int lex_compare(const Monomial& a, const Monomial& b);
Monomial operator*(const Monomial& a, const Monomial& b);
/// a / b if b divides a.
std::optional<Monomial> divide(const Monomial& a, const Monomial& b);

class Poly {
  public:
    using Term = std::pair<Monomial, Rational>;

    Poly() = default;
    explicit Poly(const Rational& c);
    static Poly atom(AtomId v, std::uint32_t exp = 1);
    static Poly from_terms(std::vector<Term> terms);  // any order, duplicates merged

    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].first.is_one()); }
    Rational constant_value() const;  // valid when is_constant()
    bool is_one() const;
    const Term& leading() const { return terms_.front(); }

    Poly operator-() const;
    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator*(const Poly& o) const;
    Poly scaled(const Rational& c) const;
    Poly times_monomial(const Monomial& m, const Rational& c) const;
    bool operator==(const Poly& o) const { return terms_ == o.terms_; }

    bool contains(AtomId v) const;
    std::uint32_t degree_in(AtomId v) const;
    /// Coefficients c_k with this = sum_k c_k v^k.
    std::vector<Poly> coefficients_in(AtomId v) const;
    static Poly from_coefficients(const std::vector<Poly>& c, AtomId v);
    std::vector<AtomId> atoms() const;

    /// Make the lex-leading coefficient 1.
    Poly monic() const;

  private:
    std::vector<Term> terms_;  // strictly decreasing in lex order, nonzero coefficients
};

/// Exact quotient a / b, or nullopt if b does not divide a.
std::optional<Poly> exact_divide(const Poly& a, const Poly& b);
/// Registers a polynomial (typically a radicand) whose powers are expected in
/// denominators; gcd strips such factors by trial division first.
void register_factor(const Poly& q);
/// Monic greatest common divisor (1 when coprime).
Poly gcd(const Poly& a, const Poly& b);

}  // namespace acw::detail
