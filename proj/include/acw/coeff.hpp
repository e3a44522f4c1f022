#pragma once

// Scalar coefficient functions on coordinate charts.
//
// A ScalarExpr is held in a canonical rational-function form over "atoms":
// chart coordinates, opaque field symbols (with a sorted multi-index of
// formal partial derivatives), and the elementary functions sin, cos, exp
// and sqrt of canonical arguments. Atoms are treated as algebraically
// independent, so two expressions are equal iff their canonical forms
// coincide. Identities that need transcendental relations (sin^2+cos^2=1)
// are only detectable numerically; see is_zero().

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace acw {

using Rational = mpq_class;

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
  public:
    ParseError(const std::string& msg, std::size_t pos);
    std::size_t position() const { return pos_; }

  private:
    std::size_t pos_;
};

class EvalError : public Error {
  public:
    using Error::Error;
};

class ChartSpec {
  public:
    ChartSpec() = default;
    ChartSpec(std::string name, std::vector<std::string> coords);

    /// Chart named `name` with coordinates prefix1..prefixN.
    static ChartSpec numbered(std::string name, std::string_view prefix, int dim);

    const std::string& name() const { return name_; }
    const std::vector<std::string>& coords() const { return coords_; }
    int dim() const { return static_cast<int>(coords_.size()); }
    bool has(std::string_view coord) const;
    int index_of(std::string_view coord) const;

    bool operator==(const ChartSpec&) const = default;

  private:
    std::string name_;
    std::vector<std::string> coords_;
};

namespace detail {
struct ExprRep;
}

using AtomId = std::uint32_t;

class ScalarExpr {
  public:
    ScalarExpr();
    ScalarExpr(long value);  // NOLINT(google-explicit-constructor)
    ScalarExpr(int value) : ScalarExpr(static_cast<long>(value)) {}  // NOLINT
    ScalarExpr(const Rational& value);  // NOLINT

    static ScalarExpr coord(std::string_view name);
    /// Opaque smooth function symbol applied to `args`. `partials` lists the
    /// argument slots (0-based) of formal partial derivatives; order is
    /// irrelevant since mixed partials commute.
    static ScalarExpr opaque(std::string_view name, std::vector<ScalarExpr> args,
                             std::vector<int> partials = {});
    static ScalarExpr sin(const ScalarExpr& arg);
    static ScalarExpr cos(const ScalarExpr& arg);
    static ScalarExpr exp(const ScalarExpr& arg);
    static ScalarExpr sqrt(const ScalarExpr& arg);

    ScalarExpr operator-() const;
    ScalarExpr& operator+=(const ScalarExpr& o);
    ScalarExpr& operator-=(const ScalarExpr& o);
    ScalarExpr& operator*=(const ScalarExpr& o);
    ScalarExpr& operator/=(const ScalarExpr& o);
    friend ScalarExpr operator+(ScalarExpr a, const ScalarExpr& b) { return a += b; }
    friend ScalarExpr operator-(ScalarExpr a, const ScalarExpr& b) { return a -= b; }
    friend ScalarExpr operator*(ScalarExpr a, const ScalarExpr& b) { return a *= b; }
    friend ScalarExpr operator/(ScalarExpr a, const ScalarExpr& b) { return a /= b; }
    ScalarExpr pow(int n) const;

    /// Structural equality of canonical forms (domain caveats ignored).
    bool operator==(const ScalarExpr& o) const;
    bool operator!=(const ScalarExpr& o) const { return !(*this == o); }

    bool is_zero() const;
    bool is_constant() const;
    std::optional<Rational> constant_value() const;
    /// True when the canonical denominator is 1.
    bool is_polynomial() const;
    /// True when no transcendental atom occurs anywhere in the expression.
    bool is_rational_function() const;
    std::size_t term_count() const;

    /// Factors cancelled while reducing to canonical form; the expression is
    /// undefined where any of them vanishes.
    const std::vector<std::string>& caveats() const;

    /// Deterministic textual form, re-parseable by parse().
    std::string str() const;

    const detail::ExprRep& rep() const { return *rep_; }
    explicit ScalarExpr(std::shared_ptr<const detail::ExprRep> rep) : rep_(std::move(rep)) {}

  private:
    std::shared_ptr<const detail::ExprRep> rep_;
};

std::ostream& operator<<(std::ostream& os, const ScalarExpr& e);

/// Symbols known to the parser.
struct SymbolTable {
    ChartSpec chart;
    std::map<std::string, int> opaque_arity;
    std::map<std::string, ScalarExpr> constants;

    SymbolTable() = default;
    explicit SymbolTable(ChartSpec c) : chart(std::move(c)) {}
    SymbolTable& declare(std::string name, int arity) {
        opaque_arity[std::move(name)] = arity;
        return *this;
    }
};

ScalarExpr parse(std::string_view src, const SymbolTable& symbols);
ScalarExpr parse(std::string_view src, const ChartSpec& chart);

ScalarExpr differentiate(const ScalarExpr& e, std::string_view coord);
/// Checked variant: throws Error if `coord` is not a coordinate of `chart`.
ScalarExpr differentiate(const ScalarExpr& e, std::string_view coord, const ChartSpec& chart);
/// Derivative with respect to a leaf atom (a coordinate or an opaque jet),
/// treating every other leaf as independent.
ScalarExpr differentiate_atom(const ScalarExpr& e, AtomId leaf);

/// Replace coordinates by expressions.
ScalarExpr substitute(const ScalarExpr& e, const std::map<std::string, ScalarExpr>& coords);
/// Replace leaf atoms by expressions.
ScalarExpr substitute_atoms(const ScalarExpr& e, const std::map<AtomId, ScalarExpr>& repl);

/// Replace the opaque symbol `name` by a closed form. `slots[k]` names the
/// coordinate standing for argument slot k inside `closed_form`; formal
/// partials become genuine derivatives.
ScalarExpr substitute_opaque(const ScalarExpr& e, std::string_view name,
                             const ScalarExpr& closed_form,
                             const std::vector<std::string>& slots);

// ---- atoms --------------------------------------------------------------

enum class AtomKind : std::uint8_t { Coord, Opaque, Sin, Cos, Exp, Sqrt };

struct AtomInfo {
    AtomKind kind;
    std::string name;
    std::vector<int> partials;  // sorted slot indices
    std::vector<ScalarExpr> args;
    std::string text;  // canonical printed form
};

const AtomInfo& atom_info(AtomId id);
AtomId coord_atom(std::string_view name);
/// Leaf atoms (coordinates and opaque jets) reachable from `e`, including
/// those nested inside arguments.
std::vector<AtomId> leaf_atoms(const ScalarExpr& e);
/// Atoms occurring directly in the canonical form of `e`.
std::vector<AtomId> top_atoms(const ScalarExpr& e);

// ---- numerics -----------------------------------------------------------

struct NumericPoint {
    std::map<std::string, double> coords;
    /// (symbol, sorted partial slots) -> value, used for opaque jets.
    std::map<std::pair<std::string, std::vector<int>>, double> opaque;
    /// Direct valuation of leaf atoms; takes precedence over the maps above.
    std::map<AtomId, double> atoms;
};

double eval(const ScalarExpr& e, const NumericPoint& p);

/// Value, gradient and (for order 2) Hessian of e along `coords` at p, by
/// forward propagation of truncated Taylor series.
struct TaylorValue {
    double value = 0.0;
    std::vector<double> gradient;  // d/d coords[a]
    std::vector<double> hessian;   // row-major, empty unless order 2
};

TaylorValue eval_taylor(const ScalarExpr& e, const std::vector<std::string>& coords, const NumericPoint& p,
                        int order = 1);
/// Batched form sharing subexpression values between the entries.
std::vector<TaylorValue> eval_taylor(const std::vector<ScalarExpr>& es, const std::vector<std::string>& coords,
                                     const NumericPoint& p, int order = 1);

enum class ZeroKind { ExactZero, NumericZero, NonZero };

struct ZeroVerdict {
    ZeroKind kind = ZeroKind::ExactZero;
    int samples = 0;             // numeric samples taken
    double max_abs = 0.0;        // largest |e(p)| seen
    NumericPoint witness;        // for NonZero
    double witness_value = 0.0;  // e(witness)
    std::vector<std::string> caveats;

    bool vanishes() const { return kind != ZeroKind::NonZero; }
};

struct ZeroTestOptions {
    int samples = 20;
    double tolerance = 1e-9;
    double witness_threshold = 1e-6;
    double box_lo = -2.0;
    double box_hi = 2.0;
    std::uint64_t seed = 0x5eed;
};

ZeroVerdict is_zero(const ScalarExpr& e, const ZeroTestOptions& opts = {});

std::string to_string(ZeroKind k);

}  // namespace acw
