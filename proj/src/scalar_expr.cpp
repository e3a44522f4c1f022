#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <unordered_map>

#include "expr_rep.hpp"

namespace acw {

using detail::ExprRep;
using detail::Monomial;
using detail::Poly;

ParseError::ParseError(const std::string& msg, std::size_t pos)
    : Error("parse error at " + std::to_string(pos) + ": " + msg), pos_(pos) {}

ChartSpec::ChartSpec(std::string name, std::vector<std::string> coords)
    : name_(std::move(name)), coords_(std::move(coords)) {}

ChartSpec ChartSpec::numbered(std::string name, std::string_view prefix, int dim) {
    std::vector<std::string> c;
    for (int i = 1; i <= dim; ++i) c.push_back(std::string(prefix) + std::to_string(i));
    return ChartSpec(std::move(name), std::move(c));
}

bool ChartSpec::has(std::string_view coord) const { return index_of(coord) >= 0; }

int ChartSpec::index_of(std::string_view coord) const {
    for (std::size_t i = 0; i < coords_.size(); ++i)
        if (coords_[i] == coord) return static_cast<int>(i);
    return -1;
}

namespace detail {
namespace {

void merge_caveats(std::vector<std::string>& into, const std::vector<std::string>& from) {
    if (from.empty()) return;
    into.insert(into.end(), from.begin(), from.end());
    std::sort(into.begin(), into.end());
    into.erase(std::unique(into.begin(), into.end()), into.end());
}

const std::shared_ptr<const ExprRep>& zero_rep() {
    static const auto z = std::make_shared<const ExprRep>(ExprRep{Poly(), Poly(Rational(1)), {}});
    return z;
}

bool is_radical(AtomId v) {
    const AtomInfo& info = record(v).info;
    return info.kind == AtomKind::Sqrt && info.args[0].rep().den.is_one();
}

// Largest radical atom t with t^2 in p (or any t, when `any` is set).
std::optional<AtomId> reducible_radical(const Poly& p, bool any, std::optional<AtomId> below) {
    std::optional<AtomId> best;
    for (const auto& [m, c] : p.terms())
        for (const auto& [v, e] : m.f)
            if ((any || e >= 2) && (!below || v < *below) && (!best || v > *best) && is_radical(v)) best = v;
    return best;
}

// p = A + B t modulo t^2 = u
std::pair<Poly, Poly> split_radical(const Poly& p, AtomId t, const Poly& u) {
    std::vector<Poly> powers = {Poly(Rational(1))};
    std::vector<Poly::Term> a, b;
    for (const auto& [m, c] : p.terms()) {
        std::uint32_t k = m.exponent(t);
        Monomial rest;
        for (const auto& f : m.f)
            if (f.first != t) rest.f.push_back(f);
        auto& into = k % 2 == 0 ? a : b;
        if (k < 2) {
            into.emplace_back(std::move(rest), c);
            continue;
        }
        while (powers.size() <= k / 2) powers.push_back(powers.back() * u);
        const Poly q = powers[k / 2].times_monomial(rest, c);
        into.insert(into.end(), q.terms().begin(), q.terms().end());
    }
    return {Poly::from_terms(std::move(a)), Poly::from_terms(std::move(b))};
}

// Reduces num/den modulo t^2 = u for every square root t of a polynomial u,
// outermost radicals first, and clears radicals from the denominator.
void reduce_radicals(Poly& num, Poly& den, std::vector<std::string>& caveats) {
    std::optional<AtomId> bound;
    for (;;) {
        auto tn = reducible_radical(num, false, bound), td = reducible_radical(den, true, bound);
        if (!tn && !td) return;
        AtomId t = std::max(tn.value_or(0), td.value_or(0));
        const Poly& u = record(t).info.args[0].rep().num;
        const Poly T = Poly::from_terms({{Monomial{{{t, 1}}}, Rational(1)}});
        auto [A, B] = split_radical(num, t, u);
        auto [C, E] = split_radical(den, t, u);
        if (E.is_zero()) {
            num = A + B * T;
            den = std::move(C);
        } else {
            register_factor(u);
            Poly conj = C - E * T;
            merge_caveats(caveats, {poly_text(conj)});
            num = (A * C - B * E * u) + (B * C - A * E) * T;
            den = C * C - E * E * u;
        }
        bound = t;
    }
}

bool has_radical(const Poly& p) { return reducible_radical(p, true, std::nullopt).has_value(); }

}  // namespace

ScalarExpr from_poly(Poly p) {
    return ScalarExpr(std::make_shared<const ExprRep>(ExprRep{std::move(p), Poly(Rational(1)), {}}));
}

ScalarExpr make_expr(Poly num, Poly den, std::vector<std::string> caveats) {
    if (den.is_zero()) throw EvalError("division by zero");
    reduce_radicals(num, den, caveats);
    if (den.is_zero()) throw EvalError("division by zero");
    if (!den.is_constant() && !num.is_zero()) {
        Poly g = gcd(num, den);
        if (!g.is_constant()) {
            num = exact_divide(num, g).value();
            den = exact_divide(den, g).value();
            merge_caveats(caveats, {poly_text(g)});
        }
    }
    if (num.is_zero()) {
        return ScalarExpr(std::make_shared<const ExprRep>(ExprRep{Poly(), Poly(Rational(1)), std::move(caveats)}));
    }
    Rational lc;
    if (den.is_constant()) {
        lc = den.constant_value();
        den = Poly(Rational(1));
    } else {
        const Poly::Term* lead = &den.terms().front();
        for (const auto& t : den.terms())
            if (structural_compare(t.first, lead->first) > 0) lead = &t;
        lc = lead->second;
        if (lc != 1) den = den.scaled(Rational(1) / lc);
    }
    if (lc != 1) num = num.scaled(Rational(1) / lc);
    std::sort(caveats.begin(), caveats.end());
    caveats.erase(std::unique(caveats.begin(), caveats.end()), caveats.end());
    return ScalarExpr(std::make_shared<const ExprRep>(ExprRep{std::move(num), std::move(den), std::move(caveats)}));
}

}  // namespace detail

// ---- ScalarExpr -----------------------------------------------------------

ScalarExpr::ScalarExpr() : rep_(detail::zero_rep()) {}
ScalarExpr::ScalarExpr(long value) : ScalarExpr(Rational(value)) {}
ScalarExpr::ScalarExpr(const Rational& value)
    : rep_(std::make_shared<const ExprRep>(ExprRep{Poly(value), Poly(Rational(1)), {}})) {}

namespace {

ScalarExpr atom_expr(AtomId id) { return detail::from_poly(Poly::atom(id)); }

void check_name(std::string_view name) {
    if (name.empty()) throw Error("empty symbol name");
}

}  // namespace

ScalarExpr ScalarExpr::coord(std::string_view name) {
    check_name(name);
    return atom_expr(detail::intern(AtomKind::Coord, std::string(name), {}, {}));
}

ScalarExpr ScalarExpr::opaque(std::string_view name, std::vector<ScalarExpr> args, std::vector<int> partials) {
    check_name(name);
    for (int k : partials)
        if (k < 0 || k >= static_cast<int>(args.size()))
            throw Error("partial slot " + std::to_string(k + 1) + " out of range for " + std::string(name));
    return atom_expr(detail::intern(AtomKind::Opaque, std::string(name), std::move(partials), std::move(args)));
}

ScalarExpr ScalarExpr::sin(const ScalarExpr& arg) {
    if (arg.is_zero()) return {};
    return atom_expr(detail::intern(AtomKind::Sin, "", {}, {arg}));
}

ScalarExpr ScalarExpr::cos(const ScalarExpr& arg) {
    if (arg.is_zero()) return ScalarExpr(1);
    return atom_expr(detail::intern(AtomKind::Cos, "", {}, {arg}));
}

ScalarExpr ScalarExpr::exp(const ScalarExpr& arg) {
    if (arg.is_zero()) return ScalarExpr(1);
    return atom_expr(detail::intern(AtomKind::Exp, "", {}, {arg}));
}

ScalarExpr ScalarExpr::sqrt(const ScalarExpr& arg) {
    if (auto c = arg.constant_value()) {
        if (*c < 0) throw EvalError("sqrt of negative constant");
        mpz_class n = c->get_num(), d = c->get_den();
        if (mpz_perfect_square_p(n.get_mpz_t()) && mpz_perfect_square_p(d.get_mpz_t())) {
            mpz_class rn, rd;
            mpz_sqrt(rn.get_mpz_t(), n.get_mpz_t());
            mpz_sqrt(rd.get_mpz_t(), d.get_mpz_t());
            return ScalarExpr(Rational(rn, rd));
        }
    }
    return atom_expr(detail::intern(AtomKind::Sqrt, "", {}, {arg}));
}

ScalarExpr ScalarExpr::operator-() const {
    auto r = std::make_shared<ExprRep>(*rep_);
    r->num = -r->num;
    return ScalarExpr(std::shared_ptr<const ExprRep>(std::move(r)));
}

ScalarExpr& ScalarExpr::operator+=(const ScalarExpr& o) {
    const auto& a = *rep_;
    const auto& b = *o.rep_;
    if (b.num.is_zero() && b.caveats.empty()) return *this;
    if (a.num.is_zero() && a.caveats.empty()) return *this = o;
    std::vector<std::string> cav = a.caveats;
    detail::merge_caveats(cav, b.caveats);
    if (a.den == b.den) {
        Poly n = a.num + b.num;
        if (a.den.is_one()) {
            *this = ScalarExpr(std::make_shared<const ExprRep>(ExprRep{std::move(n), a.den, std::move(cav)}));
        } else {
            *this = detail::make_expr(std::move(n), a.den, std::move(cav));
        }
        return *this;
    }
    *this = detail::make_expr(a.num * b.den + b.num * a.den, a.den * b.den, std::move(cav));
    return *this;
}

ScalarExpr& ScalarExpr::operator-=(const ScalarExpr& o) { return *this += -o; }

ScalarExpr& ScalarExpr::operator*=(const ScalarExpr& o) {
    const auto& a = *rep_;
    const auto& b = *o.rep_;
    std::vector<std::string> cav = a.caveats;
    detail::merge_caveats(cav, b.caveats);
    if (a.den.is_one() && b.den.is_one() && !(detail::has_radical(a.num) && detail::has_radical(b.num))) {
        *this = ScalarExpr(std::make_shared<const ExprRep>(ExprRep{a.num * b.num, a.den, std::move(cav)}));
        return *this;
    }
    *this = detail::make_expr(a.num * b.num, a.den * b.den, std::move(cav));
    return *this;
}

ScalarExpr& ScalarExpr::operator/=(const ScalarExpr& o) {
    const auto& a = *rep_;
    const auto& b = *o.rep_;
    if (b.num.is_zero()) throw EvalError("division by zero");
    std::vector<std::string> cav = a.caveats;
    detail::merge_caveats(cav, b.caveats);
    *this = detail::make_expr(a.num * b.den, a.den * b.num, std::move(cav));
    return *this;
}

ScalarExpr ScalarExpr::pow(int n) const {
    if (n < 0) return ScalarExpr(1) / pow(-n);
    ScalarExpr result(1), base = *this;
    while (n > 0) {
        if (n & 1) result *= base;
        n >>= 1;
        if (n) base *= base;
    }
    return result;
}

bool ScalarExpr::operator==(const ScalarExpr& o) const {
    return rep_ == o.rep_ || (rep_->num == o.rep_->num && rep_->den == o.rep_->den);
}

bool ScalarExpr::is_zero() const { return rep_->num.is_zero(); }
bool ScalarExpr::is_constant() const { return rep_->num.is_constant() && rep_->den.is_one(); }

std::optional<Rational> ScalarExpr::constant_value() const {
    if (!is_constant()) return std::nullopt;
    return rep_->num.constant_value();
}

bool ScalarExpr::is_polynomial() const { return rep_->den.is_one(); }

bool ScalarExpr::is_rational_function() const {
    for (AtomId t : top_atoms(*this))
        if (detail::record(t).transcendental) return false;
    return true;
}

std::size_t ScalarExpr::term_count() const { return rep_->num.terms().size() + (rep_->den.is_one() ? 0 : rep_->den.terms().size()); }

const std::vector<std::string>& ScalarExpr::caveats() const { return rep_->caveats; }

std::string ScalarExpr::str() const {
    if (rep_->den.is_one()) return detail::poly_text(rep_->num);
    return "(" + detail::poly_text(rep_->num) + ")/(" + detail::poly_text(rep_->den) + ")";
}

std::ostream& operator<<(std::ostream& os, const ScalarExpr& e) { return os << e.str(); }

// ---- atoms ----------------------------------------------------------------

const AtomInfo& atom_info(AtomId id) { return detail::record(id).info; }

AtomId coord_atom(std::string_view name) { return detail::intern(AtomKind::Coord, std::string(name), {}, {}); }

std::vector<AtomId> top_atoms(const ScalarExpr& e) {
    auto a = e.rep().num.atoms();
    auto b = e.rep().den.atoms();
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

std::vector<AtomId> leaf_atoms(const ScalarExpr& e) {
    std::vector<AtomId> out;
    for (AtomId t : top_atoms(e)) {
        const auto& d = detail::record(t).deps;
        out.insert(out.end(), d.begin(), d.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---- calculus -------------------------------------------------------------

namespace {

class Differentiator {
  public:
    explicit Differentiator(AtomId v) : v_(v) {}

    ScalarExpr atom(AtomId t) {
        if (t == v_) return ScalarExpr(1);
        const auto& rec = detail::record(t);
        if (!std::binary_search(rec.deps.begin(), rec.deps.end(), v_)) return {};
        if (auto it = memo_.find(t); it != memo_.end()) return it->second;
        const auto& info = rec.info;
        ScalarExpr r;
        switch (info.kind) {
            case AtomKind::Coord:
                break;
            case AtomKind::Opaque:
                for (std::size_t k = 0; k < info.args.size(); ++k) {
                    ScalarExpr da = expr(info.args[k]);
                    if (da.is_zero()) continue;
                    auto p = info.partials;
                    p.push_back(static_cast<int>(k));
                    r += ScalarExpr::opaque(info.name, info.args, std::move(p)) * da;
                }
                break;
            case AtomKind::Sin:
                r = ScalarExpr::cos(info.args[0]) * expr(info.args[0]);
                break;
            case AtomKind::Cos:
                r = -ScalarExpr::sin(info.args[0]) * expr(info.args[0]);
                break;
            case AtomKind::Exp:
                r = detail::from_poly(Poly::atom(t)) * expr(info.args[0]);
                break;
            case AtomKind::Sqrt:
                r = expr(info.args[0]) / (ScalarExpr(2) * detail::from_poly(Poly::atom(t)));
                break;
        }
        memo_.emplace(t, r);
        return r;
    }

    ScalarExpr expr(const ScalarExpr& e) {
        const auto& rep = e.rep();
        if (rep.den.is_one()) return poly(rep.num);
        ScalarExpr n = detail::from_poly(rep.num), d = detail::from_poly(rep.den);
        ScalarExpr dn = poly(rep.num), dd = poly(rep.den);
        return (dn * d - n * dd) / (d * d);
    }

    ScalarExpr poly(const Poly& p) {
        std::vector<std::pair<AtomId, ScalarExpr>> d;
        bool all_poly = true;
        for (AtomId t : p.atoms()) {
            ScalarExpr dt = atom(t);
            if (dt.is_zero()) continue;
            all_poly = all_poly && dt.is_polynomial();
            d.emplace_back(t, std::move(dt));
        }
        if (d.empty()) return {};
        if (all_poly) {
            std::vector<Poly::Term> out;
            for (const auto& [m, c] : p.terms()) {
                for (const auto& [t, dt] : d) {
                    std::uint32_t e = m.exponent(t);
                    if (e == 0) continue;
                    Monomial rest;
                    for (const auto& f : m.f) {
                        if (f.first != t)
                            rest.f.push_back(f);
                        else if (f.second > 1)
                            rest.f.emplace_back(t, f.second - 1);
                    }
                    Rational k = c * e;
                    for (const auto& [dm, dc] : dt.rep().num.terms()) out.emplace_back(rest * dm, k * dc);
                }
            }
            return detail::from_poly(Poly::from_terms(std::move(out)));
        }
        ScalarExpr r;
        for (const auto& [t, dt] : d) {
            auto coeffs = p.coefficients_in(t);
            Poly dp;
            for (std::size_t k = 1; k < coeffs.size(); ++k) {
                Monomial m;
                if (k > 1) m.f.emplace_back(t, static_cast<std::uint32_t>(k - 1));
                dp = dp + coeffs[k].times_monomial(m, Rational(static_cast<long>(k)));
            }
            r += detail::from_poly(std::move(dp)) * dt;
        }
        return r;
    }

  private:
    AtomId v_;
    std::unordered_map<AtomId, ScalarExpr> memo_;
};

}  // namespace

ScalarExpr differentiate_atom(const ScalarExpr& e, AtomId leaf) {
    ScalarExpr r = Differentiator(leaf).expr(e);
    if (!e.caveats().empty()) {
        auto rep = std::make_shared<ExprRep>(r.rep());
        detail::merge_caveats(rep->caveats, e.caveats());
        return ScalarExpr(std::shared_ptr<const ExprRep>(std::move(rep)));
    }
    return r;
}

ScalarExpr differentiate(const ScalarExpr& e, std::string_view coord) {
    return differentiate_atom(e, coord_atom(coord));
}

ScalarExpr differentiate(const ScalarExpr& e, std::string_view coord, const ChartSpec& chart) {
    if (!chart.has(coord))
        throw Error("'" + std::string(coord) + "' is not a coordinate of chart " + chart.name());
    return differentiate(e, coord);
}

namespace {

class Substituter {
  public:
    explicit Substituter(const std::map<AtomId, ScalarExpr>& repl) : repl_(repl) {
        for (const auto& [k, v] : repl_) keys_.push_back(k);
    }

    ScalarExpr atom(AtomId t) {
        if (auto it = repl_.find(t); it != repl_.end()) return it->second;
        const auto& rec = detail::record(t);
        bool touched = false;
        for (AtomId k : keys_)
            if (std::binary_search(rec.deps.begin(), rec.deps.end(), k)) {
                touched = true;
                break;
            }
        if (!touched) return detail::from_poly(Poly::atom(t));
        if (auto it = memo_.find(t); it != memo_.end()) return it->second;
        const auto& info = rec.info;
        std::vector<ScalarExpr> args;
        for (const auto& a : info.args) args.push_back(expr(a));
        ScalarExpr r;
        switch (info.kind) {
            case AtomKind::Coord: r = detail::from_poly(Poly::atom(t)); break;
            case AtomKind::Opaque: r = ScalarExpr::opaque(info.name, std::move(args), info.partials); break;
            case AtomKind::Sin: r = ScalarExpr::sin(args[0]); break;
            case AtomKind::Cos: r = ScalarExpr::cos(args[0]); break;
            case AtomKind::Exp: r = ScalarExpr::exp(args[0]); break;
            case AtomKind::Sqrt: r = ScalarExpr::sqrt(args[0]); break;
        }
        memo_.emplace(t, r);
        return r;
    }

    ScalarExpr poly(const Poly& p) {
        ScalarExpr r;
        std::vector<Poly::Term> untouched;
        for (const auto& [m, c] : p.terms()) {
            ScalarExpr term(c);
            Monomial kept;
            for (const auto& [t, e] : m.f) {
                ScalarExpr a = atom(t);
                if (a.rep().den.is_one() && a.rep().num == Poly::atom(t))
                    kept.f.emplace_back(t, e);
                else
                    term *= a.pow(static_cast<int>(e));
            }
            if (kept.f.size() == m.f.size()) {
                untouched.emplace_back(m, c);
                continue;
            }
            r += term * detail::from_poly(Poly(Rational(1)).times_monomial(kept, Rational(1)));
        }
        return r + detail::from_poly(Poly::from_terms(std::move(untouched)));
    }

    ScalarExpr expr(const ScalarExpr& e) {
        const auto& rep = e.rep();
        ScalarExpr n = poly(rep.num);
        if (rep.den.is_one()) return n;
        return n / poly(rep.den);
    }

  private:
    const std::map<AtomId, ScalarExpr>& repl_;
    std::vector<AtomId> keys_;
    std::unordered_map<AtomId, ScalarExpr> memo_;
};

}  // namespace

ScalarExpr substitute_atoms(const ScalarExpr& e, const std::map<AtomId, ScalarExpr>& repl) {
    if (repl.empty()) return e;
    return Substituter(repl).expr(e);
}

ScalarExpr substitute(const ScalarExpr& e, const std::map<std::string, ScalarExpr>& coords) {
    std::map<AtomId, ScalarExpr> repl;
    for (const auto& [name, v] : coords) repl.emplace(coord_atom(name), v);
    return substitute_atoms(e, repl);
}

ScalarExpr substitute_opaque(const ScalarExpr& e, std::string_view name, const ScalarExpr& closed_form,
                             const std::vector<std::string>& slots) {
    std::map<AtomId, ScalarExpr> repl;
    for (AtomId t : leaf_atoms(e)) {
        const auto& info = atom_info(t);
        if (info.kind != AtomKind::Opaque || info.name != name) continue;
        if (info.args.size() != slots.size())
            throw Error("arity mismatch substituting " + std::string(name));
        ScalarExpr r = closed_form;
        for (int k : info.partials) r = differentiate(r, slots[k]);
        std::map<std::string, ScalarExpr> at;
        for (std::size_t k = 0; k < slots.size(); ++k) at.emplace(slots[k], info.args[k]);
        repl.emplace(t, substitute(r, at));
    }
    return substitute_atoms(e, repl);
}

// ---- numerics -------------------------------------------------------------

namespace {

class Evaluator {
  public:
    explicit Evaluator(const NumericPoint& p) : p_(p) {}

    double atom(AtomId t) {
        if (auto it = p_.atoms.find(t); it != p_.atoms.end()) return it->second;
        if (auto it = memo_.find(t); it != memo_.end()) return it->second;
        const auto& info = atom_info(t);
        double v = 0;
        switch (info.kind) {
            case AtomKind::Coord: {
                auto it = p_.coords.find(info.name);
                if (it == p_.coords.end()) throw EvalError("no value for coordinate " + info.name);
                v = it->second;
                break;
            }
            case AtomKind::Opaque: {
                auto it = p_.opaque.find({info.name, info.partials});
                if (it == p_.opaque.end()) throw EvalError("no value for " + info.text);
                v = it->second;
                break;
            }
            case AtomKind::Sin: v = std::sin(expr(info.args[0])); break;
            case AtomKind::Cos: v = std::cos(expr(info.args[0])); break;
            case AtomKind::Exp: v = std::exp(expr(info.args[0])); break;
            case AtomKind::Sqrt: {
                double a = expr(info.args[0]);
                if (a < 0) throw EvalError("sqrt of negative value in " + info.text);
                v = std::sqrt(a);
                break;
            }
        }
        if (!std::isfinite(v)) throw EvalError("non-finite value in " + info.text);
        memo_.emplace(t, v);
        return v;
    }

    double poly(const Poly& p, double* scale = nullptr) {
        double s = 0, a = 0;
        for (const auto& [m, c] : p.terms()) {
            double term = c.get_d();
            for (const auto& [t, e] : m.f) term *= std::pow(atom(t), static_cast<int>(e));
            s += term;
            a += std::abs(term);
        }
        if (scale) *scale = a;
        return s;
    }

    double expr(const ScalarExpr& e, double* scale = nullptr) {
        double n = poly(e.rep().num, scale);
        if (e.rep().den.is_one()) return n;
        double d = poly(e.rep().den);
        if (std::abs(d) < 1e-300) throw EvalError("division by zero while evaluating " + e.str());
        if (scale) *scale /= std::abs(d);
        double v = n / d;
        if (!std::isfinite(v)) throw EvalError("non-finite value");
        return v;
    }

  private:
    const NumericPoint& p_;
    std::unordered_map<AtomId, double> memo_;
};

}  // namespace

double eval(const ScalarExpr& e, const NumericPoint& p) { return Evaluator(p).expr(e); }

namespace {

class TaylorEvaluator {
  public:
    TaylorEvaluator(const NumericPoint& p, const std::vector<std::string>& coords, int order)
        : p_(p), coords_(coords), n_(coords.size()), order_(order), plain_(p) {}

    TaylorValue constant(double v) const {
        TaylorValue t;
        t.value = v;
        t.gradient.assign(n_, 0.0);
        if (order_ > 1) t.hessian.assign(n_ * n_, 0.0);
        return t;
    }

    TaylorValue mul(const TaylorValue& a, const TaylorValue& b) const {
        TaylorValue t = constant(a.value * b.value);
        for (std::size_t i = 0; i < n_; ++i) t.gradient[i] = a.gradient[i] * b.value + a.value * b.gradient[i];
        if (order_ > 1)
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = 0; j < n_; ++j)
                    t.hessian[i * n_ + j] = a.hessian[i * n_ + j] * b.value + a.value * b.hessian[i * n_ + j] +
                                            a.gradient[i] * b.gradient[j] + a.gradient[j] * b.gradient[i];
        return t;
    }

    void add_scaled(TaylorValue& into, const TaylorValue& a, double c) const {
        into.value += c * a.value;
        for (std::size_t i = 0; i < n_; ++i) into.gradient[i] += c * a.gradient[i];
        for (std::size_t k = 0; k < into.hessian.size(); ++k) into.hessian[k] += c * a.hessian[k];
    }

    // phi(u) given phi, phi' and phi'' at u.value
    TaylorValue compose(const TaylorValue& u, double f0, double f1, double f2) const {
        TaylorValue t = constant(f0);
        for (std::size_t i = 0; i < n_; ++i) t.gradient[i] = f1 * u.gradient[i];
        if (order_ > 1)
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = 0; j < n_; ++j)
                    t.hessian[i * n_ + j] = f2 * u.gradient[i] * u.gradient[j] + f1 * u.hessian[i * n_ + j];
        return t;
    }

    const TaylorValue& atom(AtomId t) {
        if (auto it = memo_.find(t); it != memo_.end()) return it->second;
        TaylorValue v = constant(0.0);
        if (auto it = p_.atoms.find(t); it != p_.atoms.end()) {
            v.value = it->second;
            return memo_.emplace(t, v).first->second;
        }
        const auto& info = atom_info(t);
        switch (info.kind) {
            case AtomKind::Coord:
                v.value = plain_.atom(t);
                for (std::size_t i = 0; i < n_; ++i)
                    if (coords_[i] == info.name) v.gradient[i] = 1.0;
                break;
            case AtomKind::Opaque: {
                v.value = plain_.atom(t);
                const ScalarExpr self = atom_expr(t);
                for (std::size_t i = 0; i < n_; ++i) {
                    ScalarExpr d = differentiate(self, coords_[i]);
                    v.gradient[i] = plain_.expr(d);
                    if (order_ > 1)
                        for (std::size_t j = 0; j < n_; ++j)
                            v.hessian[i * n_ + j] = plain_.expr(differentiate(d, coords_[j]));
                }
                break;
            }
            case AtomKind::Sin: {
                TaylorValue u = expr(info.args[0]);
                double s = std::sin(u.value), c = std::cos(u.value);
                v = compose(u, s, c, -s);
                break;
            }
            case AtomKind::Cos: {
                TaylorValue u = expr(info.args[0]);
                double s = std::sin(u.value), c = std::cos(u.value);
                v = compose(u, c, -s, -c);
                break;
            }
            case AtomKind::Exp: {
                TaylorValue u = expr(info.args[0]);
                double e = std::exp(u.value);
                v = compose(u, e, e, e);
                break;
            }
            case AtomKind::Sqrt: {
                TaylorValue u = expr(info.args[0]);
                if (u.value <= 0) throw EvalError("sqrt is not differentiable at " + info.text);
                double r = std::sqrt(u.value);
                v = compose(u, r, 0.5 / r, -0.25 / (r * u.value));
                break;
            }
        }
        return memo_.emplace(t, std::move(v)).first->second;
    }

    TaylorValue poly(const Poly& p) {
        TaylorValue s = constant(0.0);
        for (const auto& [m, c] : p.terms()) {
            TaylorValue term = constant(c.get_d());
            for (const auto& [t, e] : m.f) {
                const TaylorValue& x = atom(t);
                if (e == 1) {
                    term = mul(term, x);
                    continue;
                }
                const double k = e;
                const double pw = std::pow(x.value, k - 2);
                term = mul(term, compose(x, pw * x.value * x.value, k * pw * x.value, k * (k - 1) * pw));
            }
            add_scaled(s, term, 1.0);
        }
        return s;
    }

    TaylorValue expr(const ScalarExpr& e) {
        TaylorValue n = poly(e.rep().num);
        if (e.rep().den.is_one()) return n;
        TaylorValue d = poly(e.rep().den);
        if (std::abs(d.value) < 1e-300) throw EvalError("division by zero while evaluating " + e.str());
        const double inv = 1.0 / d.value;
        TaylorValue out = mul(n, compose(d, inv, -inv * inv, 2 * inv * inv * inv));
        if (!std::isfinite(out.value)) throw EvalError("non-finite value");
        return out;
    }

  private:
    const NumericPoint& p_;
    const std::vector<std::string>& coords_;
    std::size_t n_;
    int order_;
    Evaluator plain_;
    std::unordered_map<AtomId, TaylorValue> memo_;
};

}  // namespace

TaylorValue eval_taylor(const ScalarExpr& e, const std::vector<std::string>& coords, const NumericPoint& p,
                        int order) {
    if (order < 1 || order > 2) throw Error("Taylor order must be 1 or 2");
    return TaylorEvaluator(p, coords, order).expr(e);
}

std::vector<TaylorValue> eval_taylor(const std::vector<ScalarExpr>& es, const std::vector<std::string>& coords,
                                     const NumericPoint& p, int order) {
    if (order < 1 || order > 2) throw Error("Taylor order must be 1 or 2");
    TaylorEvaluator ev(p, coords, order);
    std::vector<TaylorValue> out;
    out.reserve(es.size());
    for (const auto& e : es) out.push_back(ev.expr(e));
    return out;
}

std::string to_string(ZeroKind k) {
    switch (k) {
        case ZeroKind::ExactZero: return "exact_zero";
        case ZeroKind::NumericZero: return "numeric_zero";
        case ZeroKind::NonZero: return "nonzero";
    }
    return "?";
}

ZeroVerdict is_zero(const ScalarExpr& e, const ZeroTestOptions& opts) {
    ZeroVerdict v;
    v.caveats = e.caveats();
    if (e.is_zero()) {
        v.kind = ZeroKind::ExactZero;
        return v;
    }
    const bool exact_nonzero = e.is_rational_function();
    auto leaves = leaf_atoms(e);
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> dist(opts.box_lo, opts.box_hi);

    const int max_attempts = 10 * std::max(1, opts.samples);
    int attempts = 0, good = 0;
    bool all_small = true;
    double best = -1;
    auto sample_once = [&]() -> bool {
        NumericPoint p;
        for (AtomId t : leaves) p.atoms[t] = dist(rng);
        double scale = 0;
        double val;
        try {
            val = Evaluator(p).expr(e, &scale);
        } catch (const EvalError&) {
            return false;
        }
        ++good;
        double a = std::abs(val);
        if (a > opts.tolerance * std::max(1.0, scale)) all_small = false;
        v.max_abs = std::max(v.max_abs, a);
        if (a > best) {
            best = a;
            v.witness = std::move(p);
            v.witness_value = val;
        }
        return true;
    };
    while (good < opts.samples && attempts < max_attempts) {
        ++attempts;
        sample_once();
    }
    if (good < opts.samples)
        throw EvalError("could not find " + std::to_string(opts.samples) + " regular sample points for " + e.str());
    // Look a little harder for a convincing witness.
    int extra = 0;
    while ((exact_nonzero || !all_small) && best < opts.witness_threshold && extra < max_attempts) {
        ++extra;
        sample_once();
    }
    v.samples = good;
    v.kind = (exact_nonzero || !all_small) ? ZeroKind::NonZero : ZeroKind::NumericZero;
    if (v.kind == ZeroKind::NumericZero) v.witness = {};
    // readable witness
    if (v.kind == ZeroKind::NonZero) {
        NumericPoint named;
        for (const auto& [t, val] : v.witness.atoms) {
            const auto& info = atom_info(t);
            if (info.kind == AtomKind::Coord)
                named.coords[info.name] = val;
            else
                named.opaque[{info.name, info.partials}] = val;
        }
        named.atoms = std::move(v.witness.atoms);
        v.witness = std::move(named);
    }
    return v;
}

}  // namespace acw
