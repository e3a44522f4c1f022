#include "acw/gca.hpp"

#include <algorithm>
#include <ostream>
#include <set>

namespace acw {

GeneratorSet::GeneratorSet(ChartSpec chart, std::vector<Generator> gens)
    : chart_(std::move(chart)), gens_(std::move(gens)) {
    std::set<std::string> seen(chart_.coords().begin(), chart_.coords().end());
    if (seen.size() != chart_.coords().size()) throw Error("duplicate coordinate in chart " + chart_.name());
    for (const auto& g : gens_) {
        if (g.degree < 1) throw Error("generator " + g.name + " must have degree >= 1");
        if (!seen.insert(g.name).second) throw Error("generator name " + g.name + " is not unique");
    }
}

int GeneratorSet::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < gens_.size(); ++i)
        if (gens_[i].name == name) return static_cast<int>(i);
    return -1;
}

bool GeneratorSet::operator==(const GeneratorSet& o) const {
    if (!(chart_ == o.chart_) || gens_.size() != o.gens_.size()) return false;
    for (std::size_t i = 0; i < gens_.size(); ++i)
        if (gens_[i].name != o.gens_[i].name || gens_[i].degree != o.gens_[i].degree) return false;
    return true;
}

GenSetPtr make_generators(ChartSpec chart, std::vector<Generator> gens) {
    return std::make_shared<const GeneratorSet>(std::move(chart), std::move(gens));
}

namespace {

bool same_set(const GenSetPtr& a, const GenSetPtr& b) { return a == b || (a && b && *a == *b); }

// Product of two normal-form monomials: returns 0 (annihilated), +1 or -1.
int multiply_monomials(const GeneratorSet& gs, const Exponents& a, const Exponents& b, Exponents& out) {
    const std::size_t n = gs.size();
    out.assign(n, 0);
    int swaps = 0;
    int odd_b_before = 0;  // odd generators of b with index < i
    for (std::size_t i = 0; i < n; ++i) {
        if (gs.odd(i)) {
            if (a[i] + b[i] > 1) return 0;
            swaps += a[i] * odd_b_before;
            odd_b_before += b[i];
        }
        out[i] = static_cast<std::uint8_t>(a[i] + b[i]);
    }
    return (swaps & 1) ? -1 : 1;
}

}  // namespace

GradedElem GradedElem::scalar(GenSetPtr gs, const ScalarExpr& c) {
    GradedElem e(gs);
    e.add_term(Exponents(gs->size(), 0), c);
    return e;
}

GradedElem GradedElem::generator(GenSetPtr gs, std::string_view name) {
    int i = gs->index_of(name);
    if (i < 0) throw Error("unknown generator " + std::string(name));
    return generator(std::move(gs), static_cast<std::size_t>(i));
}

GradedElem GradedElem::generator(GenSetPtr gs, std::size_t index) {
    if (index >= gs->size()) throw Error("generator index out of range");
    Exponents m(gs->size(), 0);
    m[index] = 1;
    GradedElem e(gs);
    e.add_term(m, ScalarExpr(1));
    return e;
}

GradedElem GradedElem::monomial(GenSetPtr gs, const std::vector<std::size_t>& gens, const ScalarExpr& c) {
    GradedElem e = scalar(gs, c);
    for (std::size_t g : gens) e = e * generator(gs, g);
    return e;
}

ScalarExpr GradedElem::coefficient(const Exponents& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? ScalarExpr() : it->second;
}

int GradedElem::term_degree(const Exponents& m) const {
    int d = 0;
    for (std::size_t i = 0; i < m.size(); ++i) d += m[i] * gs_->degree(i);
    return d;
}

std::optional<int> GradedElem::homogeneous_degree() const {
    std::optional<int> d;
    for (const auto& [m, c] : terms_) {
        int k = term_degree(m);
        if (d && *d != k) return std::nullopt;
        d = k;
    }
    return d;
}

void GradedElem::add_term(const Exponents& m, const ScalarExpr& c) {
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

void GradedElem::require_same(const GradedElem& o) const {
    if (!same_set(gs_, o.gs_)) throw Error("graded elements over different generator sets");
}

GradedElem GradedElem::operator-() const {
    GradedElem r(gs_);
    for (const auto& [m, c] : terms_) r.terms_.emplace(m, -c);
    return r;
}

GradedElem& GradedElem::operator+=(const GradedElem& o) {
    if (o.terms_.empty()) {
        if (!gs_) gs_ = o.gs_;
        return *this;
    }
    if (!gs_) gs_ = o.gs_;
    require_same(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
}

GradedElem& GradedElem::operator-=(const GradedElem& o) { return *this += -o; }

GradedElem operator*(const GradedElem& a, const GradedElem& b) {
    if (!a.gs_ || !b.gs_) return GradedElem(a.gs_ ? a.gs_ : b.gs_);
    a.require_same(b);
    GradedElem r(a.gs_);
    Exponents m;
    for (const auto& [ma, ca] : a.terms_) {
        for (const auto& [mb, cb] : b.terms_) {
            int s = multiply_monomials(*a.gs_, ma, mb, m);
            if (s == 0) continue;
            ScalarExpr c = ca * cb;
            r.add_term(m, s > 0 ? c : -c);
        }
    }
    return r;
}

GradedElem operator*(const ScalarExpr& c, const GradedElem& a) {
    GradedElem r(a.gs_);
    if (c.is_zero()) return r;
    for (const auto& [m, x] : a.terms_) r.add_term(m, c * x);
    return r;
}

bool GradedElem::operator==(const GradedElem& o) const {
    if (terms_.empty() && o.terms_.empty()) return true;
    if (!same_set(gs_, o.gs_)) return false;
    return terms_ == o.terms_;
}

GradedElem GradedElem::map_coefficients(const std::function<ScalarExpr(const ScalarExpr&)>& f) const {
    GradedElem r(gs_);
    for (const auto& [m, c] : terms_) r.add_term(m, f(c));
    return r;
}

GradedElem GradedElem::drop_generators(const std::vector<std::size_t>& gens) const {
    GradedElem r(gs_);
    for (const auto& [m, c] : terms_) {
        bool keep = true;
        for (std::size_t g : gens) keep = keep && m[g] == 0;
        if (keep) r.terms_.emplace(m, c);
    }
    return r;
}

std::string GradedElem::str() const {
    if (terms_.empty()) return "0";
    std::vector<std::pair<int, const std::pair<const Exponents, ScalarExpr>*>> order;
    for (const auto& t : terms_) order.emplace_back(term_degree(t.first), &t);
    std::stable_sort(order.begin(), order.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::string out;
    bool first = true;
    for (const auto& [deg, t] : order) {
        const auto& [m, c] = *t;
        std::string gens;
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m[i] == 0) continue;
            if (!gens.empty()) gens += '*';
            gens += gs_->generators()[i].name;
            if (m[i] > 1) gens += '^' + std::to_string(m[i]);
        }
        std::string cs = c.str();
        if (!first) out += " + ";
        first = false;
        if (gens.empty()) {
            out += "(" + cs + ")";
        } else if (cs == "1") {
            out += gens;
        } else {
            out += "(" + cs + ")*" + gens;
        }
    }
    return out;
}

std::ostream& operator<<(std::ostream& os, const GradedElem& e) { return os << e.str(); }

GradedElem normal_form(GenSetPtr gs, const std::vector<std::pair<std::vector<std::string>, ScalarExpr>>& raw) {
    GradedElem r(gs);
    for (const auto& [seq, c] : raw) {
        GradedElem t = GradedElem::scalar(gs, c);
        for (const auto& name : seq) {
            int i = gs->index_of(name);
            if (i < 0) throw Error("generator " + name + " does not belong to this generator set");
            t = t * GradedElem::generator(gs, static_cast<std::size_t>(i));
        }
        r += t;
    }
    return r;
}

// ---- derivations ----------------------------------------------------------

DerivationSpec DerivationSpec::make(GenSetPtr gs, int degree, std::map<std::string, GradedElem> coord_images,
                                    std::map<std::string, GradedElem> gen_images) {
    DerivationSpec D;
    D.gs = gs;
    D.degree = degree;
    D.coord_images.assign(gs->chart().coords().size(), GradedElem(gs));
    D.gen_images.assign(gs->size(), GradedElem(gs));
    for (auto& [name, img] : coord_images) {
        int i = gs->chart().index_of(name);
        if (i < 0) throw Error("derivation image for unknown coordinate " + name);
        D.coord_images[i] = std::move(img);
    }
    for (auto& [name, img] : gen_images) {
        int i = gs->index_of(name);
        if (i < 0) throw Error("derivation image for unknown generator " + name);
        D.gen_images[i] = std::move(img);
    }
    D.validate();
    return D;
}

void DerivationSpec::validate() const {
    auto check = [&](const GradedElem& img, int k, const std::string& sym) {
        if (img.is_zero()) return;
        if (img.gens() && !same_set(img.gens(), gs)) throw Error("image of " + sym + " uses another generator set");
        auto d = img.homogeneous_degree();
        if (!d || *d != k + degree)
            throw Error("image of " + sym + " is not homogeneous of degree " + std::to_string(k + degree));
    };
    const auto& coords = gs->chart().coords();
    if (coord_images.size() != coords.size() || gen_images.size() != gs->size())
        throw Error("derivation image tables have the wrong size");
    for (std::size_t a = 0; a < coords.size(); ++a) check(coord_images[a], 0, coords[a]);
    for (std::size_t i = 0; i < gs->size(); ++i) check(gen_images[i], gs->degree(i), gs->generators()[i].name);
}

GradedElem apply_derivation(const DerivationSpec& D, const ScalarExpr& f) {
    GradedElem r(D.gs);
    if (f.is_constant()) return r;
    const auto leaves = leaf_atoms(f);
    const auto& coords = D.gs->chart().coords();
    for (std::size_t a = 0; a < coords.size(); ++a) {
        if (D.coord_images[a].is_zero()) continue;
        AtomId id = coord_atom(coords[a]);
        if (!std::binary_search(leaves.begin(), leaves.end(), id)) continue;
        ScalarExpr df = differentiate(f, coords[a]);
        if (!df.is_zero()) r += df * D.coord_images[a];
    }
    if (D.atom_image) {
        for (AtomId t : leaves) {
            if (atom_info(t).kind == AtomKind::Coord) continue;
            auto img = D.atom_image(t);
            if (!img || img->is_zero()) continue;
            ScalarExpr df = differentiate_atom(f, t);
            if (!df.is_zero()) r += df * *img;
        }
    }
    return r;
}

GradedElem apply_derivation(const DerivationSpec& D, const GradedElem& e) {
    if (e.is_zero()) return GradedElem(D.gs);
    if (!same_set(e.gens(), D.gs)) throw Error("derivation and element use different generator sets");
    const auto& gs = *D.gs;
    GradedElem r(D.gs);
    for (const auto& [m, c] : e.terms()) {
        GradedElem mono(D.gs);
        mono.add_term(m, ScalarExpr(1));
        GradedElem dc = apply_derivation(D, c);
        if (!dc.is_zero()) r += dc * mono;

        std::vector<std::size_t> factors;
        for (std::size_t i = 0; i < m.size(); ++i)
            for (int k = 0; k < m[i]; ++k) factors.push_back(i);
        int left_degree = 0;
        for (std::size_t p = 0; p < factors.size(); ++p) {
            const std::size_t g = factors[p];
            const GradedElem& img = D.gen_images[g];
            if (!img.is_zero()) {
                Exponents left(m.size(), 0), right(m.size(), 0);
                for (std::size_t q = 0; q < p; ++q) ++left[factors[q]];
                for (std::size_t q = p + 1; q < factors.size(); ++q) ++right[factors[q]];
                bool negative = ((D.degree * left_degree) & 1) != 0;
                GradedElem L(D.gs), R(D.gs);
                L.add_term(left, negative ? -c : c);
                R.add_term(right, ScalarExpr(1));
                r += L * img * R;
            }
            left_degree += gs.degree(g);
        }
    }
    return r;
}

ZeroVerdict vanishes(const GradedElem& e, const ZeroTestOptions& opts) {
    ZeroVerdict v;
    v.kind = ZeroKind::ExactZero;
    for (const auto& [m, c] : e.terms()) {
        ZeroVerdict t = is_zero(c, opts);
        v.samples = std::max(v.samples, t.samples);
        v.caveats.insert(v.caveats.end(), t.caveats.begin(), t.caveats.end());
        if (t.kind == ZeroKind::NonZero) {
            if (v.kind != ZeroKind::NonZero || std::abs(t.witness_value) > std::abs(v.witness_value)) {
                v.witness = t.witness;
                v.witness_value = t.witness_value;
            }
            v.kind = ZeroKind::NonZero;
        } else if (t.kind == ZeroKind::NumericZero && v.kind == ZeroKind::ExactZero) {
            v.kind = ZeroKind::NumericZero;
        }
        v.max_abs = std::max(v.max_abs, t.max_abs);
    }
    return v;
}

bool SquareReport::clean() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.verdict.vanishes(); });
}

bool SquareReport::exact() const {
    return std::all_of(entries.begin(), entries.end(),
                       [](const auto& e) { return e.verdict.kind == ZeroKind::ExactZero; });
}

std::vector<const SquareResidual*> SquareReport::failures() const {
    std::vector<const SquareResidual*> out;
    for (const auto& e : entries)
        if (!e.verdict.vanishes()) out.push_back(&e);
    return out;
}

SquareReport square_check(const DerivationSpec& D, const ZeroTestOptions& opts) {
    SquareReport rep;
    const auto& coords = D.gs->chart().coords();
    for (std::size_t a = 0; a < coords.size(); ++a) {
        GradedElem r = apply_derivation(D, D.coord_images[a]);
        ZeroVerdict v = vanishes(r, opts);
        rep.entries.push_back({coords[a], std::move(r), std::move(v)});
    }
    for (std::size_t i = 0; i < D.gs->size(); ++i) {
        GradedElem r = apply_derivation(D, D.gen_images[i]);
        ZeroVerdict v = vanishes(r, opts);
        rep.entries.push_back({D.gs->generators()[i].name, std::move(r), std::move(v)});
    }
    return rep;
}

GradedElem apply_morphism(const GradedElem& e, const GenSetPtr& target,
                          const std::function<ScalarExpr(const ScalarExpr&)>& coeff,
                          const std::vector<GradedElem>& images) {
    GradedElem r(target);
    if (e.is_zero()) return r;
    if (images.size() != e.gens()->size()) throw Error("morphism needs one image per generator");
    for (const auto& [m, c] : e.terms()) {
        GradedElem t = GradedElem::scalar(target, coeff(c));
        for (std::size_t i = 0; i < m.size() && !t.is_zero(); ++i)
            for (int k = 0; k < m[i]; ++k) t = t * images[i];
        r += t;
    }
    return r;
}

}  // namespace acw
