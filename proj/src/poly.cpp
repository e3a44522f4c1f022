#include "poly.hpp"

#include <algorithm>
#include <iterator>
#include <mutex>
#include <shared_mutex>

namespace acw::detail {

std::uint32_t Monomial::degree() const {
    std::uint32_t d = 0;
    for (const auto& [v, e] : f) d += e;
    return d;
}

std::uint32_t Monomial::exponent(AtomId v) const {
    auto it = std::lower_bound(f.begin(), f.end(), v,
                               [](const auto& p, AtomId x) { return p.first < x; });
    return (it != f.end() && it->first == v) ? it->second : 0;
}

int lex_compare(const Monomial& a, const Monomial& b) {
    std::size_t i = 0;
    for (; i < a.f.size() && i < b.f.size(); ++i) {
        if (a.f[i].first != b.f[i].first) return a.f[i].first < b.f[i].first ? 1 : -1;
        if (a.f[i].second != b.f[i].second) return a.f[i].second > b.f[i].second ? 1 : -1;
    }
    if (a.f.size() == b.f.size()) return 0;
    return i < a.f.size() ? 1 : -1;
}

Monomial operator*(const Monomial& a, const Monomial& b) {
    Monomial r;
    r.f.reserve(a.f.size() + b.f.size());
    std::size_t i = 0, j = 0;
    while (i < a.f.size() || j < b.f.size()) {
        if (j == b.f.size() || (i < a.f.size() && a.f[i].first < b.f[j].first)) {
            r.f.push_back(a.f[i++]);
        } else if (i == a.f.size() || b.f[j].first < a.f[i].first) {
            r.f.push_back(b.f[j++]);
        } else {
            r.f.emplace_back(a.f[i].first, a.f[i].second + b.f[j].second);
            ++i;
            ++j;
        }
    }
    return r;
}

std::optional<Monomial> divide(const Monomial& a, const Monomial& b) {
    Monomial r;
    std::size_t i = 0;
    for (const auto& [v, e] : b.f) {
        while (i < a.f.size() && a.f[i].first < v) r.f.push_back(a.f[i++]);
        if (i == a.f.size() || a.f[i].first != v || a.f[i].second < e) return std::nullopt;
        if (a.f[i].second > e) r.f.emplace_back(v, a.f[i].second - e);
        ++i;
    }
    while (i < a.f.size()) r.f.push_back(a.f[i++]);
    return r;
}

Poly::Poly(const Rational& c) {
    if (c != 0) terms_.emplace_back(Monomial{}, c);
}

Poly Poly::atom(AtomId v, std::uint32_t exp) {
    Poly p;
    Monomial m;
    if (exp > 0) m.f.emplace_back(v, exp);
    p.terms_.emplace_back(std::move(m), Rational(1));
    return p;
}

Poly Poly::from_terms(std::vector<Term> terms) {
    std::sort(terms.begin(), terms.end(),
              [](const Term& a, const Term& b) { return lex_compare(a.first, b.first) > 0; });
    Poly p;
    for (auto& t : terms) {
        if (!p.terms_.empty() && p.terms_.back().first == t.first) {
            p.terms_.back().second += t.second;
            if (p.terms_.back().second == 0) p.terms_.pop_back();
        } else if (t.second != 0) {
            p.terms_.push_back(std::move(t));
        }
    }
    return p;
}

Rational Poly::constant_value() const {
    if (terms_.empty()) return Rational(0);
    return terms_.front().second;
}

bool Poly::is_one() const {
    return terms_.size() == 1 && terms_[0].first.is_one() && terms_[0].second == 1;
}

Poly Poly::operator-() const {
    Poly r = *this;
    for (auto& t : r.terms_) t.second = -t.second;
    return r;
}

Poly Poly::operator+(const Poly& o) const {
    Poly r;
    r.terms_.reserve(terms_.size() + o.terms_.size());
    std::size_t i = 0, j = 0;
    while (i < terms_.size() || j < o.terms_.size()) {
        int c = i == terms_.size()     ? -1
                : j == o.terms_.size() ? 1
                                       : lex_compare(terms_[i].first, o.terms_[j].first);
        if (c > 0) {
            r.terms_.push_back(terms_[i++]);
        } else if (c < 0) {
            r.terms_.push_back(o.terms_[j++]);
        } else {
            Rational s = terms_[i].second + o.terms_[j].second;
            if (s != 0) r.terms_.emplace_back(terms_[i].first, std::move(s));
            ++i;
            ++j;
        }
    }
    return r;
}

Poly Poly::operator-(const Poly& o) const { return *this + (-o); }

Poly Poly::operator*(const Poly& o) const {
    if (is_zero() || o.is_zero()) return {};
    if (o.terms_.size() == 1) return times_monomial(o.terms_[0].first, o.terms_[0].second);
    if (terms_.size() == 1) return o.times_monomial(terms_[0].first, terms_[0].second);
    std::vector<Term> out;
    out.reserve(terms_.size() * o.terms_.size());
    for (const auto& a : terms_)
        for (const auto& b : o.terms_) out.emplace_back(a.first * b.first, a.second * b.second);
    return from_terms(std::move(out));
}

Poly Poly::scaled(const Rational& c) const {
    if (c == 0) return {};
    Poly r = *this;
    for (auto& t : r.terms_) t.second *= c;
    return r;
}

Poly Poly::times_monomial(const Monomial& m, const Rational& c) const {
    if (c == 0) return {};
    Poly r;
    r.terms_.reserve(terms_.size());
    // multiplication by a monomial preserves lex order
    for (const auto& t : terms_) r.terms_.emplace_back(t.first * m, t.second * c);
    return r;
}

bool Poly::contains(AtomId v) const {
    for (const auto& t : terms_)
        if (t.first.exponent(v) > 0) return true;
    return false;
}

std::uint32_t Poly::degree_in(AtomId v) const {
    std::uint32_t d = 0;
    for (const auto& t : terms_) d = std::max(d, t.first.exponent(v));
    return d;
}

std::vector<Poly> Poly::coefficients_in(AtomId v) const {
    std::vector<std::vector<Term>> buckets(degree_in(v) + 1);
    for (const auto& t : terms_) {
        Monomial m;
        std::uint32_t k = 0;
        for (const auto& p : t.first.f) {
            if (p.first == v)
                k = p.second;
            else
                m.f.push_back(p);
        }
        buckets[k].emplace_back(std::move(m), t.second);
    }
    std::vector<Poly> out;
    out.reserve(buckets.size());
    for (auto& b : buckets) out.push_back(from_terms(std::move(b)));
    return out;
}

Poly Poly::from_coefficients(const std::vector<Poly>& c, AtomId v) {
    Poly r;
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (c[k].is_zero()) continue;
        Monomial m;
        if (k > 0) m.f.emplace_back(v, static_cast<std::uint32_t>(k));
        r = r + c[k].times_monomial(m, Rational(1));
    }
    return r;
}

std::vector<AtomId> Poly::atoms() const {
    std::vector<AtomId> out;
    for (const auto& t : terms_)
        for (const auto& p : t.first.f) out.push_back(p.first);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Poly Poly::monic() const {
    if (is_zero()) return {};
    Rational lc = terms_.front().second;
    if (lc == 1) return *this;
    return scaled(Rational(1) / lc);
}

std::optional<Poly> exact_divide(const Poly& a, const Poly& b) {
    if (b.is_zero()) return std::nullopt;
    if (b.is_constant()) return a.scaled(Rational(1) / b.constant_value());
    if (a.is_zero()) return Poly();
    // a = q b forces trail(q) = trail(a) / trail(b), and every remainder has
    // leading monomial at least trail(q) lead(b)
    const auto trail_q = divide(a.terms().back().first, b.terms().back().first);
    if (!trail_q) return std::nullopt;
    Poly r = a;
    const auto& [lm, lc] = b.leading();
    const Monomial floor = *trail_q * lm;
    std::vector<Poly::Term> qt;
    while (!r.is_zero()) {
        if (lex_compare(r.leading().first, floor) < 0) return std::nullopt;
        auto m = divide(r.leading().first, lm);
        if (!m) return std::nullopt;
        Rational c = r.leading().second / lc;
        r = r - b.times_monomial(*m, c);
        qt.emplace_back(std::move(*m), std::move(c));
    }
    return Poly::from_terms(std::move(qt));
}

namespace {

Poly content_in(const Poly& p, AtomId v) {
    Poly g;
    for (const auto& c : p.coefficients_in(v)) {
        if (c.is_zero()) continue;
        g = g.is_zero() ? c.monic() : gcd(g, c);
        if (g.is_one()) break;
    }
    return g;
}

Poly primitive_part(const Poly& p, AtomId v) {
    if (p.is_zero()) return p;
    Poly c = content_in(p, v);
    return exact_divide(p, c).value();
}

Poly pseudo_remainder(const Poly& a, const Poly& b, AtomId v) {
    auto A = a.coefficients_in(v);
    auto B = b.coefficients_in(v);
    const std::size_t db = B.size() - 1;
    const Poly& lb = B.back();
    auto trim = [](std::vector<Poly>& c) {
        while (!c.empty() && c.back().is_zero()) c.pop_back();
    };
    trim(A);
    while (!A.empty() && A.size() - 1 >= db) {
        const std::size_t da = A.size() - 1;
        Poly t = A[da];
        const std::size_t s = da - db;
        for (auto& c : A) c = c * lb;
        for (std::size_t k = 0; k <= db; ++k) A[k + s] = A[k + s] - t * B[k];
        trim(A);
    }
    return Poly::from_coefficients(A, v);
}

// Images modulo the Mersenne prime 2^61 - 1 at a fixed point.
constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b) {
    unsigned __int128 r = static_cast<unsigned __int128>(a) * b;
    std::uint64_t s = static_cast<std::uint64_t>(r & kPrime) + static_cast<std::uint64_t>(r >> 61);
    return s >= kPrime ? s - kPrime : s;
}

std::uint64_t add_mod(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a + b;
    return s >= kPrime ? s - kPrime : s;
}

std::uint64_t pow_mod(std::uint64_t a, std::uint64_t e) {
    std::uint64_t r = 1;
    for (; e; e >>= 1, a = mul_mod(a, a))
        if (e & 1) r = mul_mod(r, a);
    return r;
}

std::optional<std::uint64_t> rational_mod(const Rational& c) {
    mpz_class n = c.get_num() % kPrime, d = c.get_den() % kPrime;
    if (n < 0) n += kPrime;
    if (d == 0) return std::nullopt;
    return mul_mod(n.get_ui(), pow_mod(d.get_ui(), kPrime - 2));
}

using Image = std::vector<std::uint64_t>;

// Univariate image in v with the other atoms set to point(w); empty when the
// leading coefficient vanishes.
Image image_in(const Poly& p, AtomId v, std::uint64_t seed) {
    Image out(p.degree_in(v) + 1, 0);
    for (const auto& [m, c] : p.terms()) {
        auto x = rational_mod(c);
        if (!x) return {};
        std::uint64_t val = *x;
        std::uint32_t k = 0;
        for (const auto& [w, e] : m.f) {
            if (w == v) {
                k = e;
                continue;
            }
            std::uint64_t at = (seed ^ (0x9e3779b97f4a7c15ULL * (w + 1))) % kPrime;
            val = mul_mod(val, pow_mod(at, e));
        }
        out[k] = add_mod(out[k], val);
    }
    if (out.back() == 0) return {};
    return out;
}

std::size_t image_gcd_degree(Image a, Image b) {
    auto trim = [](Image& p) {
        while (!p.empty() && p.back() == 0) p.pop_back();
    };
    trim(a);
    trim(b);
    while (!b.empty()) {
        std::uint64_t inv = pow_mod(b.back(), kPrime - 2);
        while (a.size() >= b.size()) {
            std::uint64_t q = mul_mod(a.back(), inv);
            std::size_t s = a.size() - b.size();
            for (std::size_t k = 0; k < b.size(); ++k) a[k + s] = add_mod(a[k + s], kPrime - mul_mod(q, b[k]));
            trim(a);
            if (a.empty()) break;
        }
        std::swap(a, b);
    }
    return a.empty() ? 0 : a.size() - 1;
}

// True when a and b are certainly coprime: a nonconstant common factor would
// survive in the univariate images of some shared atom.
bool coprime_by_images(const Poly& a, const Poly& b) {
    auto av = a.atoms(), bv = b.atoms();
    std::vector<AtomId> shared;
    std::set_intersection(av.begin(), av.end(), bv.begin(), bv.end(), std::back_inserter(shared));
    const std::uint64_t seed = 0x2545f4914f6cdd1dULL;
    for (AtomId v : shared) {
        Image ia = image_in(a, v, seed), ib = image_in(b, v, seed);
        if (ia.empty() || ib.empty() || image_gcd_degree(ia, ib) > 0) return false;
    }
    return true;
}

std::shared_mutex factor_mutex;
std::vector<Poly> known_factors;

std::optional<Poly> gcd_by_known_factors(const Poly& a, const Poly& b) {
    std::vector<Poly> factors;
    {
        std::shared_lock lock(factor_mutex);
        factors = known_factors;
    }
    Poly rest = b, ra = a, common(Rational(1));
    bool used = false;
    for (const auto& q : factors)
        while (auto d = exact_divide(rest, q)) {
            rest = std::move(*d);
            used = true;
            if (auto e = exact_divide(ra, q)) {
                ra = std::move(*e);
                common = common * q;
            }
        }
    if (!used) return std::nullopt;
    return (common * gcd(ra, rest)).monic();
}

}  // namespace

void register_factor(const Poly& q) {
    if (q.is_constant()) return;
    Poly m = q.monic();
    {
        std::shared_lock lock(factor_mutex);
        if (std::find(known_factors.begin(), known_factors.end(), m) != known_factors.end()) return;
    }
    std::unique_lock lock(factor_mutex);
    if (std::find(known_factors.begin(), known_factors.end(), m) == known_factors.end()) known_factors.push_back(m);
}

Poly gcd(const Poly& a, const Poly& b) {
    if (a.is_zero()) return b.monic();
    if (b.is_zero()) return a.monic();
    if (a.is_constant() || b.is_constant()) return Poly(Rational(1));
    if (a == b) return a.monic();
    if (a.terms().size() == 1 || b.terms().size() == 1) {
        const Poly& mono = a.terms().size() == 1 ? a : b;
        const Poly& other = a.terms().size() == 1 ? b : a;
        Monomial g = mono.leading().first;
        for (const auto& [m, c] : other.terms()) {
            Monomial next;
            for (const auto& [v, e] : g.f)
                if (std::uint32_t k = std::min(e, m.exponent(v)); k > 0) next.f.emplace_back(v, k);
            g = std::move(next);
            if (g.is_one()) break;
        }
        return Poly::from_terms({{g, Rational(1)}});
    }
    if (coprime_by_images(a, b)) return Poly(Rational(1));
    if (auto g = gcd_by_known_factors(a, b)) return *g;
    if (exact_divide(a, b)) return b.monic();
    if (exact_divide(b, a)) return a.monic();

    auto av = a.atoms(), bv = b.atoms();
    AtomId v = std::min(av.front(), bv.front());
    const bool in_a = std::binary_search(av.begin(), av.end(), v);
    const bool in_b = std::binary_search(bv.begin(), bv.end(), v);
    if (!in_a) return gcd(a, content_in(b, v));
    if (!in_b) return gcd(content_in(a, v), b);

    Poly ca = content_in(a, v), cb = content_in(b, v);
    Poly pa = exact_divide(a, ca).value();
    Poly pb = exact_divide(b, cb).value();
    Poly c = gcd(ca, cb);
    if (pa.degree_in(v) < pb.degree_in(v)) std::swap(pa, pb);
    while (!pb.is_zero()) {
        Poly r = pseudo_remainder(pa, pb, v);
        pa = std::move(pb);
        pb = primitive_part(r, v);
    }
    Poly g = primitive_part(pa, v);
    return (c * g).monic();
}

}  // namespace acw::detail
