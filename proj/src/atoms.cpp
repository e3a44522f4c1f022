#include <algorithm>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

#include "expr_rep.hpp"

namespace acw::detail {
namespace {

class Registry {
  public:
    static Registry& instance() {
        static Registry r;
        return r;
    }

    const AtomRecord& get(AtomId id) {
        std::shared_lock lock(mutex_);
        return *records_.at(id);
    }

    AtomId intern(const std::string& key, std::unique_ptr<AtomRecord> (*build)(void*), void* ctx) {
        {
            std::shared_lock lock(mutex_);
            if (auto it = index_.find(key); it != index_.end()) return it->second;
        }
        auto rec = build(ctx);  // may recursively intern, so no lock held here
        std::unique_lock lock(mutex_);
        if (auto it = index_.find(key); it != index_.end()) return it->second;
        auto id = static_cast<AtomId>(records_.size());
        if (rec->info.kind == AtomKind::Coord || rec->info.kind == AtomKind::Opaque) {
            rec->deps.push_back(id);
            std::sort(rec->deps.begin(), rec->deps.end());
        }
        records_.push_back(std::move(rec));
        index_.emplace(key, id);
        return id;
    }

  private:
    std::shared_mutex mutex_;
    std::unordered_map<std::string, AtomId> index_;
    std::vector<std::unique_ptr<AtomRecord>> records_;
};

void append_id_key(std::string& out, const Poly& p) {
    for (const auto& [m, c] : p.terms()) {
        for (const auto& [v, e] : m.f) {
            out += std::to_string(v);
            out += '^';
            out += std::to_string(e);
            out += '.';
        }
        out += ':';
        out += c.get_str();
        out += ';';
    }
}

const char* kind_name(AtomKind k) {
    switch (k) {
        case AtomKind::Sin: return "sin";
        case AtomKind::Cos: return "cos";
        case AtomKind::Exp: return "exp";
        case AtomKind::Sqrt: return "sqrt";
        default: return "";
    }
}

struct BuildCtx {
    AtomKind kind;
    std::string* name;
    std::vector<int>* partials;
    std::vector<ScalarExpr>* args;
};

std::unique_ptr<AtomRecord> build_record(void* p) {
    auto& ctx = *static_cast<BuildCtx*>(p);
    auto rec = std::make_unique<AtomRecord>();
    rec->info.kind = ctx.kind;
    rec->info.name = *ctx.name;
    rec->info.partials = *ctx.partials;
    rec->info.args = *ctx.args;
    for (const auto& a : rec->info.args) {
        for (AtomId t : top_atoms(a)) {
            const auto& r = record(t);
            rec->deps.insert(rec->deps.end(), r.deps.begin(), r.deps.end());
            rec->transcendental = rec->transcendental || r.transcendental;
        }
    }
    std::sort(rec->deps.begin(), rec->deps.end());
    rec->deps.erase(std::unique(rec->deps.begin(), rec->deps.end()), rec->deps.end());

    std::string& text = rec->info.text;
    switch (ctx.kind) {
        case AtomKind::Coord:
            text = rec->info.name;
            break;
        case AtomKind::Opaque: {
            std::string call = rec->info.name;
            if (!rec->info.args.empty()) {
                call += '(';
                for (std::size_t i = 0; i < rec->info.args.size(); ++i) {
                    if (i) call += ',';
                    call += rec->info.args[i].str();
                }
                call += ')';
            }
            if (rec->info.partials.empty()) {
                text = call;
            } else {
                text = "pd(" + call;
                for (int k : rec->info.partials) text += ',' + std::to_string(k + 1);
                text += ')';
            }
            break;
        }
        default:
            rec->transcendental = true;
            text = std::string(kind_name(ctx.kind)) + "(" + rec->info.args.at(0).str() + ")";
    }
    return rec;
}

}  // namespace

const AtomRecord& record(AtomId id) { return Registry::instance().get(id); }

AtomId intern(AtomKind kind, std::string name, std::vector<int> partials, std::vector<ScalarExpr> args) {
    std::sort(partials.begin(), partials.end());
    std::string key;
    key += static_cast<char>('0' + static_cast<int>(kind));
    key += name;
    key += '[';
    for (int k : partials) key += std::to_string(k) + ",";
    key += ']';
    for (const auto& a : args) {
        key += '(';
        append_id_key(key, a.rep().num);
        key += '/';
        append_id_key(key, a.rep().den);
        key += ')';
    }
    BuildCtx ctx{kind, &name, &partials, &args};
    return Registry::instance().intern(key, &build_record, &ctx);
}

int structural_compare(const Monomial& a, const Monomial& b) {
    if (a.degree() != b.degree()) return a.degree() > b.degree() ? 1 : -1;
    auto keyed = [](const Monomial& m) {
        std::vector<std::pair<const std::string*, std::uint32_t>> k;
        k.reserve(m.f.size());
        for (const auto& [v, e] : m.f) k.emplace_back(&record(v).info.text, e);
        std::sort(k.begin(), k.end(), [](const auto& x, const auto& y) { return *x.first < *y.first; });
        return k;
    };
    auto ka = keyed(a), kb = keyed(b);
    for (std::size_t i = 0; i < ka.size() && i < kb.size(); ++i) {
        int c = ka[i].first->compare(*kb[i].first);
        if (c != 0) return c < 0 ? 1 : -1;
        if (ka[i].second != kb[i].second) return ka[i].second > kb[i].second ? 1 : -1;
    }
    if (ka.size() == kb.size()) return 0;
    return ka.size() > kb.size() ? 1 : -1;
}

namespace {

std::string monomial_text(const Monomial& m) {
    std::vector<std::pair<const std::string*, std::uint32_t>> k;
    for (const auto& [v, e] : m.f) k.emplace_back(&record(v).info.text, e);
    std::sort(k.begin(), k.end(), [](const auto& x, const auto& y) { return *x.first < *y.first; });
    std::string out;
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (i) out += '*';
        out += *k[i].first;
        if (k[i].second > 1) out += '^' + std::to_string(k[i].second);
    }
    return out;
}

}  // namespace

std::string poly_text(const Poly& p) {
    if (p.is_zero()) return "0";
    std::vector<const Poly::Term*> terms;
    for (const auto& t : p.terms()) terms.push_back(&t);
    std::sort(terms.begin(), terms.end(),
              [](const auto* x, const auto* y) { return structural_compare(x->first, y->first) > 0; });
    std::string out;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const auto& [m, c] = *terms[i];
        Rational a = abs(c);
        if (i == 0) {
            if (c < 0) out += '-';
        } else {
            out += c < 0 ? " - " : " + ";
        }
        if (m.is_one()) {
            out += a.get_str();
        } else {
            if (a != 1) out += a.get_str() + "*";
            out += monomial_text(m);
        }
    }
    return out;
}

}  // namespace acw::detail
