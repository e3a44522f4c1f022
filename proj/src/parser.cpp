#include <cctype>

#include "expr_rep.hpp"

namespace acw {
namespace {

class Parser {
  public:
    Parser(std::string_view src, const SymbolTable& sym) : s_(src), sym_(sym) {}

    ScalarExpr run() {
        ScalarExpr e = sum();
        skip();
        if (i_ != s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
        return e;
    }

  private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, i_); }

    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }

    bool accept(char c) {
        skip();
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    ScalarExpr sum() {
        ScalarExpr e = product();
        for (;;) {
            if (accept('+'))
                e += product();
            else if (accept('-'))
                e -= product();
            else
                return e;
        }
    }

    ScalarExpr product() {
        ScalarExpr e = unary();
        for (;;) {
            if (accept('*')) {
                e *= unary();
            } else if (accept('/')) {
                std::size_t at = i_;
                ScalarExpr d = unary();
                if (d.is_zero()) throw ParseError("division by zero", at);
                e /= d;
            } else {
                return e;
            }
        }
    }

    ScalarExpr unary() {
        if (accept('-')) return -unary();
        if (accept('+')) return unary();
        return power();
    }

    ScalarExpr power() {
        ScalarExpr base = primary();
        if (!accept('^')) return base;
        std::size_t at = i_;
        long k = int_exponent();
        if (k < 0 && base.is_zero()) throw ParseError("division by zero", at);
        return base.pow(static_cast<int>(k));
    }

    // integer exponent, right associative: 2^3^2 = 2^9
    long int_exponent() {
        skip();
        std::size_t at = i_;
        bool neg = accept('-');
        skip();
        bool paren = accept('(');
        if (paren) neg = accept('-') != neg;
        skip();
        if (i_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[i_])))
            throw ParseError("exponent must be an integer", at);
        long n = 0;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
            n = n * 10 + (s_[i_++] - '0');
            if (n > 1000) throw ParseError("exponent too large", at);
        }
        if (paren) expect(')');
        if (accept('^')) {
            long m = int_exponent();
            if (m < 0) throw ParseError("exponent must be an integer", at);
            long p = 1;
            for (long j = 0; j < m; ++j) {
                p *= n;
                if (p > 1000) throw ParseError("exponent too large", at);
            }
            n = p;
        }
        return neg ? -n : n;
    }

    Rational number() {
        std::size_t start = i_;
        std::string digits;
        long frac = 0;
        bool dot = false;
        while (i_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.')) {
            if (s_[i_] == '.') {
                if (dot) throw ParseError("malformed number", start);
                dot = true;
            } else {
                digits += s_[i_];
                if (dot) ++frac;
            }
            ++i_;
        }
        if (digits.empty()) throw ParseError("malformed number", start);
        mpz_class n(digits, 10), d = 1;
        for (long k = 0; k < frac; ++k) d *= 10;
        Rational q(n, d);
        q.canonicalize();
        return q;
    }

    std::string ident() {
        std::size_t start = i_;
        while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
        return std::string(s_.substr(start, i_ - start));
    }

    std::vector<ScalarExpr> call_args() {
        std::vector<ScalarExpr> args;
        if (accept(')')) return args;
        do {
            args.push_back(sum());
        } while (accept(','));
        expect(')');
        return args;
    }

    int slot_index() {
        skip();
        std::size_t at = i_;
        if (i_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[i_])))
            throw ParseError("expected slot number", at);
        int k = 0;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) k = k * 10 + (s_[i_++] - '0');
        return k;
    }

    ScalarExpr pd() {
        skip();
        std::size_t at = i_;
        std::string name = ident();
        auto it = sym_.opaque_arity.find(name);
        if (it == sym_.opaque_arity.end()) throw ParseError("pd() needs a declared function, got '" + name + "'", at);
        std::vector<ScalarExpr> args;
        if (accept('(')) args = call_args();
        if (static_cast<int>(args.size()) != it->second)
            throw ParseError(name + " expects " + std::to_string(it->second) + " arguments", at);
        std::vector<int> slots;
        while (accept(',')) {
            std::size_t sat = i_;
            int k = slot_index();
            if (k < 1 || k > it->second) throw ParseError("slot out of range", sat);
            slots.push_back(k - 1);
        }
        expect(')');
        return ScalarExpr::opaque(name, std::move(args), std::move(slots));
    }

    ScalarExpr primary() {
        skip();
        if (i_ >= s_.size()) fail("unexpected end of input");
        char c = s_[i_];
        if (c == '(') {
            ++i_;
            ScalarExpr e = sum();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return ScalarExpr(number());
        if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_')) fail("unexpected '" + std::string(1, c) + "'");
        std::size_t at = i_;
        std::string name = ident();
        skip();
        bool call = i_ < s_.size() && s_[i_] == '(';
        if (call) {
            ++i_;
            if (name == "pd") return pd();
            if (name == "diff") {
                ScalarExpr e = sum();
                expect(',');
                skip();
                std::size_t cat = i_;
                std::string coord = ident();
                if (!sym_.chart.has(coord)) throw ParseError("unknown coordinate '" + coord + "'", cat);
                expect(')');
                return differentiate(e, coord);
            }
            auto args = call_args();
            if (name == "sin" || name == "cos" || name == "exp" || name == "sqrt") {
                if (args.size() != 1) throw ParseError(name + " takes one argument", at);
                if (name == "sin") return ScalarExpr::sin(args[0]);
                if (name == "cos") return ScalarExpr::cos(args[0]);
                if (name == "exp") return ScalarExpr::exp(args[0]);
                return ScalarExpr::sqrt(args[0]);
            }
            auto it = sym_.opaque_arity.find(name);
            if (it == sym_.opaque_arity.end()) throw ParseError("unknown function '" + name + "'", at);
            if (static_cast<int>(args.size()) != it->second)
                throw ParseError(name + " expects " + std::to_string(it->second) + " arguments", at);
            return ScalarExpr::opaque(name, std::move(args));
        }
        if (sym_.chart.has(name)) return ScalarExpr::coord(name);
        if (auto it = sym_.constants.find(name); it != sym_.constants.end()) return it->second;
        if (auto it = sym_.opaque_arity.find(name); it != sym_.opaque_arity.end() && it->second == 0)
            return ScalarExpr::opaque(name, {});
        throw ParseError("unknown symbol '" + name + "'", at);
    }

    std::string_view s_;
    const SymbolTable& sym_;
    std::size_t i_ = 0;
};

}  // namespace

ScalarExpr parse(std::string_view src, const SymbolTable& symbols) { return Parser(src, symbols).run(); }

ScalarExpr parse(std::string_view src, const ChartSpec& chart) { return parse(src, SymbolTable(chart)); }

}  // namespace acw
