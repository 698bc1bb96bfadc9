#include "meroren/germ_parser.hpp"

#include <cctype>
#include <set>

namespace meroren {

namespace {

using Poly = Polynomial<GaussRational>;

struct Value {
  Poly num;
  PoleSet den;
  // Scalar factor of the denominator is folded into num.
};

class Parser {
 public:
  Parser(std::string_view text, std::size_t p) : text_(text), p_(p) {}

  ExactGerm run() {
    Value v = expr();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected character '" + std::string(1, text_[pos_]) + "'", pos_);
    return simplify(ExactGerm(std::vector<long long>(p_, 0), v.num, v.den));
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  Value constant(GaussRational c) { return {Poly::constant(p_, std::move(c)), {}}; }

  void note_candidate(const Value& v) {
    if (!v.den.empty() || v.num.degree() != 1) return;
    if (!GaussRational(v.num.constant_term()).is_zero()) return;
    // Linear homogeneous with rational (real) coefficients only.
    std::vector<Rational> coeffs(p_, Rational(0));
    for (const auto& [m, c] : v.num.terms()) {
      if (c.im != 0) return;
      for (std::size_t j = 0; j < p_; ++j)
        if (m[j] == 1) coeffs[j] = c.re;
    }
    candidates_.insert(primitive_form(coeffs));
  }

  Value expr() {
    Value v = term();
    for (;;) {
      if (accept('+')) {
        v = add_values(v, term());
      } else if (peek() == '-') {
        ++pos_;
        Value r = term();
        r.num *= GaussRational(-1);
        v = add_values(v, r);
      } else {
        break;
      }
    }
    note_candidate(v);
    return v;
  }

  Value term() {
    Value v = unary();
    for (;;) {
      if (accept('*')) {
        v = mul_values(v, unary());
      } else if (peek() == '/') {
        std::size_t at = pos_;
        ++pos_;
        v = div_values(v, unary(), at);
      } else {
        break;
      }
    }
    note_candidate(v);
    return v;
  }

  Value unary() {
    if (accept('+')) return unary();
    if (accept('-')) {
      Value v = unary();
      v.num *= GaussRational(-1);
      note_candidate(v);
      return v;
    }
    return power();
  }

  Value power() {
    Value base = atom();
    if (!accept('^')) return base;
    bool neg = accept('-');
    skip_ws();
    std::size_t at = pos_;
    long long e = integer();
    if (e > 64) throw ParseError("exponent too large", at);
    Value out = constant(1);
    for (long long k = 0; k < e; ++k) out = mul_values(out, base);
    if (neg) out = div_values(constant(1), out, at);
    return out;
  }

  long long integer() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) throw ParseError("expected integer", start);
    return std::stoll(std::string(text_.substr(start, pos_ - start)));
  }

  Value atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Value v = expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return number();
    if (c == 'i') {
      ++pos_;
      return constant(GaussRational(0, 1));
    }
    if (c == 'l') {
      std::size_t at = pos_;
      ++pos_;
      long long idx = integer();
      if (idx < 1 || static_cast<std::size_t>(idx) > p_)
        throw ParseError("variable l" + std::to_string(idx) + " out of range", at);
      Value v{Poly::variable(p_, static_cast<std::size_t>(idx - 1)), {}};
      note_candidate(v);
      return v;
    }
    throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
  }

  Value number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    Rational value(BigInt(std::string(text_.substr(start, pos_ - start))));
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      std::size_t fs = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (fs == pos_) throw ParseError("expected digits after '.'", fs);
      BigInt frac(std::string(text_.substr(fs, pos_ - fs)));
      BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(pos_ - fs));
      value += Rational(frac, scale);
    }
    return constant(GaussRational(value));
  }

  Value add_values(const Value& a, const Value& b) {
    auto g = add(ExactGerm(std::vector<long long>(p_, 0), a.num, a.den),
                 ExactGerm(std::vector<long long>(p_, 0), b.num, b.den));
    return {g.numerator(), g.poles()};
  }

  Value mul_values(const Value& a, const Value& b) {
    auto g = mul(ExactGerm(std::vector<long long>(p_, 0), a.num, a.den),
                 ExactGerm(std::vector<long long>(p_, 0), b.num, b.den));
    return {g.numerator(), g.poles()};
  }

  Value div_values(const Value& a, const Value& b, std::size_t at) {
    if (b.num.is_zero()) throw ParseError("division by zero", at);
    // a / (Nb / Db) = a * Db / Nb with Nb factored into linear forms.
    Poly rest = b.num;
    PoleSet factors;
    bool progress = true;
    while (!rest.is_constant() && progress) {
      progress = false;
      for (const auto& form : candidates_) {
        if (auto q = divide_by_form(rest, form)) {
          rest = std::move(*q);
          factors[form] += 1;
          progress = true;
          break;
        }
      }
    }
    if (!rest.is_constant()) {
      // A lone homogeneous linear factor that was not seen as a candidate.
      Value tmp{rest, {}};
      std::size_t before = candidates_.size();
      note_candidate(tmp);
      if (candidates_.size() == before || rest.degree() != 1)
        throw ParseError("nonlinear pole", at);
      return div_values(a, b, at);
    }
    GaussRational c = rest.constant_term();
    Value out = a;
    out.num *= GaussRational(1) / c;
    Poly db = Poly::constant(p_, GaussRational(1));
    for (const auto& [f, s] : b.den) db = db * Poly::from_form(f).pow(s);
    out.num = out.num * db;
    for (const auto& [f, s] : factors) out.den[f] += s;
    auto g = simplify(ExactGerm(std::vector<long long>(p_, 0), out.num, out.den));
    return {g.numerator(), g.poles()};
  }

  std::string_view text_;
  std::size_t p_;
  std::size_t pos_ = 0;
  std::set<LinearForm> candidates_;
};

}  // namespace

ExactGerm parse_germ(std::string_view text, std::size_t p) {
  if (p == 0) throw ParseError("variable count must be positive", 0);
  return Parser(text, p).run();
}

std::string to_text(const ExactGerm& g) { return g.to_string(); }

}  // namespace meroren
