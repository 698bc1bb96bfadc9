#pragma once

#include "meroren/field.hpp"
#include "meroren/linear_form.hpp"

#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace meroren {

using Monomial = std::vector<int>;

/// Sparse multivariate polynomial over a coefficient field, in a fixed
/// number of variables.
template <class C>
class Polynomial {
 public:
  using Traits = FieldTraits<C>;
  using Terms = std::map<Monomial, C>;

  Polynomial() = default;
  explicit Polynomial(std::size_t nvars) : nvars_(nvars) {}

  static Polynomial constant(std::size_t nvars, C c) {
    Polynomial p(nvars);
    p.add_term(Monomial(nvars, 0), std::move(c));
    return p;
  }
  static Polynomial variable(std::size_t nvars, std::size_t index) {
    Monomial m(nvars, 0);
    m.at(index) = 1;
    Polynomial p(nvars);
    p.add_term(std::move(m), C(Traits::from_rational(1)));
    return p;
  }
  static Polynomial from_form(const LinearForm& form) {
    Polynomial p(form.size());
    for (std::size_t i = 0; i < form.size(); ++i)
      if (form[i] != 0) {
        Monomial m(form.size(), 0);
        m[i] = 1;
        p.add_term(std::move(m), Traits::from_rational(Rational(form[i])));
      }
    return p;
  }
  static Polynomial from_rational_form(const std::vector<Rational>& coeffs) {
    Polynomial p(coeffs.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i)
      if (coeffs[i] != 0) {
        Monomial m(coeffs.size(), 0);
        m[i] = 1;
        p.add_term(std::move(m), Traits::from_rational(coeffs[i]));
      }
    return p;
  }

  std::size_t nvars() const { return nvars_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && total_degree(terms_.begin()->first) == 0);
  }
  C constant_term() const {
    auto it = terms_.find(Monomial(nvars_, 0));
    return it == terms_.end() ? C{} : it->second;
  }

  static int total_degree(const Monomial& m) {
    int d = 0;
    for (int e : m) d += e;
    return d;
  }
  int degree() const {
    int d = -1;
    for (const auto& [m, c] : terms_) d = std::max(d, total_degree(m));
    return d;
  }

  void add_term(Monomial m, C c) {
    if (m.size() != nvars_) throw std::invalid_argument("monomial arity mismatch");
    if (Traits::is_zero(c)) return;
    auto [it, inserted] = terms_.try_emplace(std::move(m), c);
    if (!inserted) {
      it->second += c;
      if (Traits::is_zero(it->second)) terms_.erase(it);
    }
  }

  Polynomial embedded(std::size_t p) const {
    if (p < nvars_) throw std::invalid_argument("cannot shrink polynomial");
    Polynomial out(p);
    for (const auto& [m, c] : terms_) {
      Monomial e = m;
      e.resize(p, 0);
      out.terms_.emplace(std::move(e), c);
    }
    return out;
  }

  Polynomial& operator+=(const Polynomial& o) {
    check(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    check(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  Polynomial& operator*=(const C& s) {
    if (Traits::is_zero(s)) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator-(Polynomial a) {
    for (auto& [m, c] : a.terms_) c = -c;
    return a;
  }
  friend Polynomial operator*(Polynomial a, const C& s) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check(b);
    Polynomial out(a.nvars_);
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) {
        Monomial m(a.nvars_);
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
        out.add_term(std::move(m), ca * cb);
      }
    return out;
  }
  Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

  Polynomial pow(int k) const {
    Polynomial out = constant(nvars_, Traits::from_rational(1));
    Polynomial base = *this;
    while (k > 0) {
      if (k & 1) out = out * base;
      k >>= 1;
      if (k) base = base * base;
    }
    return out;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
  }

  /// Partial derivative along direction v: sum_j v_j d/dx_j.
  Polynomial directional_derivative(const std::vector<Rational>& v) const {
    Polynomial out(nvars_);
    for (const auto& [m, c] : terms_)
      for (std::size_t j = 0; j < nvars_; ++j) {
        if (m[j] == 0 || v[j] == 0) continue;
        Monomial d = m;
        d[j] -= 1;
        out.add_term(std::move(d), c * Traits::from_rational(v[j] * m[j]));
      }
    return out;
  }

  /// Substitutes x_j = sum_k rows[j][k] u_k, returning a polynomial in the u.
  Polynomial compose_linear(const RationalMatrix& rows) const {
    if (rows.size() != nvars_) throw std::invalid_argument("substitution arity mismatch");
    const std::size_t q = rows.empty() ? 0 : rows[0].size();
    std::vector<Polynomial> images;
    images.reserve(nvars_);
    for (const auto& r : rows) images.push_back(Polynomial::from_rational_form(r));
    // Cache powers of each image to avoid recomputation across monomials.
    std::vector<std::vector<Polynomial>> powers(nvars_);
    Polynomial out(q);
    for (const auto& [m, c] : terms_) {
      Polynomial term = constant(q, c);
      for (std::size_t j = 0; j < nvars_; ++j) {
        if (m[j] == 0) continue;
        auto& pw = powers[j];
        if (pw.empty()) pw.push_back(constant(q, Traits::from_rational(1)));
        while (static_cast<int>(pw.size()) <= m[j]) pw.push_back(pw.back() * images[j]);
        term = term * pw[m[j]];
      }
      out += term;
    }
    return out;
  }

  /// Indices of variables occurring with nonzero exponent.
  std::set<std::size_t> variables() const {
    std::set<std::size_t> s;
    for (const auto& [m, c] : terms_)
      for (std::size_t j = 0; j < nvars_; ++j)
        if (m[j] != 0) s.insert(j);
    return s;
  }

  template <class T>
  T evaluate(std::span<const T> x) const {
    T acc{};
    for (const auto& [m, c] : terms_) {
      T t = convert<T>(c);
      for (std::size_t j = 0; j < nvars_; ++j)
        for (int e = 0; e < m[j]; ++e) t *= x[j];
      acc += t;
    }
    return acc;
  }

  /// Max coefficient magnitude, used for approximate comparisons.
  double max_abs() const {
    double m = 0;
    for (const auto& [mono, c] : terms_) m = std::max(m, Traits::magnitude(c));
    return m;
  }

  template <class D>
  Polynomial<D> cast() const {
    Polynomial<D> out(nvars_);
    for (const auto& [m, c] : terms_) out.add_term(m, convert<D>(c));
    return out;
  }

  std::string to_string() const;

 private:
  template <class T>
  static T convert(const C& c) {
    if constexpr (std::is_same_v<T, C>)
      return c;
    else
      return T(Traits::to_complex(c));
  }

  void check(const Polynomial& o) const {
    if (o.nvars_ != nvars_) throw std::invalid_argument("polynomial arity mismatch");
  }

  std::size_t nvars_ = 0;
  Terms terms_;
};

std::string coefficient_text(const GaussRational& c);
std::string coefficient_text(const Complex& c);

template <class C>
std::string Polynomial<C>::to_string() const {
  if (terms_.empty()) return "0";
  std::string s;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    if (!first) s += " + ";
    first = false;
    s += coefficient_text(c);
    for (std::size_t j = 0; j < nvars_; ++j) {
      if (m[j] == 0) continue;
      s += "*l" + std::to_string(j + 1);
      if (m[j] > 1) s += "^" + std::to_string(m[j]);
    }
  }
  return s;
}

}  // namespace meroren
