#pragma once

// Meromorphic germs with linear poles and the projection onto their
// holomorphic part along the numerator-orthogonal singular subspace.

#include "meroren/errors.hpp"
#include "meroren/linear_form.hpp"
#include "meroren/polynomial.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace meroren {

/// Multiset of canonical pole forms with positive powers.
using PoleSet = std::map<LinearForm, int>;

/// h(x) / prod L_i(x)^{s_i} with x = lambda - center.
template <class C>
class MeroGerm {
 public:
  using Traits = FieldTraits<C>;

  MeroGerm() = default;
  MeroGerm(std::vector<long long> center, Polynomial<C> numerator, PoleSet poles = {})
      : center_(std::move(center)), numerator_(std::move(numerator)) {
    if (numerator_.nvars() != center_.size())
      throw GermError("numerator arity does not match center");
    for (auto& [form, power] : poles) add_pole(form, power);
  }

  static MeroGerm zero(std::size_t p) {
    return MeroGerm(std::vector<long long>(p, 0), Polynomial<C>(p));
  }

  std::size_t nvars() const { return center_.size(); }
  const std::vector<long long>& center() const { return center_; }
  const Polynomial<C>& numerator() const { return numerator_; }
  const PoleSet& poles() const { return poles_; }
  bool is_holomorphic() const { return poles_.empty(); }

  std::vector<LinearForm> pole_forms() const {
    std::vector<LinearForm> f;
    for (const auto& [form, s] : poles_) f.push_back(form);
    return f;
  }

  /// Variable indices that actually occur in the numerator or a pole form.
  std::set<std::size_t> variables() const {
    auto v = numerator_.variables();
    for (const auto& [form, s] : poles_)
      for (auto j : form.support()) v.insert(j);
    return v;
  }

  MeroGerm embedded(std::size_t p) const {
    auto c = center_;
    c.resize(p, 0);
    PoleSet poles;
    for (const auto& [form, s] : poles_) poles[form.embedded(p)] = s;
    return MeroGerm(std::move(c), numerator_.embedded(p), std::move(poles));
  }

  MeroGerm scaled(const C& s) const {
    MeroGerm g = *this;
    g.numerator_ *= s;
    if (g.numerator_.is_zero()) g.poles_.clear();
    return g;
  }

  std::string to_string() const;

 private:
  void add_pole(const LinearForm& form, int power) {
    if (power <= 0) throw GermError("pole powers must be positive");
    if (form.size() != nvars()) throw GermError("pole form arity mismatch");
    auto [canon, scale] = form.canonicalize();
    // L = scale * canon, so 1/L^s = scale^{-s} / canon^s.
    Rational f = 1;
    for (int i = 0; i < power; ++i) f /= Rational(scale);
    numerator_ *= Traits::from_rational(f);
    poles_[canon] += power;
  }

  std::vector<long long> center_;
  Polynomial<C> numerator_;
  PoleSet poles_;
};

/// h(l)/prod L^s with independent L and h depending only on directions
/// orthogonal to span(L).
template <class C>
struct PolarTerm {
  Polynomial<C> numerator;  // in the shifted variables x = lambda - center
  PoleSet poles;
  std::vector<LinearForm> complement;  // orthogonal complement basis of the pole span
};

template <class C>
struct Decomposition {
  std::vector<long long> center;
  std::vector<PolarTerm<C>> singular;
  Polynomial<C> holomorphic;
};

template <class C>
MeroGerm<C> polar_germ(const std::vector<long long>& center, const PolarTerm<C>& t) {
  return MeroGerm<C>(center, t.numerator, t.poles);
}

// --- ring operations -------------------------------------------------------

namespace detail {

template <class C>
void require_same_center(const MeroGerm<C>& a, const MeroGerm<C>& b) {
  if (a.center() != b.center()) throw GermError("germs expanded at different centers");
}

template <class C>
Polynomial<C> pole_product(std::size_t p, const PoleSet& poles) {
  Polynomial<C> out = Polynomial<C>::constant(p, FieldTraits<C>::from_rational(1));
  for (const auto& [form, s] : poles) out = out * Polynomial<C>::from_form(form).pow(s);
  return out;
}

template <class C>
std::pair<MeroGerm<C>, MeroGerm<C>> common_arity(const MeroGerm<C>& a, const MeroGerm<C>& b) {
  std::size_t p = std::max(a.nvars(), b.nvars());
  auto ea = a.embedded(p);
  auto eb = b.embedded(p);
  require_same_center(ea, eb);
  return {ea, eb};
}

}  // namespace detail

template <class C>
MeroGerm<C> mul(const MeroGerm<C>& a, const MeroGerm<C>& b) {
  auto [x, y] = detail::common_arity(a, b);
  PoleSet poles = x.poles();
  for (const auto& [f, s] : y.poles()) poles[f] += s;
  auto num = x.numerator() * y.numerator();
  if (num.is_zero()) poles.clear();
  return MeroGerm<C>(x.center(), std::move(num), std::move(poles));
}

/// Sum over the least common denominator.
template <class C>
MeroGerm<C> add(const MeroGerm<C>& a, const MeroGerm<C>& b) {
  auto [x, y] = detail::common_arity(a, b);
  const std::size_t p = x.nvars();
  PoleSet lcd = x.poles();
  for (const auto& [f, s] : y.poles()) lcd[f] = std::max(lcd[f], s);
  auto lift = [&](const MeroGerm<C>& g) {
    PoleSet missing;
    for (const auto& [f, s] : lcd) {
      auto it = g.poles().find(f);
      int have = it == g.poles().end() ? 0 : it->second;
      if (s > have) missing[f] = s - have;
    }
    return g.numerator() * detail::pole_product<C>(p, missing);
  };
  auto num = lift(x) + lift(y);
  if (num.is_zero()) return MeroGerm<C>(x.center(), Polynomial<C>(p));
  return simplify(MeroGerm<C>(x.center(), std::move(num), std::move(lcd)));
}

template <class C>
MeroGerm<C> sub(const MeroGerm<C>& a, const MeroGerm<C>& b) {
  return add(a, b.scaled(-FieldTraits<C>::from_rational(1)));
}

/// Removes pole factors that divide the numerator exactly.
template <class C>
MeroGerm<C> simplify(const MeroGerm<C>& g);

/// True iff the sets of variables occurring in the two germs are disjoint.
template <class C>
bool independent(const MeroGerm<C>& a, const MeroGerm<C>& b) {
  auto va = a.variables();
  for (auto j : b.variables())
    if (va.count(j)) return false;
  return true;
}

// --- polynomial division by a linear form -----------------------------------

/// Exact division of h by the linear form L, nullopt if L does not divide h.
/// Works by eliminating the first variable in L's support.
template <class C>
std::optional<Polynomial<C>> divide_by_form(const Polynomial<C>& h, const LinearForm& form) {
  using T = FieldTraits<C>;
  const std::size_t p = h.nvars();
  auto sup = form.support();
  if (sup.empty()) throw GermError("zero linear form");
  const std::size_t lead = sup.front();
  const C lead_coeff = T::from_rational(Rational(form[lead]));
  Polynomial<C> rem = h;
  Polynomial<C> quot(p);
  const auto Lpoly = Polynomial<C>::from_form(form);
  // Repeatedly cancel the term with the highest power of the lead variable.
  int guard = 0;
  while (!rem.is_zero()) {
    if (++guard > 100000) throw GermError("division did not terminate");
    const Monomial* best = nullptr;
    for (const auto& [m, c] : rem.terms())
      if (!best || m[lead] > (*best)[lead] ||
          (m[lead] == (*best)[lead] && m > *best))
        best = &m;
    if ((*best)[lead] == 0) return std::nullopt;
    Monomial qm = *best;
    qm[lead] -= 1;
    C qc = rem.terms().at(*best) / lead_coeff;
    Polynomial<C> qt(p);
    qt.add_term(qm, qc);
    quot += qt;
    rem -= qt * Lpoly;
    if constexpr (!T::exact) {
      // Drop roundoff residue relative to the input scale.
      double scale = std::max(1.0, h.max_abs());
      Polynomial<C> cleaned(p);
      for (const auto& [m, c] : rem.terms())
        if (T::magnitude(c) > 1e-13 * scale) cleaned.add_term(m, c);
      rem = cleaned;
    }
  }
  return quot;
}

template <class C>
MeroGerm<C> simplify(const MeroGerm<C>& g) {
  if (g.numerator().is_zero()) return MeroGerm<C>(g.center(), Polynomial<C>(g.nvars()));
  Polynomial<C> num = g.numerator();
  PoleSet poles;
  for (const auto& [form, s] : g.poles()) {
    int remaining = s;
    while (remaining > 0) {
      auto q = divide_by_form(num, form);
      if (!q) break;
      num = std::move(*q);
      --remaining;
    }
    if (remaining > 0) poles[form] = remaining;
  }
  return MeroGerm<C>(g.center(), std::move(num), std::move(poles));
}

// --- dependent pole sets ----------------------------------------------------

/// Rewrites g as a sum of germs whose pole forms are linearly independent.
///
/// While a germ has a dependent pole set, the first form L_j lying in the
/// span of its predecessors gives a relation sum_{i in S} c_i L_i = 0. The
/// pivot i0 is the member of S with the largest power (ties: the greatest
/// canonical form), and 1 = -sum_{i != i0} (c_i / c_i0) L_i / L_i0 is
/// inserted. Each application lowers the power of some other member of S.
template <class C>
std::vector<MeroGerm<C>> reduce_dependent(const MeroGerm<C>& g) {
  using T = FieldTraits<C>;
  std::map<PoleSet, Polynomial<C>> done;
  std::vector<std::pair<PoleSet, Polynomial<C>>> work{{g.poles(), g.numerator()}};
  std::size_t steps = 0;
  while (!work.empty()) {
    if (++steps > 1000000) throw GermError("dependent pole reduction did not terminate");
    auto [poles, num] = std::move(work.back());
    work.pop_back();
    if (num.is_zero()) continue;
    std::vector<LinearForm> forms;
    for (const auto& [f, s] : poles) forms.push_back(f);
    std::optional<std::vector<Rational>> relation;
    std::size_t dependent_index = 0;
    for (std::size_t j = 1; j < forms.size() && !relation; ++j) {
      auto prefix = std::span<const LinearForm>(forms.data(), j);
      if (!linearly_independent(prefix)) break;  // cannot happen: checked incrementally
      if (auto c = solve_in_span(to_matrix(prefix), to_rational(forms[j]))) {
        // forms[j] - sum c_i forms[i] = 0
        std::vector<Rational> rel(forms.size(), Rational(0));
        for (std::size_t i = 0; i < j; ++i) rel[i] = -(*c)[i];
        rel[j] = 1;
        relation = std::move(rel);
        dependent_index = j;
      }
    }
    if (!relation) {
      auto [it, inserted] = done.try_emplace(poles, num);
      if (!inserted) it->second += num;
      continue;
    }
    (void)dependent_index;
    std::size_t pivot = forms.size();
    for (std::size_t i = 0; i < forms.size(); ++i) {
      if ((*relation)[i] == 0) continue;
      if (pivot == forms.size() || poles.at(forms[i]) >= poles.at(forms[pivot])) pivot = i;
    }
    const Rational cp = (*relation)[pivot];
    for (std::size_t i = 0; i < forms.size(); ++i) {
      if (i == pivot || (*relation)[i] == 0) continue;
      PoleSet next = poles;
      next[forms[pivot]] += 1;
      if (--next[forms[i]] == 0) next.erase(forms[i]);
      // h / (...) * (-(c_i/c_p) L_i / L_p): L_i cancels one power.
      Polynomial<C> n = num * T::from_rational(-(*relation)[i] / cp);
      work.emplace_back(std::move(next), std::move(n));
    }
  }
  std::vector<MeroGerm<C>> out;
  for (auto& [poles, num] : done)
    if (!num.is_zero()) out.emplace_back(g.center(), std::move(num), poles);
  return out;
}

// --- projection -------------------------------------------------------------

namespace detail {

template <class C>
struct SplitAccumulator {
  std::size_t p;
  std::map<PoleSet, PolarTerm<C>> singular;
  Polynomial<C> holomorphic;
};

/// Splits h / prod L^s (independent L) into singular terms with numerators
/// in the orthogonal-complement coordinates and a holomorphic remainder.
/// Mixed monomials are pushed back as germs with fewer poles.
template <class C>
void split_independent(const PoleSet& poles, const Polynomial<C>& num,
                       std::map<PoleSet, Polynomial<C>, std::greater<>>& pending,
                       SplitAccumulator<C>& acc) {
  const std::size_t p = acc.p;
  if (poles.empty()) {
    acc.holomorphic += num;
    return;
  }
  std::vector<LinearForm> forms;
  std::vector<int> powers;
  for (const auto& [f, s] : poles) {
    forms.push_back(f);
    powers.push_back(s);
  }
  const std::size_t m = forms.size();
  auto complement = orth_complement(forms, p);
  // Rows of M map x to coordinates u = (L_1..L_m, l_{m+1}..l_p).
  RationalMatrix M = to_matrix(forms);
  for (const auto& l : complement) M.push_back(to_rational(l));
  auto Minv = inverse(M);
  if (!Minv) throw GermError("dependent input");
  // h(x) with x = Minv u.
  Polynomial<C> H = num.compose_linear(*Minv);
  const auto& Mrows = M;
  for (const auto& [mono, c] : H.terms()) {
    bool all_cancel = true;
    bool none_cancel = true;
    for (std::size_t i = 0; i < m; ++i) {
      if (mono[i] >= powers[i])
        none_cancel = false;
      else
        all_cancel = false;
    }
    PoleSet rest;
    Monomial reduced = mono;
    for (std::size_t i = 0; i < m; ++i) {
      if (mono[i] >= powers[i])
        reduced[i] = mono[i] - powers[i];
      else {
        rest[forms[i]] = powers[i] - mono[i];
        reduced[i] = 0;
      }
    }
    Polynomial<C> u_term(p);
    u_term.add_term(reduced, c);
    // u_k = sum_j M[k][j] x_j
    Polynomial<C> x_term = u_term.compose_linear(Mrows);
    if (all_cancel) {
      acc.holomorphic += x_term;
    } else if (none_cancel) {
      auto [it, inserted] = acc.singular.try_emplace(rest, PolarTerm<C>{x_term, rest, complement});
      if (!inserted) it->second.numerator += x_term;
    } else {
      auto [it, inserted] = pending.try_emplace(rest, x_term);
      if (!inserted) it->second += x_term;
    }
  }
}

}  // namespace detail

/// The projection: holomorphic part and numerator-orthogonal singular terms.
template <class C>
Decomposition<C> project_pi(const MeroGerm<C>& g) {
  const std::size_t p = g.nvars();
  detail::SplitAccumulator<C> acc{p, {}, Polynomial<C>(p)};
  // Pending work keyed by pole set; larger sets (lexicographically greater
  // maps) are processed first so that each subset is split once.
  std::map<PoleSet, Polynomial<C>, std::greater<>> pending;
  for (const auto& piece : reduce_dependent(g)) {
    auto [it, inserted] = pending.try_emplace(piece.poles(), piece.numerator());
    if (!inserted) it->second += piece.numerator();
  }
  while (!pending.empty()) {
    // Pick the pole set with the most total power so subsets come later.
    auto best = pending.begin();
    int best_weight = -1;
    for (auto it = pending.begin(); it != pending.end(); ++it) {
      int w = 0;
      for (const auto& [f, s] : it->first) w += s;
      if (w > best_weight) {
        best_weight = w;
        best = it;
      }
    }
    PoleSet poles = best->first;
    Polynomial<C> num = std::move(best->second);
    pending.erase(best);
    if (num.is_zero()) continue;
    detail::split_independent(poles, num, pending, acc);
  }
  Decomposition<C> d{g.center(), {}, std::move(acc.holomorphic)};
  for (auto& [poles, term] : acc.singular)
    if (!term.numerator.is_zero()) d.singular.push_back(std::move(term));
  return d;
}

/// Sum of the singular part as a single germ.
template <class C>
MeroGerm<C> singular_germ(const Decomposition<C>& d) {
  const std::size_t p = d.center.size();
  MeroGerm<C> acc(d.center, Polynomial<C>(p));
  for (const auto& t : d.singular) acc = add(acc, polar_germ(d.center, t));
  return acc;
}

template <class C>
MeroGerm<C> holomorphic_germ(const Decomposition<C>& d) {
  return MeroGerm<C>(d.center, d.holomorphic);
}

/// singular + holomorphic as one germ.
template <class C>
MeroGerm<C> reassemble(const Decomposition<C>& d) {
  return add(singular_germ(d), holomorphic_germ(d));
}

/// Clears denominators and compares numerators. Exact for Gaussian
/// rationals; for complex doubles uses a relative coefficient tolerance.
template <class C>
bool same_function(const MeroGerm<C>& a, const MeroGerm<C>& b, double tol = 1e-10) {
  auto diff = sub(a, b);
  if constexpr (FieldTraits<C>::exact) {
    return diff.numerator().is_zero();
  } else {
    double scale = std::max({1.0, a.numerator().max_abs(), b.numerator().max_abs()});
    return diff.numerator().max_abs() <= tol * scale;
  }
}

/// Checks that every singular numerator is constant along each pole
/// direction (its directional derivative along L_i vanishes) and that the
/// pole forms are independent.
template <class C>
bool orthogonality_holds(const Decomposition<C>& d, double tol = 1e-10) {
  for (const auto& t : d.singular) {
    std::vector<LinearForm> forms;
    for (const auto& [f, s] : t.poles) forms.push_back(f);
    if (!linearly_independent(forms)) return false;
    for (const auto& f : forms) {
      auto dd = t.numerator.directional_derivative(to_rational(f));
      if constexpr (FieldTraits<C>::exact) {
        if (!dd.is_zero()) return false;
      } else {
        if (dd.max_abs() > tol * std::max(1.0, t.numerator.max_abs())) return false;
      }
    }
    for (const auto& l : t.complement)
      for (const auto& f : forms)
        if (l.dot(f) != 0) return false;
  }
  return true;
}

// --- evaluation --------------------------------------------------------------

inline constexpr double kDefaultPoleGuard = 1e-12;

/// Numeric evaluation at lambda (absolute coordinates).
template <class C>
Complex eval(const MeroGerm<C>& g, std::span<const Complex> lambda,
             double guard = kDefaultPoleGuard) {
  std::vector<Complex> x(g.nvars());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = lambda[j] - double(g.center()[j]);
  Complex den = 1;
  for (const auto& [form, s] : g.poles()) {
    Complex l = form.template apply<Complex>(x);
    if (std::abs(l) <= guard) throw PoleError();
    for (int i = 0; i < s; ++i) den *= l;
  }
  auto numc = g.numerator().template cast<Complex>();
  return numc.template evaluate<Complex>(x) / den;
}

/// Exact evaluation at a Gaussian-rational point.
inline GaussRational eval_exact(const MeroGerm<GaussRational>& g,
                                std::span<const GaussRational> lambda) {
  std::vector<GaussRational> x(g.nvars());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = lambda[j] - GaussRational(g.center()[j]);
  GaussRational den = 1;
  for (const auto& [form, s] : g.poles()) {
    GaussRational l = form.apply<GaussRational>(x);
    if (l.is_zero()) throw PoleError();
    for (int i = 0; i < s; ++i) den *= l;
  }
  return g.numerator().template evaluate<GaussRational>(x) / den;
}

template <class C>
Complex eval(const Decomposition<C>& d, std::span<const Complex> lambda,
             double guard = kDefaultPoleGuard) {
  Complex acc = eval(holomorphic_germ(d), lambda, guard);
  for (const auto& t : d.singular) acc += eval(polar_germ(d.center, t), lambda, guard);
  return acc;
}

/// Value of the holomorphic part at the center.
template <class C>
Complex holomorphic_value_at_center(const Decomposition<C>& d) {
  return FieldTraits<C>::to_complex(d.holomorphic.constant_term());
}

template <class C>
std::string MeroGerm<C>::to_string() const {
  std::string s = "(" + numerator_.to_string() + ")";
  if (poles_.empty()) return s;
  s += "/(";
  bool first = true;
  for (const auto& [form, power] : poles_) {
    if (!first) s += "*";
    first = false;
    s += "(" + form.to_string() + ")";
    if (power > 1) s += "^" + std::to_string(power);
  }
  return s + ")";
}

using ExactGerm = MeroGerm<GaussRational>;
using ApproxGerm = MeroGerm<Complex>;

}  // namespace meroren
