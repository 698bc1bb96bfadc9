#pragma once

// Random exact germs: the generated corpus behind the algebra checks.

#include "meroren/germ.hpp"

#include <random>

namespace meroren::corpus {

inline Rational small_rational(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> num(-4, 4);
  std::uniform_int_distribution<int> den(1, 3);
  return Rational(num(rng), den(rng));
}

/// Random polynomial in the listed variables, total degree <= max_degree.
inline Polynomial<GaussRational> random_polynomial(std::mt19937_64& rng, std::size_t p,
                                                   const std::vector<std::size_t>& vars,
                                                   int max_degree, int terms) {
  Polynomial<GaussRational> poly(p);
  std::uniform_int_distribution<int> deg(0, max_degree);
  std::uniform_int_distribution<std::size_t> pick(0, vars.size() - 1);
  std::bernoulli_distribution complex_coeff(0.2);
  for (int t = 0; t < terms; ++t) {
    Monomial m(p, 0);
    int d = deg(rng);
    for (int k = 0; k < d && !vars.empty(); ++k) m[vars[pick(rng)]] += 1;
    GaussRational c(small_rational(rng), complex_coeff(rng) ? small_rational(rng) : Rational(0));
    poly.add_term(std::move(m), c);
  }
  return poly;
}

/// Random nonzero form supported on vars with coefficients in [-2, 2].
inline LinearForm random_form(std::mt19937_64& rng, std::size_t p,
                              const std::vector<std::size_t>& vars) {
  std::uniform_int_distribution<int> coeff(-2, 2);
  for (;;) {
    std::vector<long long> c(p, 0);
    for (auto j : vars) c[j] = coeff(rng);
    LinearForm f(std::move(c));
    if (!f.is_zero()) return f;
  }
}

inline ExactGerm random_germ(std::mt19937_64& rng, std::size_t p,
                             const std::vector<std::size_t>& vars,
                             const std::vector<long long>& center) {
  std::uniform_int_distribution<int> nforms(0, 3);
  std::uniform_int_distribution<int> power(1, 2);
  PoleSet poles;
  int k = nforms(rng);
  for (int i = 0; i < k; ++i) poles[random_form(rng, p, vars).canonicalize().first] += power(rng);
  auto num = random_polynomial(rng, p, vars, 2, 3);
  if (num.is_zero()) num = Polynomial<GaussRational>::constant(p, GaussRational(1));
  return ExactGerm(center, std::move(num), std::move(poles));
}

inline std::vector<std::size_t> all_vars(std::size_t p) {
  std::vector<std::size_t> v(p);
  for (std::size_t i = 0; i < p; ++i) v[i] = i;
  return v;
}

/// Random Gaussian-rational point, shifted from center, avoiding no poles
/// (callers catch PoleError).
inline std::vector<GaussRational> random_point(std::mt19937_64& rng,
                                               const std::vector<long long>& center) {
  std::vector<GaussRational> x;
  for (auto c : center)
    x.emplace_back(Rational(c) + small_rational(rng) / 7, small_rational(rng) / 5);
  return x;
}

}  // namespace meroren::corpus
