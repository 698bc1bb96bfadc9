#include "meroren/linear_form.hpp"

#include "meroren/errors.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace meroren {

LinearForm::LinearForm(std::vector<long long> coeffs) : coeffs_(std::move(coeffs)) {}

LinearForm LinearForm::coordinate(std::size_t p, std::size_t index) {
  std::vector<long long> c(p, 0);
  c.at(index) = 1;
  return LinearForm(std::move(c));
}

bool LinearForm::is_zero() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](long long c) { return c == 0; });
}

bool LinearForm::is_canonical() const { return canonicalize().second == 1; }

std::pair<LinearForm, long long> LinearForm::canonicalize() const {
  if (is_zero()) throw GermError("zero linear form");
  long long g = 0;
  for (long long c : coeffs_) g = std::gcd(g, c);
  long long lead = 0;
  for (long long c : coeffs_)
    if (c != 0) {
      lead = c;
      break;
    }
  if (lead < 0) g = -g;
  std::vector<long long> out(coeffs_.size());
  for (std::size_t i = 0; i < coeffs_.size(); ++i) out[i] = coeffs_[i] / g;
  return {LinearForm(std::move(out)), g};
}

LinearForm LinearForm::embedded(std::size_t p) const {
  if (p < coeffs_.size()) throw GermError("cannot shrink linear form");
  auto c = coeffs_;
  c.resize(p, 0);
  return LinearForm(std::move(c));
}

std::vector<std::size_t> LinearForm::support() const {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < coeffs_.size(); ++i)
    if (coeffs_[i] != 0) s.push_back(i);
  return s;
}

Rational LinearForm::dot(const LinearForm& other) const {
  Rational acc = 0;
  for (std::size_t i = 0; i < std::min(size(), other.size()); ++i)
    acc += Rational(coeffs_[i]) * Rational(other.coeffs_[i]);
  return acc;
}

std::string LinearForm::to_string() const {
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    long long c = coeffs_[i];
    if (c == 0) continue;
    if (c < 0)
      os << (first ? "-" : "-");
    else if (!first)
      os << "+";
    long long a = c < 0 ? -c : c;
    if (a != 1) os << a << "*";
    os << "l" << (i + 1);
    first = false;
  }
  if (first) os << "0";
  return os.str();
}

namespace {

// Row-reduces in place and returns pivot columns.
std::vector<std::size_t> row_reduce(RationalMatrix& m) {
  std::vector<std::size_t> pivots;
  if (m.empty()) return pivots;
  const std::size_t cols = m[0].size();
  std::size_t row = 0;
  for (std::size_t col = 0; col < cols && row < m.size(); ++col) {
    std::size_t sel = row;
    while (sel < m.size() && m[sel][col] == 0) ++sel;
    if (sel == m.size()) continue;
    std::swap(m[row], m[sel]);
    Rational inv = 1 / m[row][col];
    for (auto& v : m[row]) v *= inv;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == row || m[r][col] == 0) continue;
      Rational f = m[r][col];
      for (std::size_t c = 0; c < cols; ++c) m[r][c] -= f * m[row][c];
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

}  // namespace

std::size_t rank(RationalMatrix rows) { return row_reduce(rows).size(); }

std::optional<RationalMatrix> inverse(const RationalMatrix& m) {
  const std::size_t n = m.size();
  RationalMatrix aug(n, std::vector<Rational>(2 * n, Rational(0)));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug[i][j] = m[i][j];
    aug[i][n + i] = 1;
  }
  auto pivots = row_reduce(aug);
  if (pivots.size() < n || pivots[n - 1] != n - 1) return std::nullopt;
  RationalMatrix inv(n, std::vector<Rational>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv[i][j] = aug[i][n + j];
  return inv;
}

std::optional<std::vector<Rational>> solve_in_span(const RationalMatrix& rows,
                                                   const std::vector<Rational>& target) {
  // Solve sum_i c_i rows[i] = target via the transposed system.
  const std::size_t k = rows.size();
  const std::size_t p = target.size();
  RationalMatrix sys(p, std::vector<Rational>(k + 1));
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < k; ++i) sys[j][i] = rows[i][j];
    sys[j][k] = target[j];
  }
  auto pivots = row_reduce(sys);
  if (!pivots.empty() && pivots.back() == k) return std::nullopt;
  std::vector<Rational> c(k, Rational(0));
  for (std::size_t r = 0; r < pivots.size(); ++r) c[pivots[r]] = sys[r][k];
  return c;
}

RationalMatrix to_matrix(std::span<const LinearForm> forms) {
  RationalMatrix m;
  m.reserve(forms.size());
  for (const auto& f : forms) m.push_back(to_rational(f));
  return m;
}

std::vector<Rational> to_rational(const LinearForm& form) {
  std::vector<Rational> v;
  v.reserve(form.size());
  for (long long c : form.coeffs()) v.emplace_back(c);
  return v;
}

LinearForm primitive_form(const std::vector<Rational>& v) {
  BigInt den = 1;
  for (const auto& x : v) den = boost::multiprecision::lcm(den, boost::multiprecision::denominator(x));
  std::vector<long long> ints;
  ints.reserve(v.size());
  for (const auto& x : v) {
    BigInt n = boost::multiprecision::numerator(x) * (den / boost::multiprecision::denominator(x));
    ints.push_back(n.convert_to<long long>());
  }
  return LinearForm(std::move(ints)).canonicalize().first;
}

bool linearly_independent(std::span<const LinearForm> forms) {
  return rank(to_matrix(forms)) == forms.size();
}

std::vector<LinearForm> orth_complement(std::span<const LinearForm> forms, std::size_t p) {
  if (!linearly_independent(forms)) throw GermError("dependent input");
  auto dot = [](const std::vector<Rational>& a, const std::vector<Rational>& b) {
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };
  std::vector<std::vector<Rational>> basis;
  auto reduce = [&](std::vector<Rational> v) {
    for (const auto& b : basis) {
      Rational f = dot(v, b) / dot(b, b);
      for (std::size_t i = 0; i < p; ++i) v[i] -= f * b[i];
    }
    return v;
  };
  for (const auto& f : forms) basis.push_back(reduce(to_rational(f.embedded(p))));
  std::vector<LinearForm> out;
  for (std::size_t j = 0; j < p && basis.size() < p; ++j) {
    std::vector<Rational> e(p, Rational(0));
    e[j] = 1;
    auto v = reduce(std::move(e));
    bool zero = std::all_of(v.begin(), v.end(), [](const Rational& x) { return x == 0; });
    if (zero) continue;
    basis.push_back(v);
    out.push_back(primitive_form(v));
  }
  return out;
}

}  // namespace meroren
