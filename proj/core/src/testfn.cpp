#include "meroren/testfn.hpp"

#include "meroren/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace meroren {

namespace {

double horner(const std::vector<double>& c, double t) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + *it;
  return acc;
}

std::vector<double> poly_derivative(const std::vector<double>& c) {
  if (c.size() <= 1) return {0.0};
  std::vector<double> d(c.size() - 1);
  for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = c[k] * static_cast<double>(k);
  return d;
}

void add_scaled(std::vector<double>& acc, const std::vector<double>& p, double s, std::size_t shift) {
  if (acc.size() < p.size() + shift) acc.resize(p.size() + shift, 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) acc[k + shift] += s * p[k];
}

std::vector<std::vector<double>> build_numerators() {
  // N_{j+1} = N_j' q^2 + 4 j t N_j q - 2 t N_j, q = 1 - t^2.
  std::vector<std::vector<double>> N{{1.0}};
  for (int j = 0; j < kMaxDerivativeOrder; ++j) {
    const auto& n = N.back();
    auto dn = poly_derivative(n);
    std::vector<double> next;
    // q^2 = 1 - 2t^2 + t^4
    add_scaled(next, dn, 1.0, 0);
    add_scaled(next, dn, -2.0, 2);
    add_scaled(next, dn, 1.0, 4);
    // 4 j t q N = 4j (t - t^3) N
    add_scaled(next, n, 4.0 * j, 1);
    add_scaled(next, n, -4.0 * j, 3);
    add_scaled(next, n, -2.0, 1);
    N.push_back(std::move(next));
  }
  return N;
}

const std::vector<std::vector<double>>& numerators() {
  static const auto N = build_numerators();
  return N;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void check_order(int order) {
  if (order < 0 || order > kMaxDerivativeOrder)
    throw Error("derivative order " + std::to_string(order) + " exceeds the depth cap of " +
                std::to_string(kMaxDerivativeOrder));
}

}  // namespace

const std::vector<double>& bump_numerator(int order) {
  check_order(order);
  return numerators()[static_cast<std::size_t>(order)];
}

double bump_derivative(double t, int order) {
  check_order(order);
  if (!(t > -1.0 && t < 1.0)) return 0.0;
  double q = (1.0 - t) * (1.0 + t);
  double b = std::exp(1.0 - 1.0 / q);
  if (b == 0.0) return 0.0;
  if (order == 0) return b;
  // Divide by q^{2j} incrementally to keep the intermediate finite.
  double v = horner(numerators()[static_cast<std::size_t>(order)], t) * b;
  for (int k = 0; k < 2 * order; ++k) v /= q;
  return v;
}

double BumpFactor::derivative(double x, int order) const {
  check_order(order);
  double t = (x - center) / half_width;
  if (!(t > -1.0 && t < 1.0)) return 0.0;
  double q = (1.0 - t) * (1.0 + t);
  double b = std::exp(1.0 - 1.0 / q);
  if (b == 0.0) return 0.0;
  // d^n [P(x) B(t(x))] = sum_j C(n,j) P^{(n-j)}(x) B^{(j)}(t) / w^j
  const int deg = static_cast<int>(poly.size()) - 1;
  double sum = 0.0;
  double winv = 1.0 / half_width;
  double qinv2 = 1.0 / (q * q);
  double scale = 1.0;  // (qinv2 / w)^j
  for (int j = 0; j <= order; ++j, scale *= qinv2 * winv) {
    int m = order - j;  // derivative order on P
    if (m > deg) continue;
    double pd = 0.0;
    for (int i = deg; i >= m; --i) {
      double c = poly[static_cast<std::size_t>(i)];
      for (int r = 0; r < m; ++r) c *= i - r;
      pd = pd * x + c;
    }
    if (pd == 0.0) continue;
    double nj = j == 0 ? 1.0 : horner(numerators()[static_cast<std::size_t>(j)], t);
    sum += binomial(order, j) * pd * nj * scale;
  }
  return sum * b;
}

TestFunction::TestFunction(std::vector<BumpFactor> factors) : factors_(std::move(factors)) {
  for (const auto& f : factors_)
    if (!(f.half_width > 0.0)) throw Error("bump half-width must be positive");
}

TestFunction TestFunction::bump(std::vector<double> centers, std::vector<double> half_widths) {
  if (centers.size() != half_widths.size()) throw Error("bump: center/width size mismatch");
  std::vector<BumpFactor> f;
  for (std::size_t i = 0; i < centers.size(); ++i) f.push_back({{1.0}, centers[i], half_widths[i]});
  return TestFunction(std::move(f));
}

double TestFunction::derivative(std::span<const double> x, std::span<const int> d) const {
  if (x.size() != factors_.size() || d.size() != factors_.size())
    throw Error("test function dimension mismatch");
  int total = 0;
  for (int k : d) total += k;
  check_order(total);
  double v = 1.0;
  for (std::size_t i = 0; i < factors_.size() && v != 0.0; ++i) v *= factors_[i].derivative(x[i], d[i]);
  return v;
}

Box TestFunction::support() const {
  Box b;
  for (const auto& f : factors_) {
    b.lo.push_back(f.center - f.half_width);
    b.hi.push_back(f.center + f.half_width);
  }
  return b;
}

TestFunction TestFunction::scaled(double s) const {
  auto f = factors_;
  if (!f.empty())
    for (auto& c : f[0].poly) c *= s;
  return TestFunction(std::move(f));
}

AffinePullback::AffinePullback(std::shared_ptr<const SmoothFunction> f, std::vector<std::vector<double>> A,
                               std::vector<double> b, double scale)
    : f_(std::move(f)), A_(std::move(A)), b_(std::move(b)), scale_(scale) {
  if (A_.size() != f_->dim() || b_.size() != f_->dim()) throw Error("pullback dimension mismatch");
  for (const auto& row : A_)
    if (row.size() != A_.size()) throw Error("pullback matrix must be square");
}

const AffinePullback::Stencil& AffinePullback::stencil(std::span<const int> d) const {
  std::vector<int> key(d.begin(), d.end());
  std::lock_guard lock(mutex_);
  auto it = stencils_.find(key);
  if (it != stencils_.end()) return it->second;
  // prod_i (sum_k A_{ki} d_{x_k})^{d_i}, expanded into x multi-indices.
  std::size_t n = A_.size();
  std::map<std::vector<int>, double> acc{{std::vector<int>(n, 0), 1.0}};
  for (std::size_t i = 0; i < n; ++i) {
    for (int rep = 0; rep < key[i]; ++rep) {
      std::map<std::vector<int>, double> next;
      for (const auto& [m, c] : acc)
        for (std::size_t k = 0; k < n; ++k) {
          if (A_[k][i] == 0.0) continue;
          auto m2 = m;
          ++m2[k];
          next[m2] += c * A_[k][i];
        }
      acc = std::move(next);
    }
  }
  Stencil s(acc.begin(), acc.end());
  return stencils_.emplace(std::move(key), std::move(s)).first->second;
}

double AffinePullback::derivative(std::span<const double> y, std::span<const int> d) const {
  std::size_t n = A_.size();
  std::array<double, 16> small;
  std::vector<double> big;
  std::span<double> x = n <= small.size() ? std::span<double>(small.data(), n) : (big.resize(n), std::span<double>(big));
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = b_[k];
    for (std::size_t i = 0; i < n; ++i) x[k] += A_[k][i] * y[i];
  }
  double v = 0.0;
  for (const auto& [m, c] : stencil(d)) v += c * f_->derivative(x, m);
  return scale_ * v;
}

Box AffinePullback::support() const {
  // Bounding box of the preimage of the support box corners.
  std::size_t n = A_.size();
  std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> a = A_;
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (a[piv][c] == 0.0) throw Error("pullback matrix is singular");
    std::swap(a[c], a[piv]);
    std::swap(inv[c], inv[piv]);
    double p = a[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] /= p;
      inv[c][j] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0.0) continue;
      double f = a[r][c];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  Box sb = f_->support();
  Box out{std::vector<double>(n, std::numeric_limits<double>::infinity()),
          std::vector<double>(n, -std::numeric_limits<double>::infinity())};
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = ((mask >> k) & 1 ? sb.hi[k] : sb.lo[k]) - b_[k];
    for (std::size_t i = 0; i < n; ++i) {
      double y = 0.0;
      for (std::size_t k = 0; k < n; ++k) y += inv[i][k] * x[k];
      out.lo[i] = std::min(out.lo[i], y);
      out.hi[i] = std::max(out.hi[i], y);
    }
  }
  return out;
}

LinearCombination::LinearCombination(
    std::vector<std::pair<double, std::shared_ptr<const SmoothFunction>>> terms)
    : terms_(std::move(terms)) {
  if (terms_.empty()) throw Error("empty linear combination");
  for (const auto& t : terms_)
    if (t.second->dim() != terms_[0].second->dim()) throw Error("linear combination dimension mismatch");
}

std::size_t LinearCombination::dim() const { return terms_[0].second->dim(); }

double LinearCombination::derivative(std::span<const double> x, std::span<const int> d) const {
  double v = 0.0;
  for (const auto& [c, f] : terms_) v += c * f->derivative(x, d);
  return v;
}

Box LinearCombination::support() const {
  Box b = terms_[0].second->support();
  for (const auto& t : terms_) {
    Box o = t.second->support();
    for (std::size_t i = 0; i < b.lo.size(); ++i) {
      b.lo[i] = std::min(b.lo[i], o.lo[i]);
      b.hi[i] = std::max(b.hi[i], o.hi[i]);
    }
  }
  return b;
}

TensorProduct::TensorProduct(std::shared_ptr<const SmoothFunction> f, std::shared_ptr<const SmoothFunction> g)
    : f_(std::move(f)), g_(std::move(g)) {}

double TensorProduct::derivative(std::span<const double> x, std::span<const int> d) const {
  std::size_t n = f_->dim();
  double a = f_->derivative(x.subspan(0, n), d.subspan(0, n));
  if (a == 0.0) return 0.0;
  return a * g_->derivative(x.subspan(n), d.subspan(n));
}

Box TensorProduct::support() const {
  Box a = f_->support();
  Box b = g_->support();
  a.lo.insert(a.lo.end(), b.lo.begin(), b.lo.end());
  a.hi.insert(a.hi.end(), b.hi.begin(), b.hi.end());
  return a;
}

}  // namespace meroren

namespace meroren {

std::vector<Breakline> TestFunction::breaklines() const {
  std::vector<Breakline> out;
  const std::size_t n = factors_.size();
  for (std::size_t i = 0; i < n; ++i)
    for (double edge : {factors_[i].center - factors_[i].half_width, factors_[i].center + factors_[i].half_width}) {
      Breakline b{std::vector<double>(n, 0.0), edge};
      b.normal[i] = 1.0;
      out.push_back(std::move(b));
    }
  return out;
}

std::vector<Breakline> AffinePullback::breaklines() const {
  // a . (A y + b) = c  <=>  (A^T a) . y = c - a . b
  std::vector<Breakline> out;
  const std::size_t n = A_.size();
  for (const auto& l : f_->breaklines()) {
    Breakline b{std::vector<double>(n, 0.0), l.offset};
    for (std::size_t k = 0; k < n; ++k) {
      b.offset -= l.normal[k] * b_[k];
      for (std::size_t i = 0; i < n; ++i) b.normal[i] += A_[k][i] * l.normal[k];
    }
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<Breakline> LinearCombination::breaklines() const {
  std::vector<Breakline> out;
  for (const auto& t : terms_) {
    auto b = t.second->breaklines();
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

std::vector<Breakline> TensorProduct::breaklines() const {
  std::vector<Breakline> out;
  const std::size_t n = f_->dim(), m = g_->dim();
  for (const auto& l : f_->breaklines()) {
    Breakline b{l.normal, l.offset};
    b.normal.resize(n + m, 0.0);
    out.push_back(std::move(b));
  }
  for (const auto& l : g_->breaklines()) {
    Breakline b{std::vector<double>(n, 0.0), l.offset};
    b.normal.insert(b.normal.end(), l.normal.begin(), l.normal.end());
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace meroren
