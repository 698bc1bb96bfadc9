#include "meroren/quadrature.hpp"

#include <numbers>

namespace meroren {

void QuadratureConfig::validate() const {
  if (!(tolerance > 0.0)) throw Error("tolerance must be positive");
  auto pow2 = [](int n) { return n > 0 && (n & (n - 1)) == 0; };
  if (!pow2(nodes)) throw Error("contour node count must be a power of two");
  if (!pow2(max_nodes) || max_nodes < nodes) throw Error("max node count must be a power of two >= nodes");
  if (max_level < 2 || max_level > 14) throw Error("max refinement level out of range");
  if (contour_radius && !(*contour_radius > 0.0)) throw Error("contour radius must be positive");
  if (extra_order < 0) throw Error("extra order must be non-negative");
}

std::vector<QuadNode> tanh_sinh_nodes(double lo, double hi, int level, double tmax) {
  const double h = std::ldexp(1.0, -level);
  const double L = hi - lo;
  const long long jmax = static_cast<long long>(std::floor(tmax / h));
  std::vector<QuadNode> nodes;
  nodes.reserve(static_cast<std::size_t>(2 * jmax + 1));
  for (long long j = -jmax; j <= jmax; ++j) {
    double t = static_cast<double>(j) * h;
    double u = std::numbers::pi / 2 * std::sinh(t);
    // x - lo = L / (1 + e^{-2u}), hi - x = L / (1 + e^{2u})
    double from_lo = L / (1.0 + std::exp(-2.0 * u));
    double from_hi = L / (1.0 + std::exp(2.0 * u));
    double ch = std::cosh(u);
    double w = h * L * std::numbers::pi / 4 * std::cosh(t) / (ch * ch);
    if (!(w > 0.0) || from_lo <= 0.0 || from_hi <= 0.0) continue;
    nodes.push_back({lo + from_lo, from_lo, from_hi, w});
  }
  return nodes;
}

double integrate_box(const std::function<double(std::span<const double>)>& f, std::span<const double> lo,
                     std::span<const double> hi, double tol, int max_level, double* error) {
  const std::size_t n = lo.size();
  for (std::size_t i = 0; i < n; ++i)
    if (!(hi[i] > lo[i])) return 0.0;
  double prev = 0.0;
  for (int level = 2; level <= max_level; ++level) {
    std::vector<std::vector<QuadNode>> axes;
    for (std::size_t i = 0; i < n; ++i) axes.push_back(tanh_sinh_nodes(lo[i], hi[i], level));
    std::vector<std::size_t> idx(n, 0);
    std::vector<double> x(n);
    double sum = 0.0;
    for (;;) {
      double w = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = axes[i][idx[i]].x;
        w *= axes[i][idx[i]].weight;
      }
      sum += w * f(x);
      std::size_t a = 0;
      while (a < n && ++idx[a] == axes[a].size()) idx[a++] = 0;
      if (a == n) break;
    }
    if (level > 2) {
      double diff = std::abs(sum - prev);
      if (diff <= tol * std::max(1.0, std::abs(sum))) {
        if (error) *error = diff;
        return sum;
      }
    }
    prev = sum;
  }
  throw QuadratureError("tensor tanh-sinh quadrature did not converge");
}

std::size_t PowerGrid::size() const {
  std::size_t s = 1;
  for (const auto& w : weight) s *= w.size();
  return s;
}

Complex PowerGrid::contract(std::span<const Complex> exponents) const {
  const std::size_t n = weight.size();
  if (exponents.size() != n) throw Error("power grid exponent count mismatch");
  // Contract the last axis first; data stays row-major.
  std::vector<Complex> cur(values);
  std::size_t outer = cur.size();
  for (std::size_t a = n; a-- > 0;) {
    const std::size_t m = weight[a].size();
    std::vector<Complex> f(m);
    for (std::size_t j = 0; j < m; ++j)
      f[j] = exponents[a] == Complex(0.0) ? Complex(weight[a][j])
                                          : weight[a][j] * std::exp(exponents[a] * log_z[a][j]);
    outer /= m;
    std::vector<Complex> next(outer);
    for (std::size_t o = 0; o < outer; ++o) {
      Complex acc = 0.0;
      const Complex* row = cur.data() + o * m;
      for (std::size_t j = 0; j < m; ++j) acc += row[j] * f[j];
      next[o] = acc;
    }
    cur = std::move(next);
  }
  return cur[0];
}

}  // namespace meroren
