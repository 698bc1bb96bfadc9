#pragma once

// Double-exponential (tanh-sinh) quadrature with endpoint distances kept
// to full relative accuracy, plus tensor grids of such rules.

#include "meroren/errors.hpp"
#include "meroren/field.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <type_traits>
#include <vector>

namespace meroren {

struct QuadratureConfig {
  double tolerance = 1e-10;
  int max_level = 9;       // tanh-sinh step 2^-level
  int nodes = 64;          // initial contour node count (power of two)
  int max_nodes = 1024;    // cap for one-variable contours
  std::optional<double> contour_radius;
  int extra_order = 2;     // holomorphic Taylor degree kept beyond the pole degree

  void validate() const;
};

struct QuadNode {
  double x;
  double from_lo;  // x - lo, accurate near lo
  double from_hi;  // hi - x, accurate near hi
  double weight;
};

inline constexpr double kTanhSinhTmax = 4.0;

/// Nodes t = j 2^-level, |t| <= tmax, mapped to [lo, hi]. The rule at
/// level L is the even-indexed subset of the rule at level L + 1.
std::vector<QuadNode> tanh_sinh_nodes(double lo, double hi, int level, double tmax = kTanhSinhTmax);

template <class T>
struct QuadResult {
  T value{};
  double error = 0.0;
  int level = 0;
};

/// Integrates f(const QuadNode&) over [lo, hi], doubling the level until two
/// successive estimates agree within tol * max(1, |value|).
template <class F>
auto integrate(F&& f, double lo, double hi, double tol, int max_level = 12)
    -> QuadResult<std::decay_t<decltype(f(std::declval<const QuadNode&>()))>> {
  using T = std::decay_t<decltype(f(std::declval<const QuadNode&>()))>;
  QuadResult<T> r;
  if (!(hi > lo)) return r;
  T prev{};
  for (int level = 2; level <= max_level; ++level) {
    T sum{};
    for (const auto& n : tanh_sinh_nodes(lo, hi, level)) sum += n.weight * f(n);
    if (level > 2) {
      double diff = std::abs(sum - prev);
      if (diff <= tol * std::max(1.0, std::abs(sum))) {
        r.value = sum;
        r.error = diff;
        r.level = level;
        return r;
      }
    }
    prev = sum;
  }
  throw QuadratureError("tanh-sinh quadrature did not converge on [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
}

/// Tensor-product tanh-sinh over a box; f receives the point.
double integrate_box(const std::function<double(std::span<const double>)>& f,
                     std::span<const double> lo, std::span<const double> hi, double tol,
                     int max_level = 7, double* error = nullptr);

/// A tensor grid sum_{i} prod_a w_{a,i_a} z_{a,i_a}^{e_a} V[i] with complex
/// exponents e; z is the distance of the node from the singular endpoint.
struct PowerGrid {
  std::vector<std::vector<double>> log_z;
  std::vector<std::vector<double>> weight;
  std::vector<Complex> values;  // row-major over the axes

  std::size_t axis_size(std::size_t a) const { return weight[a].size(); }
  std::size_t size() const;
  Complex contract(std::span<const Complex> exponents) const;
};

}  // namespace meroren
