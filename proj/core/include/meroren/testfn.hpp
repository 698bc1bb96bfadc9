#pragma once

// Smooth compactly supported test functions with exact derivative
// recurrences, and affine pullbacks of them.

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace meroren {

inline constexpr int kMaxDerivativeOrder = 40;

/// Axis-aligned box [lo_i, hi_i].
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// The hyperplane normal . x = offset.
struct Breakline {
  std::vector<double> normal;
  double offset = 0.0;
};

/// A smooth function on R^n that can report mixed partial derivatives.
class SmoothFunction {
 public:
  virtual ~SmoothFunction() = default;
  virtual std::size_t dim() const = 0;
  /// d^{|d|} f / dx^d at x.
  virtual double derivative(std::span<const double> x, std::span<const int> d) const = 0;
  /// A box containing the support.
  virtual Box support() const = 0;
  /// Hyperplanes off which the function is real-analytic (support edges
  /// included). Quadrature splits there.
  virtual std::vector<Breakline> breaklines() const = 0;

  double operator()(std::span<const double> x) const {
    std::vector<int> zero(dim(), 0);
    return derivative(x, zero);
  }
};

/// The bump B(t) = exp(1 - 1/(1 - t^2)) on (-1, 1) and its derivatives,
/// written as N_j(t) / (1 - t^2)^{2j} * B(t).
double bump_derivative(double t, int order);

/// N_j coefficients, lowest degree first.
const std::vector<double>& bump_numerator(int order);

/// P(x) * B((x - center) / half_width).
struct BumpFactor {
  std::vector<double> poly{1.0};  // coefficients of P, lowest degree first
  double center = 0.0;
  double half_width = 1.0;

  double derivative(double x, int order) const;
};

/// Product of per-coordinate bump factors.
class TestFunction final : public SmoothFunction {
 public:
  TestFunction() = default;
  explicit TestFunction(std::vector<BumpFactor> factors);

  /// Symmetric bump of the given half-width in each coordinate.
  static TestFunction bump(std::vector<double> centers, std::vector<double> half_widths);

  std::size_t dim() const override { return factors_.size(); }
  double derivative(std::span<const double> x, std::span<const int> d) const override;
  Box support() const override;
  std::vector<Breakline> breaklines() const override;

  const std::vector<BumpFactor>& factors() const { return factors_; }
  TestFunction scaled(double s) const;

 private:
  std::vector<BumpFactor> factors_;
};

/// g(y) = scale * f(A y + b) for a square matrix A.
class AffinePullback final : public SmoothFunction {
 public:
  AffinePullback(std::shared_ptr<const SmoothFunction> f, std::vector<std::vector<double>> A,
                 std::vector<double> b, double scale);

  std::size_t dim() const override { return A_.empty() ? 0 : A_[0].size(); }
  double derivative(std::span<const double> y, std::span<const int> d) const override;
  Box support() const override;
  std::vector<Breakline> breaklines() const override;

 private:
  using Stencil = std::vector<std::pair<std::vector<int>, double>>;
  const Stencil& stencil(std::span<const int> d) const;

  std::shared_ptr<const SmoothFunction> f_;
  std::vector<std::vector<double>> A_;
  std::vector<double> b_;
  double scale_;
  mutable std::mutex mutex_;
  mutable std::map<std::vector<int>, Stencil> stencils_;
};

/// Linear combination sum_k c_k f_k of functions on the same space.
class LinearCombination final : public SmoothFunction {
 public:
  explicit LinearCombination(std::vector<std::pair<double, std::shared_ptr<const SmoothFunction>>> terms);
  std::size_t dim() const override;
  double derivative(std::span<const double> x, std::span<const int> d) const override;
  Box support() const override;
  std::vector<Breakline> breaklines() const override;

 private:
  std::vector<std::pair<double, std::shared_ptr<const SmoothFunction>>> terms_;
};

/// f(x) g(y) on R^{n+m}.
class TensorProduct final : public SmoothFunction {
 public:
  TensorProduct(std::shared_ptr<const SmoothFunction> f, std::shared_ptr<const SmoothFunction> g);
  std::size_t dim() const override { return f_->dim() + g_->dim(); }
  double derivative(std::span<const double> x, std::span<const int> d) const override;
  Box support() const override;
  std::vector<Breakline> breaklines() const override;

 private:
  std::shared_ptr<const SmoothFunction> f_;
  std::shared_ptr<const SmoothFunction> g_;
};

}  // namespace meroren
