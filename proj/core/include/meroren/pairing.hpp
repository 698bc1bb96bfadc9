#pragma once

// Analytic continuation of orthant pairings int |y|^mu phi and of
// (f + i0)^lambda pairings for catalog functions.

#include "meroren/catalog.hpp"
#include "meroren/germ.hpp"
#include "meroren/quadrature.hpp"
#include "meroren/testfn.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace meroren {

inline constexpr double kPoleGuard = 1e-6;

/// mu -> int_{orthant} prod |y_i|^{mu_i} phi(y) dy, continued in mu by
/// integration by parts. Orthant entries: +1, -1, or 0 (whole line, mu_i
/// must be 0 there).
class HyperPairing {
 public:
  HyperPairing(std::shared_ptr<const SmoothFunction> phi, std::vector<int> orthant, QuadratureConfig cfg = {});

  /// extra_shift adds to the minimal per-coordinate shift counts.
  Complex operator()(std::span<const Complex> mu, int extra_shift = 0) const;

  std::size_t dim() const { return orthant_.size(); }
  bool empty() const { return empty_; }
  /// Whether coordinate i reaches y_i = 0 (and can produce poles).
  bool singular(std::size_t i) const { return singular_[i]; }

  /// Minimal shifts for mu.
  std::vector<int> shifts(std::span<const Complex> mu) const;

 private:
  // Oblique breaklines in two dimensions: per outer node, its own inner rule.
  struct NestedGrid {
    std::vector<double> log_outer, w_outer;
    std::vector<std::size_t> row_start;  // size outer + 1
    std::vector<double> log_inner, w_inner, values;
    Complex contract(Complex e_outer, Complex e_inner) const;
  };
  struct Plan {
    bool nested = false;
    PowerGrid grid;
    NestedGrid nest;
    int level = 0;
    Complex contract(std::span<const Complex> e) const;
    double magnitude(std::span<const Complex> e) const;
  };
  std::vector<double> pieces(std::size_t axis, double lo, double hi, const std::vector<double>& extra) const;
  const Plan& plan(const std::vector<int>& k) const;
  Plan build(const std::vector<int>& k, int level) const;

  std::shared_ptr<const SmoothFunction> phi_;
  std::vector<int> orthant_;
  QuadratureConfig cfg_;
  std::vector<double> lo_, hi_;  // integration range in z = orthant * y
  std::vector<bool> singular_;
  std::vector<std::vector<double>> axis_breaks_;  // in z coordinates
  std::vector<Breakline> oblique_;                // in z coordinates
  bool empty_ = false;
  mutable std::mutex mutex_;
  mutable std::map<std::vector<int>, std::unique_ptr<Plan>> plans_;
};

/// One-shot convenience.
Complex hyper_pairing(std::span<const Complex> mu, std::shared_ptr<const SmoothFunction> phi,
                      std::vector<int> orthant, const QuadratureConfig& cfg = {}, int extra_shift = 0);

/// A catalog function applied to a block of the ambient variables.
struct FactorSpec {
  std::string entry;
  std::vector<std::size_t> block;
};

/// Pole hyperplanes {alpha . lambda = -m, m >= 1}.
struct LatticeForm {
  std::vector<long long> alpha;
  bool operator==(const LatticeForm&) const = default;
  auto operator<=>(const LatticeForm&) const = default;
};

/// lambda -> prod_j (f_j + i0)^{lambda_j} (phi).
class PowerPairing {
 public:
  PowerPairing(std::vector<FactorSpec> factors, std::shared_ptr<const SmoothFunction> phi,
               QuadratureConfig cfg = {});

  Complex operator()(std::span<const Complex> lambda) const;

  std::size_t nlambda() const { return factors_.size(); }
  /// Distinct lattice forms of coordinates that meet the support.
  std::vector<LatticeForm> lattice() const;
  /// Pole forms through the center (in shifted variables) with orders.
  PoleSet poles_at(std::span<const long long> center) const;
  /// 1/4 of the L1-adapted distance from center to the nearest pole
  /// hyperplane not through it (capped at 1/4).
  double default_radius(std::span<const long long> center) const;

 private:
  struct Term {
    std::vector<std::vector<long long>> mu_rows;  // per chart coordinate: alpha over lambda
    std::vector<bool> negative;                  // per factor: epsilon < 0
    std::unique_ptr<HyperPairing> hyper;
  };

  std::vector<FactorSpec> factors_;
  std::vector<Term> terms_;
};

Complex power_pairing(const std::vector<FactorSpec>& factors, std::span<const Complex> lambda,
                      std::shared_ptr<const SmoothFunction> phi, const QuadratureConfig& cfg = {});

}  // namespace meroren
