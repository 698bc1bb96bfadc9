#pragma once

// Causal order, traces and polarization on flat Minkowski space, cone cells
// and the +^_i operation, Lambda_f membership.

#include "meroren/catalog.hpp"
#include "meroren/errors.hpp"
#include "meroren/field.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace meroren {

using QVec = std::vector<Rational>;

/// R^{1+d} with signature (+,-,...,-); gamma = {g(xi,xi) >= 0, xi^0 >= 0}.
struct CausalSite {
  std::size_t d = 1;
  std::size_t dim() const { return d + 1; }
};

Rational minkowski(const QVec& a, const QVec& b);
/// xi in gamma (strict: gamma minus the origin).
bool in_forward_cone(const QVec& xi, bool strict);
/// Floating version, boundary decided with a 1e-9 guard band (inclusive).
bool in_forward_cone(std::span<const double> xi, bool strict, double guard = 1e-9);

/// y - x in the closed forward cone.
bool causal_leq(const CausalSite& s, const QVec& x, const QVec& y);
/// x <= y and x != y.
bool causal_less(const CausalSite& s, const QVec& x, const QVec& y);

struct CotangentElement {
  QVec x;
  QVec xi;
};
using PolarizedConfig = std::vector<CotangentElement>;

/// Base points carrying a nonzero covector, with the summed covector there
/// (in first-appearance order).
std::vector<CotangentElement> trace(const PolarizedConfig& p);
/// Base points of a trace that no other trace point strictly follows.
std::vector<QVec> maximal_points(const CausalSite& s, const std::vector<CotangentElement>& tr);
bool is_reduced_polarized(const CausalSite& s, const std::vector<CotangentElement>& tr, bool strict);
inline bool is_polarized(const CausalSite& s, const PolarizedConfig& p, bool strict) {
  return is_reduced_polarized(s, trace(p), strict);
}

struct SumPolarizationReport {
  bool precondition = false;  // trace(u) polarized, trace(v) strictly, common base points
  std::string precondition_detail;
  bool nonzero_sum = false;
  bool maxA_eq_maxB_cap_maxC = false;
  bool sum_strictly_polarized = false;
  std::vector<QVec> maxA, maxB, maxC;
};
SumPolarizationReport check_sum_polarization(const CausalSite& s, const PolarizedConfig& u,
                                             const PolarizedConfig& v);

struct PolarizationSampler {
  std::size_t max_points = 6;
  int coord_range = 2;    // base point coordinates in [-r, r]
  int covector_range = 3;
  double zero_probability = 0.0;   // chance a single covector is 0
  double shared_probability = 0.3; // chance a base point repeats an earlier one

  /// Zero covectors switched on: B = pi Tr(u) and C = pi Tr(v) may differ.
  static PolarizationSampler degenerate() {
    PolarizationSampler s;
    s.zero_probability = 0.25;
    return s;
  }
};
/// Random (u, v) with u polarized and v strictly polarized; admissible
/// configurations only.
std::pair<PolarizedConfig, PolarizedConfig> random_admissible_pair(const CausalSite& s, std::mt19937_64& rng,
                                                                   const PolarizationSampler& opt = {});
/// Same base points, v polarized but not strictly (negative control).
std::pair<PolarizedConfig, PolarizedConfig> random_inadmissible_pair(const CausalSite& s, std::mt19937_64& rng,
                                                                     const PolarizationSampler& opt = {});

struct PolarizationBatch {
  std::size_t cases = 0;
  std::size_t nonzero_sum_failures = 0;
  std::size_t max_identity_failures = 0;
  std::size_t strict_sum_failures = 0;
  std::vector<std::pair<PolarizedConfig, PolarizedConfig>> counterexamples;  // first few
};
/// Parallel over cases; deterministic for a given seed.
PolarizationBatch run_polarization_batch(const CausalSite& s, std::size_t cases, std::uint64_t seed,
                                         bool admissible, const PolarizationSampler& opt = {});

nlohmann::json to_json(const PolarizedConfig& p);
PolarizedConfig polarized_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SumPolarizationReport& r);

// ---------------------------------------------------------------------------
// Cone cells

enum class BaseKind { Empty, Diagonal, LightCone, Origin, FullSpace, ZeroSet, Graph, TimeZero, Points };
enum class FiberRule { None, Conormal, GradientRays, PositiveTime, Generators };

/// A closed conic subset of T^*R^n minus the zero section.
struct ConeCell {
  std::size_t dim = 0;
  BaseKind base = BaseKind::Empty;
  FiberRule rule = FiberRule::None;
  std::string function;  // catalog entry for ZeroSet / GradientRays
  /// Points: per base point, a union of convex cones, each the positive span
  /// of its generators.
  struct Fiber {
    std::vector<double> x;
    std::vector<std::vector<std::vector<double>>> cones;
  };
  std::vector<Fiber> fibers;

  bool empty() const { return base == BaseKind::Empty; }
  bool contains(std::span<const double> x, std::span<const double> xi) const;

  static ConeCell empty_cell(std::size_t n);
  /// Conormal of {x_1 = x_2} in R^{2m}: (a, a; xi, -xi).
  static ConeCell diagonal(std::size_t m);
  /// Conormal of the origin: all nonzero covectors at 0.
  static ConeCell origin(std::size_t n);
  /// Conormal of {x_0^2 - |x'|^2 = 0}.
  static ConeCell light_cone(std::size_t n);
  /// Lambda_f of a catalog entry: limits of a_k df(x_k), a_k > 0, f(x_k) -> 0.
  static ConeCell gradient_rays(const std::string& entry);
  /// WF((t + i0)^lambda) on R_t x R^n: {t = 0, tau > 0, xi = 0}.
  static ConeCell plus_i0_time(std::size_t n);
  /// WF(delta(t - f(x))) on R_t x R^n: conormal of the graph of f.
  static ConeCell graph_conormal(const std::string& entry);
  static ConeCell points(std::size_t n, std::vector<Fiber> fibers);
};

/// c1 +^_i c2. Exact on the catalog: empty operand, fixed-base-point
/// generator cells with c1 and -c2 disjoint fiberwise (giving
/// (c1 + c2) u c1 u c2), and the (t + i0)^lambda / delta(t - f) pair, which is
/// returned restricted to tau = 0 in the x variables (= Lambda_f). Other
/// pairs throw CatalogError("unsupported pair") when exact is requested;
/// otherwise generator cells fall back to the closed sum of fibers.
ConeCell hat_plus(const ConeCell& c1, const ConeCell& c2, bool exact = true);

/// Whether fiberwise c1 and -c2 are disjoint at every common base point.
bool fiberwise_transverse(const ConeCell& c1, const ConeCell& c2);

/// Sampled closure oracle for (x; xi) in Lambda_f: sequences x_k -> x on a
/// geometric grid in random directions, a_k > 0 fitted to xi; accepts when
/// the direction of df(x_k) converges to xi and f(x_k) -> 0.
struct SequenceSearch {
  std::size_t directions = 4096;
  int depth = 30;           // x_k = x + 2^{-k} d, k up to depth
  double angle_tol = 2e-2;  // accepted misalignment at the finest scale
  std::uint64_t seed = 1;
};
bool sequence_search_member(const CatalogEntry& f, std::span<const double> x, std::span<const double> xi,
                            const SequenceSearch& opt = {});

/// Exact Lambda_f membership; xi = 0 is never a member.
bool lambda_membership(const CatalogEntry& f, std::span<const double> x, std::span<const double> xi);

/// Nonnegative least squares: min |G c - xi| over c >= 0; returns the residual
/// norm and writes c. Columns of G are the generators.
double nnls(const std::vector<std::vector<double>>& generators, std::span<const double> xi,
            std::vector<double>* coeffs = nullptr);

}  // namespace meroren
