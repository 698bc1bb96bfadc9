#pragma once

// Flat toy QFT: Synge function, model propagator G = U/(Gamma+i0) +
// V log(Gamma+i0) + W, regularized amplitudes prod G_lambda^{n_ij}, their
// renormalization, and the locality / covariance checks.
//
// Spacetimes: d = 1 is R with Gamma = (x - y)^2; d = 2 is 1+1 Minkowski with
// Gamma = (x0 - y0)^2 - (x1 - y1)^2 = (u_x - u_y)(v_x - v_y), u = x0 - x1,
// v = x0 + x1.

#include "meroren/microlocal.hpp"
#include "meroren/renorm.hpp"

#include <nlohmann/json_fwd.hpp>

#include <map>
#include <optional>

namespace meroren {

using Matrix = std::vector<std::vector<double>>;

struct Spacetime {
  int d = 1;
  std::size_t dim() const { return static_cast<std::size_t>(d); }
  /// The causal structure: R^{1+0} for d = 1, R^{1+1} for d = 2.
  CausalSite site() const { return {static_cast<std::size_t>(d - 1)}; }
  void validate() const;
};

struct SyngeValue {
  double value = 0.0;
  std::vector<double> dx, dy;  // covectors d_x Gamma, d_y Gamma
};
SyngeValue synge(const Spacetime& s, std::span<const double> x, std::span<const double> y);

struct SyngeExact {
  Rational value;
  QVec dx, dy;
};
SyngeExact synge(const Spacetime& s, const QVec& x, const QVec& y);
/// g^{mu nu} d_mu Gamma d_nu Gamma - 4 Gamma (zero identically).
Rational synge_identity_defect(const Spacetime& s, const QVec& x, const QVec& y);

struct PropagatorModel {
  double U = 1.0, V = 0.0, W = 0.0;
  /// G_lambda(Gamma)^n = (G (Gamma + i0)^lambda)^n; Gamma != 0.
  Complex power(double gamma, Complex lambda, int n) const;
};

struct AmplitudeSpec {
  std::size_t n = 2;
  std::map<std::pair<std::size_t, std::size_t>, int> edges;  // (i < j) -> n_ij > 0

  /// Edges with n_ij > 0 in lexicographic order; one lambda per edge.
  std::vector<std::pair<std::size_t, std::size_t>> edge_list() const;
  int multiplicity(std::size_t i, std::size_t j) const;
  void validate() const;
  static AmplitudeSpec two_point(int n12);
};

/// phi(x) = chi(L x + c), chi a product of one-dimensional bump factors.
struct VertexFunction {
  TestFunction chi;
  Matrix L;
  std::vector<double> c;

  static VertexFunction cartesian(std::vector<BumpFactor> factors);
  /// Factors in (u, v) = (x0 - x1, x0 + x1) (d = 2 only).
  static VertexFunction light_cone(std::vector<BumpFactor> factors);

  std::size_t dim() const { return chi.dim(); }
  double operator()(std::span<const double> x) const;
  std::shared_ptr<const SmoothFunction> function() const;
  /// Factors in the coordinates y = F x when L F^{-1} is diagonal.
  std::optional<std::vector<BumpFactor>> separable_in(const Matrix& F) const;
  /// Bounding box of the support in x.
  Box support() const;
};

/// x -> Lambda x + a, preserving Gamma.
struct Isometry {
  Matrix Lambda;
  std::vector<double> a;

  static Isometry identity(std::size_t dim);
  static Isometry translation(std::vector<double> a);
  /// d = 2 boost with the given rapidity.
  static Isometry boost(double rapidity);
  /// x -> -x (d = 1) or x1 -> -x1 (d = 2).
  static Isometry reflection(std::size_t dim);
};

/// phi o g^{-1}, the push-forward of phi by g.
VertexFunction push_forward(const VertexFunction& phi, const Isometry& g);

enum class Route { Auto, Chart, Integrable, OffCone };
std::string to_string(Route r);
Route route_from_string(const std::string& s);

struct AmplitudeOptions {
  Route route = Route::Auto;
  QuadratureConfig cfg;
  std::size_t node_budget = 2'000'000;      // nested quadrature nodes
  std::size_t germ_node_budget = 200'000;   // per cache used for germ extraction
  std::size_t mc_samples = 200'000;
  std::uint64_t seed = 1;
  std::size_t factorization_samples = 4000;  // Monte Carlo outer samples (d = 2)
  bool independent_samples = true;           // false: both routes share the outer samples
};

struct AmplitudeValue {
  Complex value;
  double error = 0.0;  // quadrature estimate, or standard error for Monte Carlo
  bool monte_carlo = false;
  Route route = Route::Auto;
};

/// Whether every edge's Gamma stays away from 0 on the product of supports.
bool off_cone(const Spacetime& s, const AmplitudeSpec& spec, const std::vector<VertexFunction>& phi);
bool in_integrable_region(const AmplitudeSpec& spec, std::span<const Complex> lambda);

/// prod_{edges} G_{lambda_e}^{n_e}(x_i, x_j) paired with prod_i phi_i(x_i).
/// Throws ValidityError("outside validity region") if no route applies.
AmplitudeValue regularized_amplitude(const Spacetime& s, const PropagatorModel& model, const AmplitudeSpec& spec,
                                     std::span<const Complex> lambda, const std::vector<VertexFunction>& phi,
                                     const AmplitudeOptions& opt = {});

/// The lambda-germ at 0 with the given declared poles (empty: holomorphic).
/// For n = 2 the poles default to those of the chart lattice.
NumericGerm amplitude_germ(const Spacetime& s, const PropagatorModel& model, const AmplitudeSpec& spec,
                           const std::vector<VertexFunction>& phi, std::optional<PoleSet> declared,
                           const AmplitudeOptions& opt = {});

/// R_pi at lambda = 0.
RenormResult renormalize_amplitude(const Spacetime& s, const PropagatorModel& model, const AmplitudeSpec& spec,
                                   const std::vector<VertexFunction>& phi, const AmplitudeOptions& opt = {});

/// R(full)(Phi) against [R(t_I) (x) R(t_{I^c})](cross propagators * Phi).
/// d = 1: nested quadrature, relative difference <= tol.
/// d = 2: Monte Carlo on both sides with independent seeds,
/// |difference| <= 3 * sqrt(se_l^2 + se_r^2); with shared samples the
/// relative difference is held to tol instead.
CheckReport check_qft_factorization(const Spacetime& s, const PropagatorModel& model, const AmplitudeSpec& spec,
                                    const std::vector<std::size_t>& I, const std::vector<VertexFunction>& phi,
                                    const AmplitudeOptions& opt = {}, double tol = 1e-4);

/// R(t)(phi) against R(t)(phi o g^{-1}); relative difference <= tol.
CheckReport check_covariance(const Spacetime& s, const PropagatorModel& model, const AmplitudeSpec& spec,
                             const std::vector<VertexFunction>& phi, const Isometry& g,
                             const AmplitudeOptions& opt = {}, double tol = 1e-8);

struct FeynmanReport {
  bool pass = false;
  std::size_t cases = 0;
  std::size_t failures = 0;           // admissible elements rejected
  std::size_t reversed_accepted = 0;  // a < 0 elements wrongly accepted
  std::string detail;
};
/// (x, y; xi, eta) lies in the Feynman relation of the flat site.
bool is_feynman_element(const Spacetime& s, const QVec& x, const QVec& y, const QVec& xi, const QVec& eta);
/// Samples Lambda_2 = {(x, y; a d_x Gamma, a d_y Gamma): Gamma = 0, a > 0} u N*(d_2)
/// at rational points; checks the relation and the polarization predicates.
FeynmanReport feynman_relation_check(const Spacetime& s, const PropagatorModel& model, std::size_t samples = 1000,
                                     std::uint64_t seed = 1);

struct RegionCover {
  std::size_t n = 0;
  std::vector<std::vector<std::size_t>> subsets;  // proper nonempty I
  /// x_i != x_j for all i in I, j not in I.
  bool contains(const std::vector<std::size_t>& I, const std::vector<std::vector<double>>& config) const;
  bool covered(const std::vector<std::vector<double>>& config) const;
};
RegionCover cover_regions(std::size_t n);

nlohmann::json to_json(const AmplitudeValue& v);
AmplitudeSpec amplitude_spec_from_json(const nlohmann::json& j);
VertexFunction vertex_function_from_json(const nlohmann::json& j, const Spacetime& s);

// Building blocks shared with the checks.

/// int_0^inf r^{nu0 + eps} h(r) dr as a Laurent series in eps (coefficients
/// for eps^-1 .. eps^order), h(r) = f(x - sign r) for a bump factor f.
std::vector<Complex> halfline_laurent(const BumpFactor& f, double x, int sign, int nu0, int order);

/// c(z) = int f(z + t) g(t) dt for one-dimensional bump factors.
class Correlation1D final : public SmoothFunction {
 public:
  Correlation1D(BumpFactor f, BumpFactor g);
  std::size_t dim() const override { return 1; }
  double derivative(std::span<const double> x, std::span<const int> d) const override;
  Box support() const override;
  std::vector<Breakline> breaklines() const override;

 private:
  BumpFactor f_, g_;
};

}  // namespace meroren
