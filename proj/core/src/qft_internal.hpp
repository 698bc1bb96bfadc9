#pragma once

#include "meroren/qft.hpp"

#include <array>

namespace meroren {

/// sum_i base_i exp(sum_e c_e logs_ie); Monte Carlo caches average instead.
struct NodeCache {
  std::size_t ne = 0;
  std::vector<Complex> base;
  std::vector<Complex> logs;
  bool mc = false;
  std::size_t samples = 0;

  Complex sum(std::span<const Complex> c, double* stderr_out = nullptr) const;
};

/// Precomputed quadrature for routes (b) / (c); cheap to evaluate at many
/// lambda.
struct AmplitudeCache {
  enum class Kind { Ordered1, LightCone, MonteCarlo } kind = Kind::Ordered1;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<int> mult;
  std::vector<NodeCache> parts;
  std::vector<std::vector<std::size_t>> orders;  // light cone: u orderings, then v orderings
  std::size_t split = 0;  // light cone: number of u parts
  double prefactor = 1.0;

  Complex operator()(std::span<const Complex> lambda, double* stderr_out = nullptr) const;
};

/// n = 2 amplitude through the relative-coordinate correlation psi and the
/// chart pairing of Gamma. In d = 2 the vertex functions must be separable in
/// (u, v); then psi = Xi_u(u) Xi_v(v) / 2 and the pairing is a four-quadrant
/// sum of one-dimensional half-line pairings.
class ChartAmplitude {
 public:
  ChartAmplitude(const Spacetime& s, const PropagatorModel& model, const AmplitudeSpec& spec,
                 const std::vector<VertexFunction>& phi, const QuadratureConfig& cfg);
  Complex operator()(Complex lambda) const;
  PoleSet poles_at_zero() const;
  double radius() const;

 private:
  struct Term {
    int k, j;
    double coef;
  };
  Complex base(Complex mu) const;
  Complex pairing(Complex mu, int j) const;

  PropagatorModel model_;
  int m_ = 1;
  double lattice_step_ = 1.0;
  std::unique_ptr<PowerPairing> pp_;                  // d = 1
  std::array<std::unique_ptr<HyperPairing>, 4> hp_;   // d = 2: u+, u-, v+, v-
  std::vector<Term> terms_;
};

namespace qft_detail {

Complex log_i0(double gamma);
Matrix identity(std::size_t n);
Matrix light_cone_frame();
Matrix multiply(const Matrix& a, const Matrix& b);
std::vector<double> apply(const Matrix& a, std::span<const double> x);
Matrix inverse(const Matrix& a);
double determinant(const Matrix& a);
/// g(y) = f(a y + b).
BumpFactor compose_affine(const BumpFactor& f, double a, double b);
std::pair<double, double> factor_range(const BumpFactor& f);
/// Bounding box of the support in the coordinates F x.
Box frame_box(const VertexFunction& phi, const Matrix& F);
/// x itself (d = 1) or (u, v) (d = 2).
Matrix coordinate_frame(const Spacetime& s);
std::optional<std::vector<std::vector<BumpFactor>>> axis_factors(const Spacetime& s,
                                                                 const std::vector<VertexFunction>& phi);
AmplitudeCache build_cache(const Spacetime& s, const PropagatorModel& model, const AmplitudeSpec& spec,
                           const std::vector<VertexFunction>& phi, std::size_t budget, std::size_t mc_samples,
                           std::uint64_t seed, int level_offset);

}  // namespace qft_detail
}  // namespace meroren
