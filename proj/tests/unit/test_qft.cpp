#include "meroren/qft.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <numbers>
#include <random>

using namespace meroren;

namespace {

constexpr double kPi = std::numbers::pi;

VertexFunction bump(double c, double w, std::vector<double> poly = {1.0}) {
  return VertexFunction::cartesian({{std::move(poly), c, w}});
}

VertexFunction lc(double cu, double wu, double cv, double wv, std::vector<double> pu = {1.0}) {
  return VertexFunction::light_cone({{std::move(pu), cu, wu}, {{1.0}, cv, wv}});
}

Complex chart(const Spacetime& s, const PropagatorModel& m, const AmplitudeSpec& spec, Complex l,
              const std::vector<VertexFunction>& phi) {
  AmplitudeOptions o;
  o.route = Route::Chart;
  Complex a[1] = {l};
  return regularized_amplitude(s, m, spec, a, phi, o).value;
}

Complex direct(const Spacetime& s, const PropagatorModel& m, const AmplitudeSpec& spec, Complex l,
               const std::vector<VertexFunction>& phi) {
  AmplitudeOptions o;
  o.route = Route::Integrable;
  Complex a[1] = {l};
  return regularized_amplitude(s, m, spec, a, phi, o).value;
}

double at(const SmoothFunction& f, double x, int d = 0) {
  double xs[1] = {x};
  int ds[1] = {d};
  return f.derivative(xs, ds);
}

}  // namespace

// ---------------------------------------------------------------------------

TEST(Synge, Examples) {
  Spacetime s{2};
  EXPECT_EQ(synge(s, QVec{0, 0}, QVec{3, 0}).value, 9);
  EXPECT_EQ(synge(s, QVec{0, 0}, QVec{1, 1}).value, 0);
  auto g = synge(s, std::vector<double>{0.5, 0.25}, std::vector<double>{0.0, 1.0});
  EXPECT_DOUBLE_EQ(g.value, 0.25 - 0.5625);
  EXPECT_DOUBLE_EQ(g.dx[0], 1.0);
  EXPECT_DOUBLE_EQ(g.dx[1], 1.5);
  EXPECT_DOUBLE_EQ(g.dy[0], -1.0);
  EXPECT_EQ(synge(Spacetime{1}, QVec{Rational(1, 2)}, QVec{2}).value, Rational(9, 4));
}

TEST(Synge, GradientIdentityExact) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> num(-50, 50), den(1, 9);
  for (int d : {1, 2})
    for (int c = 0; c < 100; ++c) {
      Spacetime s{d};
      QVec x(s.dim()), y(s.dim());
      for (auto& v : x) v = Rational(num(rng), den(rng));
      for (auto& v : y) v = Rational(num(rng), den(rng));
      EXPECT_EQ(synge_identity_defect(s, x, y), 0);
      auto g = synge(s, x, y);
      EXPECT_EQ(g.value, synge(s, y, x).value);
      EXPECT_EQ(synge(s, x, x).value, 0);
    }
}

TEST(Synge, LightConeFactorization) {
  Spacetime s{2};
  QVec x{Rational(1, 3), Rational(-2, 5)}, y{Rational(7, 4), Rational(1, 6)};
  Rational u = (x[0] - x[1]) - (y[0] - y[1]), v = (x[0] + x[1]) - (y[0] + y[1]);
  EXPECT_EQ(synge(s, x, y).value, u * v);
}

TEST(Propagator, BranchOfLog) {
  PropagatorModel m{1.0, 0.5, -0.25};
  Complex l(0.3, 0.2);
  double g = -0.7;
  Complex L(std::log(0.7), kPi);
  Complex G = std::exp(-L) + 0.5 * L - 0.25;
  EXPECT_NEAR(std::abs(m.power(g, l, 1) - G * std::exp(l * L)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(m.power(g, l, 3) - std::pow(G * std::exp(l * L), 3)), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(m.power(2.0, 0.0, 1) - 0.5 - 0.5 * std::log(2.0) + 0.25), 0.0, 1e-15);
  EXPECT_THROW(m.power(0.0, l, 1), PoleError);
}

TEST(Spec, Validation) {
  AmplitudeSpec s;
  s.n = 3;
  EXPECT_THROW(s.validate(), Error);
  s.edges[{0, 2}] = 1;
  s.edges[{0, 1}] = 2;
  s.edges[{1, 2}] = 0;
  EXPECT_NO_THROW(s.validate());
  auto e = s.edge_list();
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e[0], std::make_pair(std::size_t{0}, std::size_t{1}));
  EXPECT_EQ(s.multiplicity(2, 0), 1);
  s.edges[{1, 3}] = 1;
  EXPECT_THROW(s.validate(), Error);
}

TEST(Vertex, LightConeAndPushForward) {
  auto phi = lc(0.2, 0.7, -0.1, 0.9, {1.0, 0.5});
  std::vector<double> x{0.3, 0.1};
  double u = x[0] - x[1], v = x[0] + x[1];
  double expect = BumpFactor{{1.0, 0.5}, 0.2, 0.7}.derivative(u, 0) * BumpFactor{{1.0}, -0.1, 0.9}.derivative(v, 0);
  EXPECT_NEAR(phi(x), expect, 1e-15);

  auto g = Isometry::boost(0.4);
  auto moved = push_forward(phi, g);
  std::vector<double> gx{g.Lambda[0][0] * x[0] + g.Lambda[0][1] * x[1], g.Lambda[1][0] * x[0] + g.Lambda[1][1] * x[1]};
  EXPECT_NEAR(moved(gx), phi(x), 1e-14);
  // Boosts keep light-cone separability; rotations of frame do not.
  EXPECT_TRUE(moved.separable_in({{1.0, -1.0}, {1.0, 1.0}}).has_value());
  auto sep = moved.separable_in({{1.0, -1.0}, {1.0, 1.0}});
  double mu = gx[0] - gx[1], mv = gx[0] + gx[1];
  EXPECT_NEAR((*sep)[0].derivative(mu, 0) * (*sep)[1].derivative(mv, 0), phi(x), 1e-14);
  EXPECT_FALSE(bump(0.0, 1.0).separable_in({{2.0}}) == std::nullopt);

  auto t = push_forward(phi, Isometry::translation({1.0, 0.0}));
  EXPECT_NEAR(t(std::vector<double>{1.3, 0.1}), phi(x), 1e-15);
}

TEST(Correlation, MatchesDirectQuadrature) {
  BumpFactor f{{1.0, 0.4}, 0.3, 0.8}, g{{1.0, -0.2, 0.1}, -0.2, 0.6};
  Correlation1D c(f, g);
  for (double z : {-0.5, 0.1, 0.7, 1.2}) {
    double ref =
        integrate([&](const QuadNode& n) { return f.derivative(z + n.x, 0) * g.derivative(n.x, 0); }, -0.8, 0.4, 1e-14)
            .value;
    EXPECT_NEAR(at(c, z), ref, 1e-13) << z;
    double h = 1e-4;
    EXPECT_NEAR(at(c, z, 1), (at(c, z + h) - at(c, z - h)) / (2 * h), 1e-6) << z;
  }
  EXPECT_EQ(at(c, 2.0), 0.0);
}

TEST(Halfline, LaurentMatchesContinuedPairing) {
  BumpFactor f{{1.0, 0.3}, -1.3, 0.7};
  for (double x : {-1.5, -1.0, -0.65})
    for (int sg : {1, -1})
      for (int nu0 : {-3, -2, -1, 0}) {
        auto L = halfline_laurent(f, x, sg, nu0, 2);
        BumpFactor h;
        h.center = (f.center - x) * -sg;
        h.half_width = f.half_width;
        h.poly = {f.poly[0] + f.poly[1] * x, -sg * f.poly[1]};
        HyperPairing hp(std::make_shared<TestFunction>(std::vector<BumpFactor>{h}), {1});
        double scale = 1.0;
        for (auto c : L) scale = std::max(scale, std::abs(c));
        for (double e : {2e-3, -1e-3}) {
          Complex a[1] = {nu0 + e};
          Complex series = L[0] / e + L[1] + L[2] * e + L[3] * e * e;
          EXPECT_NEAR(std::abs(hp(a) - series), 0.0, 1e-6 * scale) << x << " " << sg << " " << nu0 << " " << e;
        }
      }
}

// ---------------------------------------------------------------------------
// Amplitudes

TEST(Amplitude, ChartMatchesDirectD1) {
  Spacetime s{1};
  PropagatorModel m;
  auto spec = AmplitudeSpec::two_point(1);
  std::vector<VertexFunction> phi{bump(0.1, 1.0, {1.0, 0.3}), bump(-0.2, 0.8)};
  for (double lam : {6.0, 3.0, 1.5}) {
    Complex a = chart(s, m, spec, Complex(lam, 0.2), phi), b = direct(s, m, spec, Complex(lam, 0.2), phi);
    EXPECT_NEAR(std::abs(a - b), 0.0, 1e-8 * std::max(1.0, std::abs(a))) << lam;
  }
}

TEST(Amplitude, FourQuadrantSumD2) {
  Spacetime s{2};
  PropagatorModel m;
  auto spec = AmplitudeSpec::two_point(1);
  std::vector<VertexFunction> phi{lc(0.1, 1.0, -0.1, 0.9, {1.0, 0.2}), lc(-0.2, 0.8, 0.3, 1.1)};
  Complex a = chart(s, m, spec, 3.0, phi), b = direct(s, m, spec, 3.0, phi);
  EXPECT_NEAR(std::abs(a - b), 0.0, 1e-9 * std::abs(a));
  // At lambda = 3 the integrand is the polynomial Gamma^2: no phases survive.
  EXPECT_NEAR(a.imag(), 0.0, 1e-10 * std::abs(a));
}

TEST(Amplitude, TwoRouteConsistencyRandom) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> c(-0.5, 0.5), w(0.5, 1.2), l(1.2, 4.0), im(-1.0, 1.0);
  int cases = 0;
  for (int k = 0; k < 50; ++k) {
    int d = k % 5 == 0 ? 2 : 1;
    Spacetime s{d};
    PropagatorModel m;
    int n12 = 1 + k % 2;
    auto spec = AmplitudeSpec::two_point(n12);
    std::vector<VertexFunction> phi;
    for (int v = 0; v < 2; ++v)
      phi.push_back(d == 1 ? bump(c(rng), w(rng), {1.0, c(rng)}) : lc(c(rng), w(rng), c(rng), w(rng)));
    Complex lam(l(rng), im(rng));
    Complex a = chart(s, m, spec, lam, phi), b = direct(s, m, spec, lam, phi);
    EXPECT_NEAR(std::abs(a - b), 0.0, 1e-6 * std::max(1.0, std::abs(a))) << k;
    ++cases;
  }
  EXPECT_EQ(cases, 50);
}

TEST(Amplitude, OffConeIsPlainIntegral) {
  Spacetime s{1};
  PropagatorModel m{1.0, 0.0, 0.3};
  AmplitudeSpec spec;
  spec.n = 3;
  spec.edges[{0, 1}] = 1;
  spec.edges[{1, 2}] = 2;
  std::vector<VertexFunction> phi{bump(-1.5, 0.4), bump(0.0, 0.5, {1.0, 0.4}), bump(1.5, 0.4)};
  ASSERT_TRUE(off_cone(s, spec, phi));
  Complex z[2] = {0.0, 0.0};
  auto v = regularized_amplitude(s, m, spec, z, phi);
  EXPECT_EQ(v.route, Route::OffCone);
  double lo[3] = {-1.9, -0.5, 1.1}, hi[3] = {-1.1, 0.5, 1.9};
  double ref = integrate_box(
      [&](std::span<const double> x) {
        double a = x[0] - x[1], b = x[1] - x[2];
        double g1 = 1.0 / (a * a) + 0.3, g2 = 1.0 / (b * b) + 0.3;
        return g1 * g2 * g2 * phi[0](x.subspan(0, 1)) * phi[1](x.subspan(1, 1)) * phi[2](x.subspan(2, 1));
      },
      lo, hi, 1e-12);
  EXPECT_NEAR(std::abs(v.value - ref), 0.0, 1e-7 * std::abs(ref));
}

TEST(Amplitude, OutsideValidityRegion) {
  Spacetime s{1};
  AmplitudeSpec spec;
  spec.n = 3;
  spec.edges[{0, 1}] = 1;
  spec.edges[{1, 2}] = 1;
  std::vector<VertexFunction> phi{bump(0.0, 1.0), bump(0.1, 1.0), bump(0.2, 1.0)};
  Complex z[2] = {0.0, 0.0};
  try {
    regularized_amplitude(s, PropagatorModel{}, spec, z, phi);
    FAIL();
  } catch (const ValidityError& e) {
    EXPECT_STREQ(e.what(), "outside validity region");
  }
  EXPECT_THROW(renormalize_amplitude(s, PropagatorModel{}, spec, phi), ValidityError);
  Complex big[2] = {2.0, 2.0};
  EXPECT_NO_THROW(regularized_amplitude(s, PropagatorModel{}, spec, big, phi));
}

TEST(Amplitude, MonteCarloReportsStandardError) {
  Spacetime s{2};
  PropagatorModel m{1.0, 0.2, 0.0};
  auto spec = AmplitudeSpec::two_point(1);
  std::vector<VertexFunction> phi{VertexFunction::cartesian({{{1.0}, 0.0, 0.5}, {{1.0}, 0.0, 0.5}}),
                                  VertexFunction::cartesian({{{1.0}, 2.5, 0.5}, {{1.0}, 0.0, 0.5}})};
  AmplitudeOptions o;
  o.mc_samples = 20000;
  Complex z[1] = {0.0};
  auto v = regularized_amplitude(s, m, spec, z, phi, o);
  EXPECT_TRUE(v.monte_carlo);
  EXPECT_GT(v.error, 0.0);
  // The integrand vanishes to all orders on the box boundary, so the midpoint
  // rule converges spectrally.
  const int N = 24;
  double ref = 0.0;
  std::vector<double> x(4);
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b)
      for (int c = 0; c < N; ++c)
        for (int e = 0; e < N; ++e) {
          x = {-0.5 + (a + 0.5) / N, -0.5 + (b + 0.5) / N, 2.0 + (c + 0.5) / N, -0.5 + (e + 0.5) / N};
          std::span<const double> sx(x);
          double g = synge(s, sx.subspan(0, 2), sx.subspan(2, 2)).value;
          ref += (1.0 / g + 0.2 * std::log(g)) * phi[0](sx.subspan(0, 2)) * phi[1](sx.subspan(2, 2));
        }
  ref /= double(N) * N * N * N;
  EXPECT_LT(std::abs(v.value - ref), 5 * v.error);
  auto j = to_json(v);
  EXPECT_TRUE(j.contains("stderr"));
  EXPECT_EQ(j["route"], "off-cone");
}

// ---------------------------------------------------------------------------
// Renormalization

TEST(RenormAmplitude, OffDiagonalIsPlainIntegral) {
  Spacetime s{1};
  PropagatorModel m;
  auto spec = AmplitudeSpec::two_point(2);
  std::vector<VertexFunction> phi{bump(-1.0, 0.5, {1.0, 0.3}), bump(0.8, 0.6)};
  auto r = renormalize_amplitude(s, m, spec, phi);
  double lo[2] = {-1.5, 0.2}, hi[2] = {-0.5, 1.4};
  double ref = integrate_box(
      [&](std::span<const double> x) {
        double g = (x[0] - x[1]) * (x[0] - x[1]);
        return phi[0](x.subspan(0, 1)) * phi[1](x.subspan(1, 1)) / (g * g);
      },
      lo, hi, 1e-13);
  EXPECT_NEAR(std::abs(r.value - ref), 0.0, 1e-6 * std::abs(ref));
}

TEST(RenormAmplitude, FinitePartOfInverseFourthPower) {
  // FP int |w|^-4 psi(w) dw with psi the correlation of the vertex functions.
  Spacetime s{1};
  PropagatorModel m;
  auto spec = AmplitudeSpec::two_point(2);
  BumpFactor f0{{1.0, 0.3}, 0.1, 0.9}, f1{{1.0}, -0.2, 0.7};
  std::vector<VertexFunction> phi{VertexFunction::cartesian({f0}), VertexFunction::cartesian({f1})};
  auto r = renormalize_amplitude(s, m, spec, phi);
  Correlation1D psi(f0, f1);
  auto even = [&](double x, int d) { return at(psi, x, d) + (d % 2 == 0 ? 1 : -1) * at(psi, -x, d); };
  double e0 = even(0, 0), e2 = even(0, 2), e4 = even(0, 4), e6 = even(0, 6);
  const double cut = 0.02;
  double inner =
      integrate([&](const QuadNode& n) { return e4 / 24 + e6 * n.x * n.x / 720; }, 0.0, cut, 1e-12).value +
      integrate(
          [&](const QuadNode& n) {
            double x = n.x;
            return (even(x, 0) - e0 - e2 * x * x / 2) / (x * x * x * x);
          },
          cut, 1.0, 1e-9)
          .value;
  double outer = integrate([&](const QuadNode& n) { return even(n.x, 0) / std::pow(n.x, 4); }, 1.0, 1.9, 1e-12).value;
  double fp = inner + outer + e0 * (-1.0 / 3.0) + e2 / 2 * (-1.0);
  EXPECT_NEAR(std::abs(r.value - fp), 0.0, 1e-6 * std::max(1.0, std::abs(fp))) << r.value << " " << fp;
  EXPECT_NEAR(r.value.imag(), 0.0, 1e-9);
}

TEST(RenormAmplitude, ZeroTestFunction) {
  Spacetime s{1};
  std::vector<VertexFunction> phi{bump(0.0, 1.0, {0.0}), bump(0.1, 1.0)};
  auto r = renormalize_amplitude(s, PropagatorModel{}, AmplitudeSpec::two_point(2), phi);
  EXPECT_EQ(std::abs(r.value), 0.0);
}

TEST(RenormAmplitude, LightConeDoublePole) {
  Spacetime s{2};
  std::vector<VertexFunction> phi{lc(0.1, 1.0, -0.1, 0.9, {1.0, 0.2}), lc(-0.2, 0.8, 0.3, 1.1)};
  auto g = amplitude_germ(s, PropagatorModel{}, AmplitudeSpec::two_point(1), phi, std::nullopt);
  ASSERT_EQ(g.germ.poles().size(), 1u);
  EXPECT_EQ(g.germ.poles().begin()->second, 2);
  auto d = project_pi(g.germ);
  double sing = 0.0;
  for (const auto& t : d.singular) sing = std::max(sing, t.numerator.max_abs());
  EXPECT_GT(sing, 1e-6);
}

TEST(RenormAmplitude, LogTermThroughDerivative) {
  // V log(Gamma + i0) in d = 1, off the diagonal: plain integral.
  Spacetime s{1};
  PropagatorModel m{0.5, 0.7, 0.2};
  auto spec = AmplitudeSpec::two_point(1);
  std::vector<VertexFunction> phi{bump(-1.0, 0.5), bump(0.9, 0.6, {1.0, 0.2})};
  auto r = renormalize_amplitude(s, m, spec, phi);
  double lo[2] = {-1.5, 0.3}, hi[2] = {-0.5, 1.5};
  double ref = integrate_box(
      [&](std::span<const double> x) {
        double g = (x[0] - x[1]) * (x[0] - x[1]);
        return (0.5 / g + 0.7 * std::log(g) + 0.2) * phi[0](x.subspan(0, 1)) * phi[1](x.subspan(1, 1));
      },
      lo, hi, 1e-13);
  EXPECT_NEAR(std::abs(r.value - ref), 0.0, 1e-6 * std::abs(ref));
}

TEST(Holomorphy, OffConeGermsHaveNoSingularPart) {
  Spacetime s1{1};
  AmplitudeSpec tri;
  tri.n = 3;
  tri.edges[{0, 1}] = 1;
  tri.edges[{1, 2}] = 2;
  tri.edges[{0, 2}] = 1;
  std::vector<VertexFunction> phi{bump(-1.5, 0.4, {1.0, 0.3}), bump(0.0, 0.5), bump(1.5, 0.4)};
  PoleSet decl;
  for (std::size_t i = 0; i < 3; ++i) decl[LinearForm::coordinate(3, i)] = 1;
  auto g = amplitude_germ(s1, PropagatorModel{}, tri, phi, decl);
  auto d = project_pi(g.germ);
  for (const auto& t : d.singular) EXPECT_LE(t.numerator.max_abs(), 1e-8 * g.scale);

  Spacetime s2{2};
  std::vector<VertexFunction> p2{lc(-1.5, 0.5, -1.5, 0.5), lc(1.5, 0.5, 1.4, 0.6, {1.0, 0.2})};
  PoleSet d2;
  d2[LinearForm::coordinate(1, 0)] = 2;
  AmplitudeOptions o;
  o.route = Route::OffCone;
  auto g2 = amplitude_germ(s2, PropagatorModel{}, AmplitudeSpec::two_point(1), p2, d2, o);
  for (const auto& t : project_pi(g2.germ).singular) EXPECT_LE(t.numerator.max_abs(), 1e-8 * g2.scale);
}

// ---------------------------------------------------------------------------
// Locality and covariance

TEST(Factorization, D1FourVertices) {
  Spacetime s{1};
  AmplitudeSpec spec;
  spec.n = 4;
  spec.edges[{0, 1}] = 1;
  spec.edges[{2, 3}] = 1;
  spec.edges[{0, 2}] = 1;
  std::vector<VertexFunction> phi{bump(-1.5, 0.6, {1.0, 0.3}), bump(-1.3, 0.7), bump(1.4, 0.5),
                                  bump(1.2, 0.8, {1.0, -0.2})};
  auto r = check_qft_factorization(s, PropagatorModel{}, spec, {0, 1}, phi);
  EXPECT_TRUE(r.pass) << r.error << " " << r.detail;
  EXPECT_LT(r.error, 1e-8);
}

TEST(Factorization, D1SquaredInnerEdgeWithConstant) {
  Spacetime s{1};
  AmplitudeSpec spec;
  spec.n = 4;
  spec.edges[{0, 1}] = 2;
  spec.edges[{2, 3}] = 1;
  spec.edges[{0, 2}] = 1;
  std::vector<VertexFunction> phi{bump(-1.5, 0.6, {1.0, 0.3}), bump(-1.3, 0.7), bump(1.4, 0.5),
                                  bump(1.2, 0.8, {1.0, -0.2})};
  auto r = check_qft_factorization(s, PropagatorModel{1.0, 0.0, 0.5}, spec, {0, 1}, phi);
  EXPECT_TRUE(r.pass) << r.error << " " << r.detail;
}

TEST(Factorization, NoCrossEdgesIsTensorProduct) {
  Spacetime s{1};
  AmplitudeSpec spec;
  spec.n = 4;
  spec.edges[{0, 1}] = 1;
  spec.edges[{2, 3}] = 1;
  std::vector<VertexFunction> phi{bump(-1.5, 0.6), bump(-1.3, 0.7), bump(1.4, 0.5), bump(1.2, 0.8)};
  auto r = check_qft_factorization(s, PropagatorModel{}, spec, {0, 1}, phi);
  EXPECT_TRUE(r.pass) << r.error;
  auto a = renormalize_amplitude(s, PropagatorModel{}, AmplitudeSpec::two_point(1), {phi[0], phi[1]});
  auto b = renormalize_amplitude(s, PropagatorModel{}, AmplitudeSpec::two_point(1), {phi[2], phi[3]});
  EXPECT_NEAR(std::abs(r.rhs - a.value * b.value), 0.0, 1e-6 * std::abs(r.rhs));
}

TEST(Factorization, Preconditions) {
  Spacetime s{1};
  AmplitudeSpec spec;
  spec.n = 3;
  spec.edges[{0, 1}] = 1;
  spec.edges[{0, 2}] = 1;
  std::vector<VertexFunction> phi{bump(-1.5, 0.6), bump(-1.3, 0.7), bump(-1.0, 0.8)};
  auto r = check_qft_factorization(s, PropagatorModel{}, spec, {0, 1}, phi);
  EXPECT_FALSE(r.pass);
  EXPECT_NE(r.detail.find("precondition"), std::string::npos);
  r = check_qft_factorization(s, PropagatorModel{1.0, 1.0, 0.0}, spec, {0, 1}, phi);
  EXPECT_NE(r.detail.find("V = 0"), std::string::npos);
}

TEST(Factorization, D2SharedSamplesAgreeTightly) {
  Spacetime s{2};
  AmplitudeSpec spec;
  spec.n = 4;
  spec.edges[{0, 1}] = 1;
  spec.edges[{2, 3}] = 1;
  spec.edges[{0, 2}] = 1;
  std::vector<VertexFunction> phi{lc(-1.5, 0.5, -1.5, 0.5), lc(-1.2, 0.6, -1.6, 0.6, {1.0, 0.3}),
                                  lc(1.5, 0.5, 1.4, 0.6), lc(1.3, 0.7, 1.6, 0.5)};
  AmplitudeOptions o;
  o.factorization_samples = 200;
  o.independent_samples = false;
  auto r = check_qft_factorization(s, PropagatorModel{}, spec, {0, 1}, phi, o, 1e-6);
  EXPECT_TRUE(r.pass) << r.error << " " << r.detail;
}

TEST(Factorization, D2MonteCarloIndependentSeeds) {
  Spacetime s{2};
  AmplitudeSpec spec;
  spec.n = 4;
  spec.edges[{0, 1}] = 1;
  spec.edges[{2, 3}] = 1;
  spec.edges[{0, 2}] = 1;
  std::vector<VertexFunction> phi{lc(-1.5, 0.5, -1.5, 0.5), lc(-1.2, 0.6, -1.6, 0.6, {1.0, 0.3}),
                                  lc(1.5, 0.5, 1.4, 0.6), lc(1.3, 0.7, 1.6, 0.5)};
  AmplitudeOptions o;
  o.factorization_samples = 600;
  auto r = check_qft_factorization(s, PropagatorModel{}, spec, {0, 1}, phi, o);
  EXPECT_TRUE(r.pass) << r.error << " " << r.detail;
  EXPECT_GT(r.tolerance, 0.0);
}

TEST(Covariance, TranslationBoostReflection) {
  Spacetime s{2};
  auto spec = AmplitudeSpec::two_point(1);
  std::vector<VertexFunction> phi{lc(0.1, 1.0, -0.1, 0.9, {1.0, 0.2}), lc(-0.2, 0.8, 0.3, 1.1)};
  auto t = check_covariance(s, PropagatorModel{}, spec, phi, Isometry::translation({1.0, 0.0}));
  EXPECT_TRUE(t.pass);
  EXPECT_LT(t.error, 1e-12);
  auto id = check_covariance(s, PropagatorModel{}, spec, phi, Isometry::boost(0.0));
  EXPECT_EQ(id.error, 0.0);
  auto b = check_covariance(s, PropagatorModel{}, spec, phi, Isometry::boost(0.5));
  EXPECT_TRUE(b.pass) << b.error;

  Spacetime s1{1};
  std::vector<VertexFunction> p1{bump(0.1, 1.0, {1.0, 0.3}), bump(-0.2, 0.8)};
  auto r = check_covariance(s1, PropagatorModel{}, AmplitudeSpec::two_point(2), p1, Isometry::reflection(1));
  EXPECT_TRUE(r.pass) << r.error;
}

TEST(Feynman, RelationAndPolarization) {
  for (int d : {1, 2}) {
    auto rep = feynman_relation_check(Spacetime{d}, PropagatorModel{}, 400, 5);
    EXPECT_TRUE(rep.pass) << rep.detail;
    EXPECT_EQ(rep.cases, 400u);
  }
  Spacetime s{2};
  // Later point y = x + (1, 1): forward covector there for a > 0.
  QVec x{0, 0}, y{1, 1};
  auto g = synge(s, x, y);
  EXPECT_TRUE(is_feynman_element(s, x, y, g.dx, g.dy));
  QVec nx{-g.dx[0], -g.dx[1]}, ny{-g.dy[0], -g.dy[1]};
  EXPECT_FALSE(is_feynman_element(s, x, y, nx, ny));
  EXPECT_TRUE(in_forward_cone(g.dy, true));
  EXPECT_TRUE(is_feynman_element(s, x, x, QVec{1, 2}, QVec{-1, -2}));
  EXPECT_FALSE(is_feynman_element(s, x, QVec{2, 1}, QVec{1, 0}, QVec{-1, 0}));
}

TEST(Cover, Membership) {
  auto c2 = cover_regions(2);
  EXPECT_EQ(c2.subsets.size(), 2u);
  EXPECT_TRUE(c2.contains({0}, {{0.0}, {1.0}}));
  EXPECT_FALSE(c2.covered({{0.5}, {0.5}}));
  auto c3 = cover_regions(3);
  EXPECT_EQ(c3.subsets.size(), 6u);
  std::vector<std::vector<double>> line{{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}};
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(c3.contains({i}, line));
  std::vector<std::vector<double>> pair{{0.0}, {0.0}, {1.0}};
  EXPECT_TRUE(c3.contains({0, 1}, pair));
  EXPECT_FALSE(c3.contains({0}, pair));
}

TEST(Cover, BruteForceEqualsOffDiagonal) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> pick(0, 2);
  for (std::size_t n = 2; n <= 5; ++n) {
    auto c = cover_regions(n);
    for (int k = 0; k < 300; ++k) {
      std::vector<std::vector<double>> cfg(n, std::vector<double>(1));
      for (auto& p : cfg) p[0] = pick(rng);
      bool all_equal = true;
      for (const auto& p : cfg) all_equal = all_equal && p == cfg[0];
      EXPECT_EQ(c.covered(cfg), !all_equal);
      for (const auto& I : c.subsets) {
        double mind = INFINITY;
        std::vector<bool> in(n, false);
        for (auto i : I) in[i] = true;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j)
            if (in[i] && !in[j]) mind = std::min(mind, std::abs(cfg[i][0] - cfg[j][0]));
        EXPECT_EQ(c.contains(I, cfg), mind > 0);
      }
    }
  }
}

TEST(QftJson, SpecAndVertexRoundTrip) {
  auto j = nlohmann::json::parse(R"({"n": 3, "edges": [[0, 1, 2], [2, 1, 1]]})");
  auto spec = amplitude_spec_from_json(j);
  EXPECT_EQ(spec.multiplicity(1, 2), 1);
  EXPECT_EQ(spec.edge_list().size(), 2u);
  auto v = vertex_function_from_json(
      nlohmann::json::parse(R"({"frame": "light_cone", "factors": [{"center": 0.1, "half_width": 0.5},
                                {"center": 0.0, "half_width": 1.0, "poly": [1.0, 0.5]}]})"),
      Spacetime{2});
  EXPECT_TRUE(v.separable_in({{1.0, -1.0}, {1.0, 1.0}}).has_value());
  EXPECT_THROW(vertex_function_from_json(nlohmann::json::parse(R"({"factors": [{"center": 0, "half_width": 1}]})"),
                                         Spacetime{2}),
               Error);
}
