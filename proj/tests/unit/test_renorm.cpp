#include "meroren/renorm.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <numbers>

using namespace meroren;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<TestFunction> bump1(double c, double w, std::vector<double> poly = {1.0}) {
  return std::make_shared<TestFunction>(std::vector<BumpFactor>{{std::move(poly), c, w}});
}

double at(const SmoothFunction& f, double x, int d = 0) {
  double xs[1] = {x};
  int ds[1] = {d};
  return f.derivative(xs, ds);
}

// p.v. int g / x with g = phi^{(d)}, by symmetric excision.
double pv(const SmoothFunction& f, double reach, int d = 0) {
  return integrate([&](const QuadNode& n) { return (at(f, n.x, d) - at(f, -n.x, d)) / n.x; }, 0.0, reach, 1e-13)
      .value;
}

RenormRequest request(std::string entry, long long k, std::shared_ptr<const SmoothFunction> phi) {
  RenormRequest r;
  std::vector<std::size_t> block(catalog_entry(entry).dim);
  for (std::size_t i = 0; i < block.size(); ++i) block[i] = i;
  r.factors = {{std::move(entry), block}};
  r.exponents = {k};
  r.phi = std::move(phi);
  return r;
}

}  // namespace

TEST(Renorm, OffZeroSetIsPlainIntegral) {
  auto phi = bump1(1.5, 0.5, {1.0, 0.2});
  auto r = renormalize(request("x", -1, phi));
  double direct = integrate([&](const QuadNode& n) { return at(*phi, n.x) / n.x; }, 1.0, 2.0, 1e-13).value;
  EXPECT_NEAR(std::abs(r.value - direct), 0.0, 1e-9);
}

TEST(Renorm, SymmetricBumpGivesDeltaTerm) {
  auto phi = bump1(0.0, 1.0);
  auto r = renormalize(request("x", -1, phi));
  EXPECT_NEAR(std::abs(r.value - Complex(0, -kPi * at(*phi, 0.0))), 0.0, 1e-6);
}

TEST(Renorm, PrincipalValuePlusDelta) {
  auto phi = bump1(0.2, 1.0, {1.0, 0.5, -0.3});
  auto r = renormalize(request("x", -1, phi));
  Complex oracle(pv(*phi, 1.2), -kPi * at(*phi, 0.0));
  EXPECT_NEAR(std::abs(r.value - oracle), 0.0, 1e-6);
}

TEST(Renorm, InverseSquareViaDerivative) {
  // (x + i0)^{-2}(phi) = (x + i0)^{-1}(phi')
  auto phi = bump1(0.2, 1.0, {1.0, 0.5, -0.3});
  auto r = renormalize(request("x", -2, phi));
  Complex oracle(pv(*phi, 1.2, 1), -kPi * at(*phi, 0.0, 1));
  EXPECT_NEAR(std::abs(r.value - oracle), 0.0, 1e-6);
}

TEST(Renorm, GammaAnalogFinitePart) {
  auto phi = bump1(0.1, 0.9, {1.0, 0.4});
  auto r = renormalize(request("x2", -1, phi));
  double phi0 = at(*phi, 0.0);
  double fp = integrate(
                  [&](const QuadNode& n) {
                    double x = n.x;
                    if (x < 1e-4) return at(*phi, 0.0, 2) + at(*phi, 0.0, 4) * x * x / 12;
                    return (at(*phi, x) + at(*phi, -x) - 2 * phi0) / (x * x);
                  },
                  0.0, 1.0, 1e-13)
                  .value -
              2 * phi0 / 1.0;  // tail: int_1^inf -2 phi0 / x^2
  EXPECT_NEAR(std::abs(r.value - fp), 0.0, 1e-6);
}

TEST(Renorm, RegularPointLocality) {
  // (x + i0)^lambda is entire: no singular part at any integer.
  auto phi = bump1(0.1, 1.0, {1.0, 0.3});
  for (long long k : {-1, -2, -3}) {
    auto r = renormalize(request("x", k, phi));
    for (const auto& t : r.decomposition.singular)
      EXPECT_LE(t.numerator.max_abs(), 1e-8 * std::max(1.0, r.germ.scale)) << k;
  }
}

TEST(Renorm, ScalingCovariance) {
  // phi(x / a): the p.v. part is scale invariant, the delta term is phi(0).
  for (double a : {0.5, 1.0, 2.0}) {
    auto phi = bump1(0.2 * a, a, {1.0, 0.3 / a});
    auto r = renormalize(request("x", -1, phi));
    Complex oracle(pv(*phi, 1.2 * a), -kPi * at(*phi, 0.0));
    EXPECT_NEAR(std::abs(r.value - oracle), 0.0, 1e-6) << a;
  }
}

TEST(Extension, InverseSquareOffZero) {
  auto rep = check_extension(request("x", -2, bump1(1.5, 0.5)), 1e-8);
  EXPECT_TRUE(rep.pass) << rep.error;
}

TEST(Extension, UvOffLightCone) {
  auto phi = std::make_shared<TestFunction>(TestFunction::bump({1.5, -1.2}, {0.4, 0.5}));
  auto rep = check_extension(request("uv", -1, phi), 1e-6);
  EXPECT_TRUE(rep.pass) << rep.error;
}

TEST(Extension, ZeroTestFunction) {
  auto rep = check_extension(request("x", -1, bump1(1.5, 0.4, {0.0})), 1e-6);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(std::abs(rep.lhs), 0.0);
  EXPECT_EQ(std::abs(rep.rhs), 0.0);
}

TEST(Extension, EveryEntryAndExponent) {
  std::vector<std::pair<std::string, std::shared_ptr<const SmoothFunction>>> cases{
      {"x", bump1(-1.5, 0.5, {1.0, 0.2})},
      {"x2", bump1(1.4, 0.6)},
      {"uv", std::make_shared<TestFunction>(TestFunction::bump({-1.5, 1.1}, {0.5, 0.6}))},
      {"minkowski2", std::make_shared<TestFunction>(TestFunction::bump({2.0, 0.2}, {0.4, 0.5}))},
      {"monomial:1,2", std::make_shared<TestFunction>(TestFunction::bump({1.3, -1.4}, {0.3, 0.5}))}};
  for (const auto& [name, phi] : cases)
    for (long long k : {-1, -2}) {
      double tol = catalog_entry(name).dim == 1 ? 1e-6 : 1e-5;
      auto rep = check_extension(request(name, k, phi), tol);
      EXPECT_TRUE(rep.pass) << name << " k=" << k << " err=" << rep.error << " " << rep.detail;
    }
}

TEST(Extension, PreconditionReported) {
  auto rep = check_extension(request("x", -1, bump1(0.0, 1.0)));
  EXPECT_FALSE(rep.pass);
  EXPECT_NE(rep.detail.find("precondition"), std::string::npos);
}

TEST(Tensor, InverseTimesInverse) {
  auto pa = bump1(0.0, 1.0), pb = bump1(0.0, 0.7);
  auto rep = check_tensor_factorization(request("x", -1, pa), request("x", -1, pb));
  EXPECT_TRUE(rep.pass) << rep.error;
  Complex oracle = Complex(0, -kPi * at(*pa, 0.0)) * Complex(0, -kPi * at(*pb, 0.0));
  EXPECT_NEAR(std::abs(rep.lhs - oracle), 0.0, 1e-5 * std::abs(oracle));
}

TEST(Tensor, HolomorphicFubini) {
  auto pa = bump1(0.1, 1.0, {1.0, 0.5}), pb = bump1(-0.2, 0.8);
  auto rep = check_tensor_factorization(request("x", 1, pa), request("x", 1, pb));
  EXPECT_TRUE(rep.pass) << rep.error;
  double a = integrate([&](const QuadNode& n) { return n.x * at(*pa, n.x); }, -0.9, 1.1, 1e-13).value;
  double b = integrate([&](const QuadNode& n) { return n.x * at(*pb, n.x); }, -1.0, 0.6, 1e-13).value;
  EXPECT_NEAR(std::abs(rep.lhs - a * b), 0.0, 1e-9);
}

TEST(Tensor, InverseSquareTimesInverse) {
  auto pa = bump1(0.2, 1.0, {1.0, 0.5, -0.3}), pb = bump1(-0.1, 0.9, {1.0, -0.4});
  auto rep = check_tensor_factorization(request("x", -2, pa), request("x", -1, pb));
  EXPECT_TRUE(rep.pass) << rep.error;
  Complex a(pv(*pa, 1.2, 1), -kPi * at(*pa, 0.0, 1));
  Complex b(pv(*pb, 1.0), -kPi * at(*pb, 0.0));
  EXPECT_NEAR(std::abs(rep.lhs - a * b), 0.0, 1e-5 * std::abs(a * b));
}

TEST(Tensor, AllOneDimensionalPairs) {
  auto pa = bump1(0.15, 1.0, {1.0, 0.4}), pb = bump1(-0.1, 0.8, {1.0, -0.3});
  struct Case {
    std::string fa;
    long long ka;
    std::string fb;
    long long kb;
  };
  for (const auto& c : {Case{"x", -1, "x2", -1}, Case{"x2", -1, "x", -2}, Case{"x2", -2, "x2", -1}}) {
    auto rep = check_tensor_factorization(request(c.fa, c.ka, pa), request(c.fb, c.kb, pb));
    EXPECT_TRUE(rep.pass) << c.fa << c.ka << " " << c.fb << c.kb << " err=" << rep.error;
  }
}

TEST(RenormJson, Shape) {
  auto r = renormalize(request("x2", -2, bump1(0.0, 1.0, {1.0, 0.3})));
  auto j = to_json(r);
  ASSERT_EQ(j["value"].size(), 2u);
  EXPECT_TRUE(j["meta"].contains("nodes"));
  EXPECT_FALSE(j["singular"].empty());
  EXPECT_TRUE(j["singular"][0].contains("err"));
}
