#include "meroren/catalog.hpp"

#include "meroren/errors.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <regex>

namespace meroren {

namespace {

using Mat = std::vector<std::vector<double>>;

Mat identity(std::size_t n) {
  Mat m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

bool any_nonzero(std::span<const double> xi) {
  for (double v : xi)
    if (v != 0.0) return true;
  return false;
}

// Guard band for floating-point boundary tests.
constexpr double kGuard = 1e-9;

CatalogEntry make_x() {
  CatalogEntry e;
  e.name = "x";
  e.dim = 1;
  for (int s : {1, -1}) e.charts.push_back({{s}, identity(1), {0.0}, 1.0, s, {1}});
  e.value = [](std::span<const double> x) { return x[0]; };
  e.gradient = [](std::span<const double>) { return std::vector<double>{1.0}; };
  e.critical_locus = "empty";
  e.bernstein_sato = "lambda + 1";
  e.lambda_member = [](std::span<const double> x, std::span<const double> xi) {
    return std::abs(x[0]) <= kGuard && xi[0] > kGuard;
  };
  return e;
}

CatalogEntry make_x2() {
  CatalogEntry e;
  e.name = "x2";
  e.dim = 1;
  for (int s : {1, -1}) e.charts.push_back({{s}, identity(1), {0.0}, 1.0, 1, {2}});
  e.value = [](std::span<const double> x) { return x[0] * x[0]; };
  e.gradient = [](std::span<const double> x) { return std::vector<double>{2.0 * x[0]}; };
  e.critical_locus = "{0}";
  e.bernstein_sato = "(2 lambda + 1)(2 lambda + 2)";
  // f >= 0 near 0, so only the critical point contributes: a_k 2x_k -> xi
  // with x_k -> 0 reaches every xi != 0.
  e.lambda_member = [](std::span<const double> x, std::span<const double> xi) {
    return std::abs(x[0]) <= kGuard && any_nonzero(xi);
  };
  return e;
}

CatalogEntry make_monomial(int a, int b) {
  CatalogEntry e;
  e.name = "monomial:" + std::to_string(a) + "," + std::to_string(b);
  e.dim = 2;
  for (int s1 : {1, -1})
    for (int s2 : {1, -1}) {
      int eps = ((a % 2 && s1 < 0) ? -1 : 1) * ((b % 2 && s2 < 0) ? -1 : 1);
      e.charts.push_back({{s1, s2}, identity(2), {0.0, 0.0}, 1.0, eps, {a, b}});
    }
  e.value = [a, b](std::span<const double> x) { return std::pow(x[0], a) * std::pow(x[1], b); };
  e.gradient = [a, b](std::span<const double> x) {
    return std::vector<double>{a * std::pow(x[0], a - 1) * std::pow(x[1], b),
                               b * std::pow(x[0], a) * std::pow(x[1], b - 1)};
  };
  e.critical_locus = (a > 1 && b > 1) ? "{y1 = 0} u {y2 = 0}"
                     : a > 1          ? "{y1 = 0}"
                     : b > 1          ? "{y2 = 0}"
                                      : "{0}";
  e.bernstein_sato = "prod_{m<=" + std::to_string(a) + "}(" + std::to_string(a) + " lambda + m) * prod_{m<=" +
                     std::to_string(b) + "}(" + std::to_string(b) + " lambda + m)";
  e.lambda_member = [a, b](std::span<const double> x, std::span<const double> xi) {
    if (!any_nonzero(xi)) return false;
    const double g = kGuard * std::hypot(xi[0], xi[1]);
    bool z1 = std::abs(x[0]) <= kGuard, z2 = std::abs(x[1]) <= kGuard;
    auto odd = [](int k) { return k % 2 != 0; };
    if (z1 && z2) {
      // Near (s, t): df = s^{a-1} t^{b-1} (a t, b s); quadrant (p, q) of (s, t)
      // reaches the closed quadrant with signs (p^{a-1} q^b, p^a q^{b-1}).
      for (int p : {1, -1})
        for (int q : {1, -1}) {
          int s1 = (odd(a - 1) ? p : 1) * (odd(b) ? q : 1);
          int s2 = (odd(a) ? p : 1) * (odd(b - 1) ? q : 1);
          if (s1 * xi[0] >= -g && s2 * xi[1] >= -g) return true;
        }
      return false;
    }
    // Off the vertex on y_here = 0: df ~ (pow_here y_here^{pow_here-1} other^{pow_other}, 0).
    auto on_axis = [&](double other, int pow_here, int pow_other, double xi_here, double xi_other) {
      if (std::abs(xi_other) > g) return false;
      if (!odd(pow_here)) return std::abs(xi_here) > g;
      // y_here^{pow_here - 1} >= 0: the sign of a * df is fixed, a > 0.
      return xi_here * std::pow(other, pow_other) > g;
    };
    if (z1) return on_axis(x[1], a, b, xi[0], xi[1]);
    if (z2) return on_axis(x[0], b, a, xi[1], xi[0]);
    return false;
  };
  return e;
}

CatalogEntry make_uv() {
  CatalogEntry e = make_monomial(1, 1);
  e.name = "uv";
  e.critical_locus = "{0}";
  e.bernstein_sato = "(lambda + 1)^2";
  return e;
}

CatalogEntry make_minkowski2() {
  // x0^2 - x1^2 = u v with u = x0 - x1, v = x0 + x1.
  CatalogEntry e;
  e.name = "minkowski2";
  e.dim = 2;
  Mat A{{0.5, 0.5}, {-0.5, 0.5}};
  for (int s1 : {1, -1})
    for (int s2 : {1, -1}) e.charts.push_back({{s1, s2}, A, {0.0, 0.0}, 0.5, s1 * s2, {1, 1}});
  e.value = [](std::span<const double> x) { return x[0] * x[0] - x[1] * x[1]; };
  e.gradient = [](std::span<const double> x) { return std::vector<double>{2.0 * x[0], -2.0 * x[1]}; };
  e.critical_locus = "{0}";
  e.bernstein_sato = "(lambda + 1)^2";
  const auto& uv = catalog_entry("uv");
  auto member = uv.lambda_member;
  e.lambda_member = [member](std::span<const double> x, std::span<const double> xi) {
    // (u, v) = (x0 - x1, x0 + x1); covectors pull back by A^T.
    double u[2] = {x[0] - x[1], x[0] + x[1]};
    double eta[2] = {0.5 * (xi[0] - xi[1]), 0.5 * (xi[0] + xi[1])};
    return member(u, eta);
  };
  return e;
}

}  // namespace

const CatalogEntry& catalog_entry(const std::string& name) {
  static std::mutex mutex;
  static std::map<std::string, std::unique_ptr<CatalogEntry>> cache;
  {
    std::lock_guard lock(mutex);
    auto it = cache.find(name);
    if (it != cache.end()) return *it->second;
  }
  CatalogEntry e;
  std::smatch m;
  static const std::regex mono(R"(monomial:(\d+),(\d+))");
  if (name == "x") {
    e = make_x();
  } else if (name == "x2") {
    e = make_x2();
  } else if (name == "uv") {
    e = make_uv();
  } else if (name == "minkowski2") {
    e = make_minkowski2();
  } else if (std::regex_match(name, m, mono)) {
    int a = std::stoi(m[1]), b = std::stoi(m[2]);
    if (a < 1 || b < 1 || a > 8 || b > 8) throw CatalogError("monomial exponents must lie in 1..8");
    e = make_monomial(a, b);
  } else {
    throw CatalogError("unsupported function '" + name + "'");
  }
  std::lock_guard lock(mutex);
  auto [it, inserted] = cache.emplace(name, std::make_unique<CatalogEntry>(std::move(e)));
  return *it->second;
}

std::vector<std::string> catalog_names() { return {"x", "x2", "uv", "minkowski2", "monomial:a,b"}; }

}  // namespace meroren
