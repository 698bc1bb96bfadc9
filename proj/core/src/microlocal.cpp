#include "meroren/microlocal.hpp"

#include "meroren/errors.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <tbb/parallel_for.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>

namespace meroren {

// ---------------------------------------------------------------------------
// Order and cones

Rational minkowski(const QVec& a, const QVec& b) {
  Rational s = a[0] * b[0];
  for (std::size_t i = 1; i < a.size(); ++i) s -= a[i] * b[i];
  return s;
}

namespace {

bool is_zero(const QVec& v) {
  return std::all_of(v.begin(), v.end(), [](const Rational& r) { return r == 0; });
}

QVec sub(const QVec& a, const QVec& b) {
  QVec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

void add_to(QVec& a, const QVec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

double norm2(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

bool in_forward_cone(const QVec& xi, bool strict) {
  if (minkowski(xi, xi) < 0 || xi[0] < 0) return false;
  // g >= 0 with xi^0 = 0 forces xi = 0
  return !strict || xi[0] > 0;
}

bool in_forward_cone(std::span<const double> xi, bool strict, double guard) {
  double n = norm2(xi);
  if (n <= guard) return !strict;
  double g = xi[0] * xi[0];
  for (std::size_t i = 1; i < xi.size(); ++i) g -= xi[i] * xi[i];
  return g >= -guard * n * n && xi[0] >= -guard * n;
}

bool causal_leq(const CausalSite& s, const QVec& x, const QVec& y) {
  if (x.size() != s.dim() || y.size() != s.dim()) throw Error("point dimension does not match the site");
  return in_forward_cone(sub(y, x), false);
}

bool causal_less(const CausalSite& s, const QVec& x, const QVec& y) { return x != y && causal_leq(s, x, y); }

// ---------------------------------------------------------------------------
// Traces and polarization

std::vector<CotangentElement> trace(const PolarizedConfig& p) {
  std::vector<CotangentElement> groups;
  std::vector<bool> nonzero;
  for (const auto& e : p) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.x == e.x; });
    if (it == groups.end()) {
      groups.push_back({e.x, QVec(e.xi.size(), Rational(0))});
      nonzero.push_back(false);
      it = groups.end() - 1;
    }
    add_to(it->xi, e.xi);
    if (!is_zero(e.xi)) nonzero[it - groups.begin()] = true;
  }
  std::vector<CotangentElement> out;
  for (std::size_t i = 0; i < groups.size(); ++i)
    if (nonzero[i]) out.push_back(std::move(groups[i]));
  return out;
}

std::vector<QVec> maximal_points(const CausalSite& s, const std::vector<CotangentElement>& tr) {
  std::vector<QVec> out;
  for (const auto& a : tr) {
    bool maximal = std::none_of(tr.begin(), tr.end(), [&](const auto& b) { return causal_less(s, a.x, b.x); });
    if (maximal) out.push_back(a.x);
  }
  return out;
}

bool is_reduced_polarized(const CausalSite& s, const std::vector<CotangentElement>& tr, bool strict) {
  for (const auto& a : tr) {
    bool maximal = std::none_of(tr.begin(), tr.end(), [&](const auto& b) { return causal_less(s, a.x, b.x); });
    if (maximal && !in_forward_cone(a.xi, strict)) return false;
  }
  return true;
}

namespace {

std::vector<QVec> sorted(std::vector<QVec> v) {
  std::sort(v.begin(), v.end());
  return v;
}

bool all_zero(const PolarizedConfig& p) {
  return std::all_of(p.begin(), p.end(), [](const auto& e) { return is_zero(e.xi); });
}

}  // namespace

SumPolarizationReport check_sum_polarization(const CausalSite& s, const PolarizedConfig& u,
                                             const PolarizedConfig& v) {
  SumPolarizationReport r;
  if (u.size() != v.size()) {
    r.precondition_detail = "configurations have different lengths";
    return r;
  }
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i].x != v[i].x) {
      r.precondition_detail = "base points differ at index " + std::to_string(i);
      return r;
    }
  if (all_zero(u) || all_zero(v)) {
    r.precondition_detail = "a configuration lies in the zero section";
    return r;
  }
  if (!is_polarized(s, u, false)) {
    r.precondition_detail = "trace(u) is not a reduced polarized part";
    return r;
  }
  if (!is_polarized(s, v, true)) {
    r.precondition_detail = "trace(v) is not a reduced strictly polarized part";
    return r;
  }
  r.precondition = true;

  PolarizedConfig w = u;
  for (std::size_t i = 0; i < w.size(); ++i) add_to(w[i].xi, v[i].xi);
  r.nonzero_sum = !all_zero(w);
  r.maxA = sorted(maximal_points(s, trace(w)));
  r.maxB = sorted(maximal_points(s, trace(u)));
  r.maxC = sorted(maximal_points(s, trace(v)));
  std::vector<QVec> cap;
  std::set_intersection(r.maxB.begin(), r.maxB.end(), r.maxC.begin(), r.maxC.end(), std::back_inserter(cap));
  r.maxA_eq_maxB_cap_maxC = cap == r.maxA;
  r.sum_strictly_polarized = r.nonzero_sum && is_polarized(s, w, true);
  return r;
}

// ---------------------------------------------------------------------------
// Random configurations

namespace {

struct Draw {
  std::mt19937_64& rng;
  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng); }

  QVec vec(std::size_t n, int r) {
    QVec v(n);
    for (auto& c : v) c = uniform(-r, r);
    return v;
  }
  QVec forward(std::size_t n, int r) {
    QVec v(n);
    int l1 = 0;
    for (std::size_t i = 1; i < n; ++i) {
      int c = uniform(-r, r);
      v[i] = c;
      l1 += std::abs(c);
    }
    // xi^0 >= |xi'|_1 >= |xi'|_2; null when equal and at most one spatial entry
    v[0] = l1 + uniform(l1 == 0 ? 1 : 0, r);
    return v;
  }
};

std::vector<QVec> draw_points(const CausalSite& s, Draw& d, const PolarizationSampler& opt) {
  std::size_t n = static_cast<std::size_t>(d.uniform(1, static_cast<int>(opt.max_points)));
  std::vector<QVec> pts;
  for (std::size_t i = 0; i < n; ++i) {
    if (!pts.empty() && d.coin(opt.shared_probability))
      pts.push_back(pts[d.uniform(0, static_cast<int>(pts.size()) - 1)]);
    else
      pts.push_back(d.vec(s.dim(), opt.coord_range));
  }
  return pts;
}

PolarizedConfig draw_covectors(const CausalSite& s, Draw& d, const std::vector<QVec>& pts,
                               const PolarizationSampler& opt) {
  PolarizedConfig p;
  for (const auto& x : pts) {
    QVec xi(s.dim(), Rational(0));
    if (!d.coin(opt.zero_probability))
      do xi = d.vec(s.dim(), opt.covector_range);
      while (is_zero(xi));
    p.push_back({x, std::move(xi)});
  }
  return p;
}

// Redraw covectors at offending maximal points until the trace is (strictly)
// polarized. Non-strict repairs sometimes produce cancelling pairs.
bool repair(const CausalSite& s, Draw& d, PolarizedConfig& p, bool strict, const PolarizationSampler& opt) {
  for (int iter = 0; iter < 64; ++iter) {
    auto tr = trace(p);
    bool ok = true;
    for (const auto& a : maximal_points(s, tr)) {
      QVec eta;
      for (const auto& t : tr)
        if (t.x == a) eta = t.xi;
      if (in_forward_cone(eta, strict)) continue;
      ok = false;
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i].x == a) idx.push_back(i);
      if (!strict && idx.size() >= 2 && d.coin(0.3)) {
        QVec xi;
        do xi = d.vec(s.dim(), opt.covector_range);
        while (is_zero(xi));
        for (auto i : idx) p[i].xi = QVec(s.dim(), Rational(0));
        p[idx[0]].xi = xi;
        QVec neg(xi.size());
        for (std::size_t k = 0; k < xi.size(); ++k) neg[k] = -xi[k];
        p[idx[1]].xi = neg;
        continue;
      }
      bool any = false;
      for (auto i : idx) {
        bool zero = d.coin(opt.zero_probability);
        p[i].xi = zero ? QVec(s.dim(), Rational(0)) : d.forward(s.dim(), opt.covector_range);
        any = any || !zero;
      }
      if (strict && !any) p[idx[0]].xi = d.forward(s.dim(), opt.covector_range);
    }
    if (ok) return !all_zero(p);
  }
  return false;
}

}  // namespace

std::pair<PolarizedConfig, PolarizedConfig> random_admissible_pair(const CausalSite& s, std::mt19937_64& rng,
                                                                   const PolarizationSampler& opt) {
  Draw d{rng};
  for (;;) {
    auto pts = draw_points(s, d, opt);
    auto u = draw_covectors(s, d, pts, opt);
    auto v = draw_covectors(s, d, pts, opt);
    if (repair(s, d, u, false, opt) && repair(s, d, v, true, opt)) return {std::move(u), std::move(v)};
  }
}

std::pair<PolarizedConfig, PolarizedConfig> random_inadmissible_pair(const CausalSite& s, std::mt19937_64& rng,
                                                                     const PolarizationSampler& opt) {
  Draw d{rng};
  for (;;) {
    auto pts = draw_points(s, d, opt);
    auto u = draw_covectors(s, d, pts, opt);
    if (!repair(s, d, u, false, opt)) continue;
    PolarizedConfig v = u;
    if (d.coin(0.5)) {
      for (auto& e : v)
        for (auto& c : e.xi) c = -c;
    } else {
      v = draw_covectors(s, d, pts, opt);
      if (!repair(s, d, v, false, opt)) continue;
    }
    if (!all_zero(v) && !is_polarized(s, v, true)) return {std::move(u), std::move(v)};
  }
}

PolarizationBatch run_polarization_batch(const CausalSite& s, std::size_t cases, std::uint64_t seed,
                                         bool admissible, const PolarizationSampler& opt) {
  struct Outcome {
    bool nonzero = true, identity = true, strict = true;
  };
  std::vector<Outcome> out(cases);
  tbb::parallel_for(std::size_t{0}, cases, [&](std::size_t i) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + i);
    auto [u, v] = admissible ? random_admissible_pair(s, rng, opt) : random_inadmissible_pair(s, rng, opt);
    PolarizedConfig w = u;
    for (std::size_t k = 0; k < w.size(); ++k) add_to(w[k].xi, v[k].xi);
    auto r = check_sum_polarization(s, u, v);
    if (admissible) {
      out[i] = {r.nonzero_sum, r.maxA_eq_maxB_cap_maxC, r.sum_strictly_polarized};
    } else {
      // precondition fails by construction; evaluate the conclusions directly
      out[i].nonzero = !all_zero(w);
      out[i].strict = out[i].nonzero && is_polarized(s, w, true);
      out[i].identity = true;
    }
  });
  PolarizationBatch b;
  b.cases = cases;
  for (std::size_t i = 0; i < cases; ++i) {
    const auto& o = out[i];
    b.nonzero_sum_failures += !o.nonzero;
    b.max_identity_failures += !o.identity;
    b.strict_sum_failures += !o.strict;
    if ((!o.nonzero || !o.identity || !o.strict) && b.counterexamples.size() < 5) {
      std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + i);
      b.counterexamples.push_back(admissible ? random_admissible_pair(s, rng, opt)
                                             : random_inadmissible_pair(s, rng, opt));
    }
  }
  return b;
}

namespace {

nlohmann::json qvec_json(const QVec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& r : v) a.push_back(r.str());
  return a;
}

QVec qvec_from_json(const nlohmann::json& j) {
  QVec v;
  for (const auto& e : j) {
    if (e.is_string())
      v.emplace_back(e.get<std::string>());
    else if (e.is_number_integer())
      v.emplace_back(e.get<long long>());
    else
      v.emplace_back(e.get<double>());  // exact binary value
  }
  return v;
}

}  // namespace

nlohmann::json to_json(const PolarizedConfig& p) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& e : p) a.push_back({{"x", qvec_json(e.x)}, {"xi", qvec_json(e.xi)}});
  return a;
}

PolarizedConfig polarized_config_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error("configuration must be an array of {x, xi}");
  PolarizedConfig p;
  for (const auto& e : j) {
    CotangentElement c{qvec_from_json(e.at("x")), qvec_from_json(e.at("xi"))};
    if (c.x.size() != c.xi.size()) throw Error("point and covector dimensions differ");
    p.push_back(std::move(c));
  }
  return p;
}

nlohmann::json to_json(const SumPolarizationReport& r) {
  auto pts = [](const std::vector<QVec>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& x : v) a.push_back(qvec_json(x));
    return a;
  };
  return {{"precondition", r.precondition},
          {"precondition_detail", r.precondition_detail},
          {"nonzero_sum", r.nonzero_sum},
          {"maxA_eq_maxB_cap_maxC", r.maxA_eq_maxB_cap_maxC},
          {"sum_strictly_polarized", r.sum_strictly_polarized},
          {"maxA", pts(r.maxA)},
          {"maxB", pts(r.maxB)},
          {"maxC", pts(r.maxC)}};
}

// ---------------------------------------------------------------------------
// Cone cells

namespace {

constexpr double kGuard = 1e-9;

bool close(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > kGuard * (1 + std::abs(a[i]))) return false;
  return true;
}

// xi = c g for some real c (sign >0 required when positive).
bool parallel(std::span<const double> xi, std::span<const double> g, bool positive) {
  double gg = 0, xg = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    gg += g[i] * g[i];
    xg += xi[i] * g[i];
  }
  if (gg == 0) return false;
  double c = xg / gg, res = 0;
  for (std::size_t i = 0; i < g.size(); ++i) res += std::pow(xi[i] - c * g[i], 2);
  if (std::sqrt(res) > 1e-9 * norm2(xi)) return false;
  return !positive || c > 0;
}


}  // namespace

double nnls(const std::vector<std::vector<double>>& generators, std::span<const double> xi,
            std::vector<double>* coeffs) {
  // Lawson-Hanson active set.
  const Eigen::Index m = static_cast<Eigen::Index>(xi.size());
  const Eigen::Index n = static_cast<Eigen::Index>(generators.size());
  Eigen::MatrixXd A(m, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) A(i, j) = generators[j][i];
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) b(i) = xi[i];
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(n, false);
  const double tol = 1e-13 * std::max(1.0, A.cwiseAbs().maxCoeff()) * std::max(1.0, b.norm());
  for (int outer = 0; outer < 3 * n + 3; ++outer) {
    Eigen::VectorXd w = A.transpose() * (b - A * x);
    Eigen::Index best = -1;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[j] && w(j) > tol && (best < 0 || w(j) > w(best))) best = j;
    if (best < 0) break;
    passive[best] = true;
    for (int inner = 0; inner < 3 * n + 3; ++inner) {
      std::vector<Eigen::Index> P;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j]) P.push_back(j);
      Eigen::MatrixXd Ap(m, static_cast<Eigen::Index>(P.size()));
      for (std::size_t k = 0; k < P.size(); ++k) Ap.col(static_cast<Eigen::Index>(k)) = A.col(P[k]);
      Eigen::VectorXd z = Ap.completeOrthogonalDecomposition().solve(b);
      bool feasible = true;
      for (Eigen::Index k = 0; k < z.size(); ++k) feasible = feasible && z(k) > 0;
      if (feasible) {
        x.setZero();
        for (std::size_t k = 0; k < P.size(); ++k) x(P[k]) = z(static_cast<Eigen::Index>(k));
        break;
      }
      double alpha = 1.0;
      for (std::size_t k = 0; k < P.size(); ++k) {
        double zk = z(static_cast<Eigen::Index>(k));
        if (zk <= 0) alpha = std::min(alpha, x(P[k]) / (x(P[k]) - zk));
      }
      for (std::size_t k = 0; k < P.size(); ++k) {
        x(P[k]) += alpha * (z(static_cast<Eigen::Index>(k)) - x(P[k]));
        if (x(P[k]) <= tol) {
          x(P[k]) = 0;
          passive[P[k]] = false;
        }
      }
    }
  }
  if (coeffs) coeffs->assign(x.data(), x.data() + n);
  return (A * x - b).norm();
}

ConeCell ConeCell::empty_cell(std::size_t n) {
  ConeCell c;
  c.dim = n;
  return c;
}

ConeCell ConeCell::diagonal(std::size_t m) {
  ConeCell c;
  c.dim = 2 * m;
  c.base = BaseKind::Diagonal;
  c.rule = FiberRule::Conormal;
  return c;
}

ConeCell ConeCell::origin(std::size_t n) {
  ConeCell c;
  c.dim = n;
  c.base = BaseKind::Origin;
  c.rule = FiberRule::Conormal;
  return c;
}

ConeCell ConeCell::light_cone(std::size_t n) {
  ConeCell c;
  c.dim = n;
  c.base = BaseKind::LightCone;
  c.rule = FiberRule::Conormal;
  return c;
}

ConeCell ConeCell::gradient_rays(const std::string& entry) {
  ConeCell c;
  c.dim = catalog_entry(entry).dim;
  c.base = BaseKind::ZeroSet;
  c.rule = FiberRule::GradientRays;
  c.function = entry;
  return c;
}

ConeCell ConeCell::plus_i0_time(std::size_t n) {
  ConeCell c;
  c.dim = n + 1;
  c.base = BaseKind::TimeZero;
  c.rule = FiberRule::PositiveTime;
  return c;
}

ConeCell ConeCell::graph_conormal(const std::string& entry) {
  ConeCell c;
  c.dim = catalog_entry(entry).dim + 1;
  c.base = BaseKind::Graph;
  c.rule = FiberRule::Conormal;
  c.function = entry;
  return c;
}

ConeCell ConeCell::points(std::size_t n, std::vector<Fiber> fibers) {
  for (const auto& f : fibers) {
    if (f.x.size() != n) throw Error("fiber base point has the wrong dimension");
    for (const auto& cone : f.cones)
      for (const auto& g : cone)
        if (g.size() != n) throw Error("generator has the wrong dimension");
  }
  ConeCell c;
  c.dim = n;
  c.base = fibers.empty() ? BaseKind::Empty : BaseKind::Points;
  c.rule = fibers.empty() ? FiberRule::None : FiberRule::Generators;
  c.fibers = std::move(fibers);
  return c;
}

bool ConeCell::contains(std::span<const double> x, std::span<const double> xi) const {
  if (x.size() != dim || xi.size() != dim) throw Error("cotangent element has the wrong dimension");
  const double nxi = norm2(xi);
  if (nxi <= kGuard) return false;
  switch (base) {
    case BaseKind::Empty:
    case BaseKind::FullSpace:
      return false;
    case BaseKind::Diagonal: {
      std::size_t m = dim / 2;
      for (std::size_t i = 0; i < m; ++i)
        if (std::abs(x[i] - x[m + i]) > kGuard || std::abs(xi[i] + xi[m + i]) > kGuard * nxi) return false;
      return true;
    }
    case BaseKind::Origin:
      return norm2(x) <= kGuard;
    case BaseKind::LightCone: {
      double q = x[0] * x[0];
      for (std::size_t i = 1; i < dim; ++i) q -= x[i] * x[i];
      if (std::abs(q) > kGuard * (1 + norm2(x) * norm2(x))) return false;
      if (norm2(x) <= kGuard) return true;
      std::vector<double> g(dim);
      g[0] = x[0];
      for (std::size_t i = 1; i < dim; ++i) g[i] = -x[i];
      return parallel(xi, g, false);
    }
    case BaseKind::ZeroSet:
      return lambda_membership(catalog_entry(function), x, xi);
    case BaseKind::Graph: {
      const auto& f = catalog_entry(function);
      auto xs = x.subspan(1);
      if (std::abs(x[0] - f.value(xs)) > kGuard * (1 + std::abs(x[0]))) return false;
      auto df = f.gradient(xs);
      std::vector<double> g(dim);
      g[0] = 1;
      for (std::size_t i = 1; i < dim; ++i) g[i] = -df[i - 1];
      return parallel(xi, g, false);
    }
    case BaseKind::TimeZero: {
      if (std::abs(x[0]) > kGuard || xi[0] <= kGuard * nxi) return false;
      for (std::size_t i = 1; i < dim; ++i)
        if (std::abs(xi[i]) > kGuard * nxi) return false;
      return true;
    }
    case BaseKind::Points:
      for (const auto& f : fibers) {
        if (!close(x, f.x)) continue;
        for (const auto& cone : f.cones)
          if (nnls(cone, xi) <= 1e-9 * nxi) return true;
      }
      return false;
  }
  return false;
}

namespace {

// Some nonzero xi in K1 with -xi in K2: min |G1 c + G2 d| with sum c = 1.
bool cones_meet_opposite(const std::vector<std::vector<double>>& k1, const std::vector<std::vector<double>>& k2) {
  if (k1.empty() || k2.empty()) return false;
  const std::size_t n = k1[0].size();
  const double big = 10.0;
  std::vector<std::vector<double>> gens;
  for (auto g : k1) {
    g.push_back(big);
    gens.push_back(std::move(g));
  }
  for (auto g : k2) {
    g.push_back(0.0);
    gens.push_back(std::move(g));
  }
  std::vector<double> target(n + 1, 0.0);
  target[n] = big;
  std::vector<double> c;
  double res = nnls(gens, target, &c);
  if (res > 1e-7) return false;
  std::vector<double> xi(n, 0.0);
  for (std::size_t j = 0; j < k1.size(); ++j)
    for (std::size_t i = 0; i < n; ++i) xi[i] += c[j] * k1[j][i];
  return norm2(xi) > 1e-7;
}

}  // namespace

bool fiberwise_transverse(const ConeCell& c1, const ConeCell& c2) {
  if (c1.base != BaseKind::Points || c2.base != BaseKind::Points) throw CatalogError("unsupported pair");
  for (const auto& f1 : c1.fibers)
    for (const auto& f2 : c2.fibers) {
      if (!close(f1.x, f2.x)) continue;
      for (const auto& k1 : f1.cones)
        for (const auto& k2 : f2.cones)
          if (cones_meet_opposite(k1, k2)) return false;
    }
  return true;
}

ConeCell hat_plus(const ConeCell& c1, const ConeCell& c2, bool exact) {
  if (c1.dim != c2.dim) throw Error("cone cells live over different base spaces");
  if (c2.empty()) return c1;
  if (c1.empty()) return c2;

  // (t + i0)^lambda with delta(t - f): the tau = 0 part is Lambda_f.
  const ConeCell* time = c1.base == BaseKind::TimeZero ? &c1 : c2.base == BaseKind::TimeZero ? &c2 : nullptr;
  const ConeCell* graph = c1.base == BaseKind::Graph ? &c1 : c2.base == BaseKind::Graph ? &c2 : nullptr;
  if (time && graph && time != graph) return ConeCell::gradient_rays(graph->function);

  if (c1.base == BaseKind::Points && c2.base == BaseKind::Points) {
    if (exact && !fiberwise_transverse(c1, c2)) throw CatalogError("unsupported pair: fibers are not transverse");
    std::vector<ConeCell::Fiber> out = c1.fibers;
    for (const auto& f2 : c2.fibers) {
      auto it = std::find_if(out.begin(), out.end(), [&](const auto& f) { return close(f.x, f2.x); });
      if (it == out.end()) {
        out.push_back(f2);
        continue;
      }
      auto own = it->cones;
      for (const auto& k1 : own)
        for (const auto& k2 : f2.cones) {
          auto sum = k1;
          sum.insert(sum.end(), k2.begin(), k2.end());
          it->cones.push_back(std::move(sum));
        }
      it->cones.insert(it->cones.end(), f2.cones.begin(), f2.cones.end());
    }
    return ConeCell::points(c1.dim, std::move(out));
  }
  throw CatalogError("unsupported pair");
}

// ---------------------------------------------------------------------------
// Lambda_f

bool lambda_membership(const CatalogEntry& f, std::span<const double> x, std::span<const double> xi) {
  if (x.size() != f.dim || xi.size() != f.dim) throw Error("dimension mismatch for '" + f.name + "'");
  if (norm2(xi) <= kGuard) return false;
  return f.lambda_member(x, xi);
}

bool sequence_search_member(const CatalogEntry& f, std::span<const double> x, std::span<const double> xi,
                            const SequenceSearch& opt) {
  const std::size_t n = f.dim;
  if (x.size() != n || xi.size() != n) throw Error("dimension mismatch for '" + f.name + "'");
  const double nxi = norm2(xi);
  if (nxi <= kGuard) return false;
  if (std::abs(f.value(x)) > 1e-9) return false;

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss;
  std::vector<std::vector<double>> dirs;
  for (std::size_t i = 0; i < n; ++i)
    for (double s : {1.0, -1.0}) {
      std::vector<double> d(n, 0.0);
      d[i] = s;
      dirs.push_back(d);
    }
  while (dirs.size() < opt.directions) {
    std::vector<double> d(n);
    for (auto& v : d) v = gauss(rng);
    double nd = norm2(d);
    for (auto& v : d) v /= nd;
    dirs.push_back(d);
  }

  // misalignment of a_k df(x_k) with xi at scale 2^-k, a_k > 0
  auto angle = [&](const std::vector<double>& d, int k) {
    std::vector<double> z(n);
    double r = std::ldexp(1.0, -k);
    for (std::size_t i = 0; i < n; ++i) z[i] = x[i] + r * d[i];
    auto g = f.gradient(z);
    double ng = norm2(g);
    if (ng == 0) return std::numbers::pi;
    double c = 0;
    for (std::size_t i = 0; i < n; ++i) c += g[i] * xi[i];
    return std::acos(std::clamp(c / (ng * nxi), -1.0, 1.0));
  };

  std::vector<double> best_dir = dirs.front();
  double best = angle(best_dir, opt.depth);
  for (const auto& d : dirs) {
    double a = angle(d, opt.depth);
    if (a < best) {
      best = a;
      best_dir = d;
    }
  }
  // local refinement of the best direction
  double step = 0.5;
  for (int it = 0; it < 200 && best > opt.angle_tol * 1e-3; ++it) {
    bool improved = false;
    for (std::size_t i = 0; i < n && !improved; ++i)
      for (double s : {step, -step}) {
        auto d = best_dir;
        d[i] += s;
        double nd = norm2(d);
        if (nd == 0) continue;
        for (auto& v : d) v /= nd;
        double a = angle(d, opt.depth);
        if (a < best) {
          best = a;
          best_dir = d;
          improved = true;
          break;
        }
      }
    if (!improved) step *= 0.5;
    if (step < 1e-12) break;
  }
  // the alignment must persist along the sequence, not only at one scale
  return best <= opt.angle_tol && angle(best_dir, opt.depth - 4) <= 4 * opt.angle_tol + 1e-6;
}

}  // namespace meroren
