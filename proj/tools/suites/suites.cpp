#include "suites.hpp"

#include "germ_gen.hpp"

#include "meroren/germ_parser.hpp"
#include "meroren/qft.hpp"

#include <fmt/format.h>

#include <functional>
#include <map>
#include <numbers>

namespace meroren::suites {
namespace {

constexpr double kPi = std::numbers::pi;

struct Collector {
  nlohmann::json items = nlohmann::json::array();
  bool pass = true;

  void add(const std::string& name, bool ok, double error, double tol, const std::string& detail = "") {
    pass = pass && ok;
    items.push_back({{"name", name}, {"pass", ok}, {"error", error}, {"tolerance", tol}, {"detail", detail}});
  }
  void add(const CheckReport& r) {
    pass = pass && r.pass;
    items.push_back(to_json(r));
  }
};

std::shared_ptr<TestFunction> bump1(double c, double w, std::vector<double> poly = {1.0}) {
  return std::make_shared<TestFunction>(std::vector<BumpFactor>{{std::move(poly), c, w}});
}

double at(const SmoothFunction& f, double x, int d = 0) {
  double xs[1] = {x};
  int ds[1] = {d};
  return f.derivative(xs, ds);
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

double principal_value(const SmoothFunction& f, double reach) {
  return integrate([&](const QuadNode& n) { return (at(f, n.x) - at(f, -n.x)) / n.x; }, 0.0, reach, 1e-13).value;
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

VertexFunction vbump(double c, double w, std::vector<double> poly = {1.0}) {
  return VertexFunction::cartesian({{std::move(poly), c, w}});
}

VertexFunction vlc(double cu, double wu, double cv, double wv, std::vector<double> pu = {1.0}) {
  return VertexFunction::light_cone({{std::move(pu), cu, wu}, {{1.0}, cv, wv}});
}

double max_singular(const Decomposition<Complex>& d) {
  double m = 0.0;
  for (const auto& t : d.singular) m = std::max(m, t.numerator.max_abs());
  return m;
}

// ---------------------------------------------------------------------------

SuiteResult germ_suite(const SuiteOptions& opt) {
  using namespace corpus;
  std::mt19937_64 rng(opt.seed);
  std::size_t fails[5] = {0, 0, 0, 0, 0};  // reassembly, idempotence, linearity, identity, orthogonality
  const std::size_t corpus_size = 200;
  const std::size_t p = 3;
  for (std::size_t i = 0; i < corpus_size; ++i) {
    auto g = random_germ(rng, p, all_vars(p), {0, 0, 0});
    // Same pole set, independent numerator: pi is linear on each such space.
    ExactGerm h({0, 0, 0}, random_polynomial(rng, p, all_vars(p), 2, 3), g.poles());
    auto d = project_pi(g);
    if (!same_function(reassemble(d), g)) ++fails[0];
    auto again = project_pi(holomorphic_germ(d));
    if (!again.singular.empty() || !(again.holomorphic == d.holomorphic)) ++fails[1];
    GaussRational c(small_rational(rng), small_rational(rng));
    auto lin = project_pi(add(g, h.scaled(c))).holomorphic;
    if (!(lin == d.holomorphic + project_pi(h).holomorphic * Polynomial<GaussRational>::constant(p, c))) ++fails[2];
    ExactGerm entire({0, 0, 0}, random_polynomial(rng, p, all_vars(p), 3, 4), {});
    auto de = project_pi(entire);
    if (!de.singular.empty() || !(de.holomorphic == entire.numerator())) ++fails[3];
    if (!orthogonality_holds(d)) ++fails[4];
  }
  std::size_t fact_fail = 0;
  const std::size_t pairs = 100;
  for (std::size_t i = 0; i < pairs; ++i) {
    auto f = random_germ(rng, 4, {0, 1}, {0, 0, 0, 0});
    auto g = random_germ(rng, 4, {2, 3}, {0, 0, 0, 0});
    if (!(project_pi(mul(f, g)).holomorphic == project_pi(f).holomorphic * project_pi(g).holomorphic)) ++fact_fail;
  }
  Collector c;
  const char* names[5] = {"reassembly", "idempotence", "linearity", "identity-on-holomorphic", "orthogonality"};
  for (int k = 0; k < 5; ++k)
    c.add(names[k], fails[k] == 0, static_cast<double>(fails[k]), 0.0, fmt::format("{} germs", corpus_size));
  c.add("factorization", fact_fail == 0, static_cast<double>(fact_fail), 0.0, fmt::format("{} pairs", pairs));
  std::size_t total = fails[0] + fails[1] + fails[2] + fails[3] + fails[4] + fact_fail;
  return {"germ", c.pass,
          fmt::format("{} germs x 5 invariants, {} factorization pairs, {} failures", corpus_size, pairs, total),
          c.items};
}

SuiteResult laurent_suite(const SuiteOptions&) {
  Collector c;
  auto coeff = [](const NumericGerm& g, Monomial m) {
    auto it = g.germ.numerator().terms().find(m);
    return it == g.germ.numerator().terms().end() ? Complex(0) : it->second;
  };
  const double tol = 1e-10;
  {
    auto g = laurent_extract([](std::span<const Complex> l) { return 1.0 / l[0]; }, {0},
                             {{LinearForm(std::vector<long long>{1}), 1}});
    double err = std::abs(coeff(g, {0}) - 1.0);
    for (const auto& [m, v] : g.germ.numerator().terms())
      if (m[0] > 0) err = std::max(err, std::abs(v));
    c.add("1/lambda", err <= tol, err, tol);
  }
  {
    QuadratureConfig cfg;
    cfg.extra_order = 8;
    auto g = laurent_extract([](std::span<const Complex> l) { return std::exp(l[0]); }, {0}, {}, cfg);
    double err = 0.0;
    for (int k = 0; k <= 8; ++k) err = std::max(err, std::abs(coeff(g, {k}) - 1.0 / factorial(k)));
    c.add("exp", err <= tol, err, tol);
  }
  {
    PoleSet poles{{LinearForm(std::vector<long long>{1, 0}), 1}, {LinearForm(std::vector<long long>{0, 1}), 1}};
    auto g = laurent_extract(
        [](std::span<const Complex> l) { return 1.0 / (l[0] * l[1]) + std::exp(l[0] + 2.0 * l[1]); }, {0, 0}, poles);
    // Cleared: 1 + l1 l2 exp(l1 + 2 l2).
    double err = 0.0;
    for (int a = 0; a <= 4; ++a)
      for (int b = 0; a + b <= 4; ++b) {
        double want = (a >= 1 && b >= 1) ? std::pow(2.0, b - 1) / (factorial(a - 1) * factorial(b - 1)) : 0.0;
        if (a == 0 && b == 0) want = 1.0;
        err = std::max(err, std::abs(coeff(g, {a, b}) - want));
      }
    c.add("1/(l1 l2) + exp(l1 + 2 l2)", err <= tol, err, tol);
  }
  {
    auto phi = bump1(0.1, 0.9, {1.0, 0.3});
    HyperPairing h(phi, {1});
    bool rejected = false;
    std::string detail;
    try {
      laurent_extract([&](std::span<const Complex> l) { return h(l); }, {-1}, {});
    } catch (const ExtractionError& e) {
      rejected = true;
      detail = e.what();
    }
    c.add("wrong pole lattice rejected", rejected, 0.0, 0.0, detail.substr(0, 120));
  }
  return {"laurent", c.pass, "known-germ recovery <= 1e-10; missing pole detected", c.items};
}

SuiteResult residues_suite(const SuiteOptions&) {
  Collector c;
  auto phi = bump1(0.2, 1.0, {1.0, 0.6, -0.4, 0.25});
  HyperPairing h(phi, {1});
  const double tol = 1e-6;
  double worst = 0.0;
  for (int k = 1; k <= 4; ++k) {
    Complex r = residue([&](std::span<const Complex> l) { return h(l); }, -k);
    // (-1)^{k-1} delta^{(k-1)}(phi) / (k-1)! = phi^{(k-1)}(0) / (k-1)!.
    double target = at(*phi, 0.0, k - 1) / factorial(k - 1);
    double err = std::abs(r - target);
    worst = std::max(worst, err);
    c.add(fmt::format("Res x_+^lambda at -{}", k), err <= tol, err, tol);
  }
  auto psi = bump1(0.2, 1.0, {1.0, 0.5, -0.3});
  PowerPairing pp({{"x", {0}}}, psi);
  auto f = [&](std::span<const Complex> l) { return pp(l); };
  double res = std::abs(residue(f, -1));
  c.add("(x + i0)^lambda regular at -1", res <= 1e-10, res, 1e-10);
  Complex oracle(principal_value(*psi, 1.2), -kPi * at(*psi, 0.0));
  Complex mean = 0.0;
  for (int k = 0; k < 16; ++k) {
    Complex l[1] = {-1.0 + std::polar(1e-2, 2 * kPi * k / 16)};
    mean += pp(l);
  }
  mean /= 16.0;
  double err = std::abs(mean - oracle);
  c.add("(x + i0)^-1 against p.v. - i pi phi(0)", err <= tol, err, tol);
  auto rv = renormalize(request("x", -1, psi)).value;
  err = std::abs(rv - oracle);
  c.add("R_pi (x + i0)^-1 against the excision oracle", err <= tol, err, tol);
  return {"residues", c.pass, fmt::format("k = 1..4 worst residue error {:.2e}", worst), c.items};
}

SuiteResult extension_suite(const SuiteOptions&) {
  Collector c;
  std::vector<std::pair<std::string, std::shared_ptr<const SmoothFunction>>> cases{
      {"x", bump1(-1.5, 0.5, {1.0, 0.2})},
      {"x2", bump1(1.4, 0.6)},
      {"uv", std::make_shared<TestFunction>(TestFunction::bump({-1.5, 1.1}, {0.5, 0.6}))},
      {"minkowski2", std::make_shared<TestFunction>(TestFunction::bump({2.0, 0.2}, {0.4, 0.5}))},
      {"monomial:1,2", std::make_shared<TestFunction>(TestFunction::bump({1.3, -1.4}, {0.3, 0.5}))}};
  double worst = 0.0;
  for (const auto& [name, phi] : cases)
    for (long long k : {-1, -2}) {
      double tol = catalog_entry(name).dim == 1 ? 1e-6 : 1e-5;
      auto rep = check_extension(request(name, k, phi), tol);
      rep.name = fmt::format("{} k={}", name, k);
      worst = std::max(worst, rep.error);
      c.add(rep);
    }
  return {"extension", c.pass, fmt::format("{} cases, worst error {:.2e}", c.items.size(), worst), c.items};
}

SuiteResult tensor_suite(const SuiteOptions&) {
  Collector c;
  auto pa = bump1(0.15, 1.0, {1.0, 0.4}), pb = bump1(-0.1, 0.8, {1.0, -0.3});
  // Every ordered pair of one-dimensional entries; each entry appears with
  // both exponents.
  struct Case {
    std::string fa;
    long long ka;
    std::string fb;
    long long kb;
  };
  double worst = 0.0;
  for (const auto& k : {Case{"x", -1, "x", -2}, Case{"x", -2, "x2", -1}, Case{"x2", -2, "x", -1},
                        Case{"x2", -1, "x2", -2}}) {
    auto rep = check_tensor_factorization(request(k.fa, k.ka, pa), request(k.fb, k.kb, pb), 1e-5);
    rep.name = fmt::format("{}^{} x {}^{}", k.fa, k.ka, k.fb, k.kb);
    worst = std::max(worst, rep.error);
    c.add(rep);
  }
  return {"tensor", c.pass, fmt::format("{} pairs, worst relative error {:.2e}", c.items.size(), worst), c.items};
}

SuiteResult polarization_suite(const SuiteOptions& opt) {
  Collector c;
  const std::size_t cases = 10000;
  std::string summary;
  for (std::size_t d : {1u, 2u}) {
    CausalSite s{d};
    auto b = run_polarization_batch(s, cases, opt.seed, true);
    c.add(fmt::format("1+{}d admissible: nonzero sum", d), b.nonzero_sum_failures == 0,
          static_cast<double>(b.nonzero_sum_failures), 0.0, fmt::format("{} cases", b.cases));
    c.add(fmt::format("1+{}d admissible: max A = max B cap max C", d), b.max_identity_failures == 0,
          static_cast<double>(b.max_identity_failures), 0.0, fmt::format("{} cases", b.cases));
    auto neg = run_polarization_batch(s, 2000, opt.seed + 1, false);
    c.add(fmt::format("1+{}d inadmissible controls find a counterexample", d), !neg.counterexamples.empty(),
          static_cast<double>(neg.nonzero_sum_failures), 0.0,
          fmt::format("{} of {} controls violate nonzero sum", neg.nonzero_sum_failures, neg.cases));
    // Informational: with zero covectors the max identity is not implied.
    auto deg = run_polarization_batch(s, 2000, opt.seed + 2, true, PolarizationSampler::degenerate());
    c.items.push_back({{"name", fmt::format("1+{}d degenerate corpus (informational)", d)},
                       {"pass", deg.nonzero_sum_failures == 0},
                       {"cases", deg.cases},
                       {"nonzero_sum_failures", deg.nonzero_sum_failures},
                       {"max_identity_failures", deg.max_identity_failures},
                       {"strict_sum_failures", deg.strict_sum_failures}});
    c.pass = c.pass && deg.nonzero_sum_failures == 0;
    summary += fmt::format("{}1+{}d: {} admissible ok, {} control violations; degenerate max-identity failures {}/{}",
                           summary.empty() ? "" : "; ", d, b.cases - b.max_identity_failures - b.nonzero_sum_failures,
                           neg.nonzero_sum_failures, deg.max_identity_failures, deg.cases);
  }
  return {"polarization", c.pass, summary, c.items};
}

SuiteResult synge_suite(const SuiteOptions& opt) {
  Collector c;
  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<int> num(-60, 60), den(1, 12);
  for (int d : {1, 2}) {
    Spacetime s{d};
    std::size_t bad = 0;
    for (int k = 0; k < 100; ++k) {
      QVec x(s.dim()), y(s.dim());
      for (auto& v : x) v = Rational(num(rng), den(rng));
      for (auto& v : y) v = Rational(num(rng), den(rng));
      if (synge_identity_defect(s, x, y) != 0) ++bad;
    }
    c.add(fmt::format("d={}: g(dGamma, dGamma) = 4 Gamma", d), bad == 0, static_cast<double>(bad), 0.0,
          "100 rational point pairs, exact arithmetic");
  }
  return {"synge", c.pass, "200 rational point pairs, zero defect", c.items};
}

AmplitudeSpec four_vertex_spec() {
  AmplitudeSpec spec;
  spec.n = 4;
  spec.edges[{0, 1}] = 1;
  spec.edges[{2, 3}] = 1;
  spec.edges[{0, 2}] = 1;
  return spec;
}

SuiteResult qft_d1_suite(const SuiteOptions&) {
  Collector c;
  Spacetime s{1};
  auto spec = four_vertex_spec();
  std::vector<VertexFunction> phi{vbump(-1.5, 0.6, {1.0, 0.3}), vbump(-1.3, 0.7), vbump(1.4, 0.5),
                                  vbump(1.2, 0.8, {1.0, -0.2})};
  auto rep = check_qft_factorization(s, PropagatorModel{}, spec, {0, 1}, phi, {}, 1e-4);
  rep.name = "d=1 n=4 edges 01,23,02 I={0,1}";
  c.add(rep);
  return {"qft-factorization-d1", c.pass, fmt::format("two-route relative error {:.2e} (tol 1e-4)", rep.error),
          c.items};
}

SuiteResult qft_d2_suite(const SuiteOptions& opt) {
  Collector c;
  Spacetime s{2};
  auto spec = four_vertex_spec();
  std::vector<VertexFunction> phi{vlc(-1.5, 0.5, -1.5, 0.5), vlc(-1.2, 0.6, -1.6, 0.6, {1.0, 0.3}),
                                  vlc(1.5, 0.5, 1.4, 0.6), vlc(1.3, 0.7, 1.6, 0.5)};
  AmplitudeOptions o;
  o.seed = opt.seed;
  auto rep = check_qft_factorization(s, PropagatorModel{}, spec, {0, 1}, phi, o);
  rep.name = "d=2 n=4 Monte Carlo, independent samples";
  c.add(rep);
  return {"qft-factorization-d2", c.pass,
          fmt::format("|difference| {:.2e} vs 3 sigma {:.2e}", rep.error, rep.tolerance), c.items};
}

SuiteResult covariance_suite(const SuiteOptions&) {
  Collector c;
  Spacetime s{2};
  auto spec = AmplitudeSpec::two_point(1);
  std::vector<VertexFunction> phi{vlc(0.1, 1.0, -0.1, 0.9, {1.0, 0.2}), vlc(-0.2, 0.8, 0.3, 1.1)};
  auto t = check_covariance(s, PropagatorModel{}, spec, phi, Isometry::translation({1.0, 0.0}), {}, 1e-12);
  t.name = "translation (1, 0), d=2";
  c.add(t);
  Spacetime s1{1};
  std::vector<VertexFunction> p1{vbump(0.1, 1.0, {1.0, 0.3}), vbump(-0.2, 0.8)};
  auto t1 = check_covariance(s1, PropagatorModel{}, AmplitudeSpec::two_point(2), p1, Isometry::translation({0.5}), {},
                             1e-12);
  t1.name = "translation 1/2, d=1, n12=2";
  c.add(t1);
  auto b = check_covariance(s, PropagatorModel{}, spec, phi, Isometry::boost(0.5), {}, 1e-8);
  b.name = "boost rapidity 0.5, d=2";
  c.add(b);
  return {"covariance", c.pass,
          fmt::format("translation {:.1e}, boost(0.5) {:.1e} relative", std::max(t.error, t1.error), b.error),
          c.items};
}

SuiteResult holomorphy_suite(const SuiteOptions&) {
  Collector c;
  Spacetime s1{1};
  AmplitudeSpec tri;
  tri.n = 3;
  tri.edges[{0, 1}] = 1;
  tri.edges[{1, 2}] = 2;
  tri.edges[{0, 2}] = 1;
  std::vector<VertexFunction> phi{vbump(-1.5, 0.4, {1.0, 0.3}), vbump(0.0, 0.5), vbump(1.5, 0.4)};
  PoleSet decl;
  for (std::size_t i = 0; i < 3; ++i) decl[LinearForm::coordinate(3, i)] = 1;
  auto g = amplitude_germ(s1, PropagatorModel{}, tri, phi, decl);
  double m = max_singular(project_pi(g.germ));
  c.add("d=1 triangle, declared simple poles", m <= 1e-8 * g.scale, m, 1e-8 * g.scale);

  Spacetime s2{2};
  std::vector<VertexFunction> p2{vlc(-1.5, 0.5, -1.5, 0.5), vlc(1.5, 0.5, 1.4, 0.6, {1.0, 0.2})};
  PoleSet d2;
  d2[LinearForm::coordinate(1, 0)] = 2;
  AmplitudeOptions o;
  o.route = Route::OffCone;
  auto g2 = amplitude_germ(s2, PropagatorModel{1.0, 0.0, 0.3}, AmplitudeSpec::two_point(1), p2, d2, o);
  double m2 = max_singular(project_pi(g2.germ));
  c.add("d=2 two-point, declared double pole", m2 <= 1e-8 * g2.scale, m2, 1e-8 * g2.scale);
  return {"holomorphy", c.pass, fmt::format("singular parts {:.1e}, {:.1e} (relative to scale)", m / g.scale, m2 / g2.scale),
          c.items};
}

SuiteResult feynman_suite(const SuiteOptions& opt) {
  Collector c;
  for (int d : {1, 2}) {
    auto r = feynman_relation_check(Spacetime{d}, PropagatorModel{}, 1000, opt.seed);
    c.add(fmt::format("d={} Feynman relation", d), r.pass,
          static_cast<double>(r.failures + r.reversed_accepted), 0.0, r.detail);
  }
  return {"feynman", c.pass, "sampled Lambda_2 and diagonal conormal", c.items};
}

const std::map<std::string, std::function<SuiteResult(const SuiteOptions&)>>& registry() {
  static const std::map<std::string, std::function<SuiteResult(const SuiteOptions&)>> r{
      {"germ", germ_suite},
      {"laurent", laurent_suite},
      {"residues", residues_suite},
      {"extension", extension_suite},
      {"tensor", tensor_suite},
      {"polarization", polarization_suite},
      {"synge", synge_suite},
      {"qft-factorization-d1", qft_d1_suite},
      {"qft-factorization-d2", qft_d2_suite},
      {"covariance", covariance_suite},
      {"holomorphy", holomorphy_suite},
      {"feynman", feynman_suite}};
  return r;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"germ",       "laurent",     "residues",
                                              "extension",  "tensor",      "polarization",
                                              "synge",      "qft-factorization-d1", "qft-factorization-d2",
                                              "covariance", "holomorphy",  "feynman"};
  return names;
}

bool has_suite(const std::string& name) { return registry().count(name) > 0; }

SuiteResult run_suite(const std::string& name, const SuiteOptions& opt) {
  auto it = registry().find(name);
  if (it == registry().end()) throw Error("unknown check suite '" + name + "'");
  SuiteResult r = it->second(opt);
  r.report = {{"suite", r.name}, {"pass", r.pass}, {"summary", r.summary}, {"checks", r.report}};
  return r;
}

}  // namespace meroren::suites
