#include "meroren/microlocal.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

using namespace meroren;

namespace {

QVec q(std::initializer_list<long long> v) {
  QVec r;
  for (auto x : v) r.emplace_back(x);
  return r;
}

const CausalSite k11{1};
const CausalSite k12{2};

}  // namespace

TEST(Causal, Examples) {
  EXPECT_TRUE(causal_leq(k11, q({0, 0}), q({1, 0})));
  EXPECT_FALSE(causal_leq(k11, q({0, 0}), q({0, 1})));
  EXPECT_TRUE(causal_leq(k11, q({3, 2}), q({3, 2})));
  EXPECT_TRUE(causal_leq(k11, q({0, 0}), q({1, 1})));  // null
  EXPECT_FALSE(causal_leq(k11, q({1, 0}), q({0, 0})));
}

TEST(Causal, OrderAxiomsOnRationalPoints) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> num(-6, 6), den(1, 3);
  auto point = [&](std::size_t n) {
    QVec v;
    for (std::size_t i = 0; i < n; ++i) v.emplace_back(num(rng), den(rng));
    return v;
  };
  for (const auto& s : {k11, k12}) {
    for (int t = 0; t < 3000; ++t) {
      auto x = point(s.dim()), y = point(s.dim()), z = point(s.dim());
      EXPECT_TRUE(causal_leq(s, x, x));
      if (causal_leq(s, x, y) && causal_leq(s, y, z)) EXPECT_TRUE(causal_leq(s, x, z));
      if (causal_leq(s, x, y) && causal_leq(s, y, x)) EXPECT_EQ(x, y);
    }
  }
}

TEST(Cone, ForwardMembership) {
  EXPECT_TRUE(in_forward_cone(q({1, 0}), true));
  EXPECT_TRUE(in_forward_cone(q({1, 1}), true));
  EXPECT_FALSE(in_forward_cone(q({1, 2}), false));
  EXPECT_FALSE(in_forward_cone(q({-1, 0}), false));
  EXPECT_TRUE(in_forward_cone(q({0, 0}), false));
  EXPECT_FALSE(in_forward_cone(q({0, 0}), true));
  std::vector<double> null{1.0, 1.0 + 1e-12};
  EXPECT_TRUE(in_forward_cone(null, true));  // guard band keeps the null ray
}

TEST(Trace, Examples) {
  auto a = q({0, 0});
  auto xi = q({1, 2});
  auto t = trace({{a, xi}, {a, q({-1, -2})}});
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].xi, q({0, 0}));
  t = trace({{a, xi}});
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].xi, xi);
  EXPECT_TRUE(trace({{a, q({0, 0})}}).empty());
}

TEST(Polarized, Examples) {
  auto a = q({0, 0});
  std::vector<CotangentElement> fwd{{a, q({2, 1})}}, zero{{a, q({0, 0})}}, past{{a, q({-2, 1})}};
  EXPECT_TRUE(is_reduced_polarized(k11, fwd, false));
  EXPECT_TRUE(is_reduced_polarized(k11, fwd, true));
  EXPECT_TRUE(is_reduced_polarized(k11, zero, false));
  EXPECT_FALSE(is_reduced_polarized(k11, zero, true));
  EXPECT_FALSE(is_reduced_polarized(k11, past, false));
  // only maximal points are constrained
  std::vector<CotangentElement> chain{{q({0, 0}), q({-2, 1})}, {q({1, 0}), q({1, 0})}};
  EXPECT_TRUE(is_reduced_polarized(k11, chain, true));
}

TEST(Polarized, ConormalOfDiagonal) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> c(-4, 4);
  auto cell = ConeCell::diagonal(2);
  for (int t = 0; t < 200; ++t) {
    QVec a = q({c(rng), c(rng)}), xi = q({c(rng), c(rng)});
    if (xi == q({0, 0})) continue;
    PolarizedConfig p{{a, xi}, {a, q({-xi[0].convert_to<long long>(), -xi[1].convert_to<long long>()})}};
    auto tr = trace(p);
    ASSERT_EQ(tr.size(), 1u);
    EXPECT_EQ(tr[0].xi, q({0, 0}));
    EXPECT_TRUE(is_polarized(k11, p, false));
    EXPECT_FALSE(is_polarized(k11, p, true));
    std::vector<double> x{a[0].convert_to<double>(), a[1].convert_to<double>(), a[0].convert_to<double>(),
                          a[1].convert_to<double>()};
    std::vector<double> z{xi[0].convert_to<double>(), xi[1].convert_to<double>(), -xi[0].convert_to<double>(),
                          -xi[1].convert_to<double>()};
    EXPECT_TRUE(cell.contains(x, z));
    z[2] += 1;
    EXPECT_FALSE(cell.contains(x, z));
  }
}

TEST(Polarized, UnionOfPolarizedSets) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    std::vector<PolarizedConfig> g1, g2;
    for (int k = 0; k < 3; ++k) {
      g1.push_back(random_admissible_pair(k11, rng).first);
      g2.push_back(random_admissible_pair(k11, rng).second);
    }
    auto all = g1;
    all.insert(all.end(), g2.begin(), g2.end());
    for (const auto& p : all) EXPECT_TRUE(is_polarized(k11, p, false));
  }
}

TEST(SumPolarization, SingleSharedPoint) {
  auto a = q({0, 0});
  auto r = check_sum_polarization(k11, {{a, q({1, 0})}}, {{a, q({2, 1})}});
  ASSERT_TRUE(r.precondition);
  EXPECT_TRUE(r.nonzero_sum);
  EXPECT_TRUE(r.maxA_eq_maxB_cap_maxC);
  EXPECT_EQ(r.maxA, std::vector<QVec>{a});
  EXPECT_EQ(r.maxB, std::vector<QVec>{a});
  EXPECT_EQ(r.maxC, std::vector<QVec>{a});
}

TEST(SumPolarization, NegatedStrictIsExcluded) {
  PolarizedConfig v{{q({0, 0}), q({1, 0})}, {q({1, 0}), q({2, 1})}};
  PolarizedConfig u = v;
  for (auto& e : u)
    for (auto& c : e.xi) c = -c;
  auto r = check_sum_polarization(k11, u, v);
  EXPECT_FALSE(r.precondition);
  EXPECT_NE(r.precondition_detail.find("trace(u)"), std::string::npos);
}

TEST(SumPolarization, MaxIdentityNeedsCoveredSupport) {
  // b carries u only through a zero covector: B = {a}, C = {a, b}, A = {a, b},
  // with a, b spacelike. The sum is still strictly polarized.
  auto a = q({0, 0}), b = q({0, 1});
  PolarizedConfig u{{a, q({1, 0})}, {b, q({0, 0})}};
  PolarizedConfig v{{a, q({1, 0})}, {b, q({1, 0})}};
  auto r = check_sum_polarization(k11, u, v);
  ASSERT_TRUE(r.precondition);
  EXPECT_TRUE(r.nonzero_sum);
  EXPECT_TRUE(r.sum_strictly_polarized);
  EXPECT_FALSE(r.maxA_eq_maxB_cap_maxC);
  EXPECT_EQ(r.maxA.size(), 2u);
  EXPECT_EQ(r.maxB.size(), 1u);
}

TEST(SumPolarization, RandomAdmissibleBatches) {
  for (const auto& s : {k11, k12}) {
    auto b = run_polarization_batch(s, 5000, 42, true);
    EXPECT_EQ(b.nonzero_sum_failures, 0u) << "d=" << s.d;
    EXPECT_EQ(b.max_identity_failures, 0u) << "d=" << s.d;
    EXPECT_EQ(b.strict_sum_failures, 0u) << "d=" << s.d;
  }
}

TEST(SumPolarization, ZeroCovectorsBreakMaxIdentity) {
  // With zero covectors B and C can differ; the sum stays nonzero but both
  // the identity and strict polarization of the sum can fail.
  for (const auto& s : {k11, k12}) {
    auto b = run_polarization_batch(s, 3000, 5, true, PolarizationSampler::degenerate());
    EXPECT_EQ(b.nonzero_sum_failures, 0u);
    EXPECT_GT(b.max_identity_failures, 0u);
    EXPECT_GT(b.strict_sum_failures, 0u);
  }
}

TEST(SumPolarization, CancellingPairAtMaximalPoint) {
  // u: xi and -xi at the later point b, v vanishes there. A = {a, b} with b
  // maximal and summed covector 0.
  auto a = q({-1, -2}), b = q({0, -1});
  PolarizedConfig u{{a, q({-1, -1})}, {b, q({-3, 2})}, {b, q({3, -2})}};
  PolarizedConfig v{{a, q({2, 2})}, {b, q({0, 0})}, {b, q({0, 0})}};
  auto r = check_sum_polarization(k11, u, v);
  ASSERT_TRUE(r.precondition);
  EXPECT_TRUE(r.nonzero_sum);
  EXPECT_FALSE(r.sum_strictly_polarized);
  EXPECT_FALSE(r.maxA_eq_maxB_cap_maxC);
}

TEST(SumPolarization, NegativeControlFindsCounterexamples) {
  auto b = run_polarization_batch(k11, 2000, 9, false);
  EXPECT_GT(b.nonzero_sum_failures, 0u);
  ASSERT_FALSE(b.counterexamples.empty());
  auto [u, v] = b.counterexamples.front();
  EXPECT_FALSE(is_polarized(k11, v, true));
}

TEST(SumPolarization, Deterministic) {
  auto a = run_polarization_batch(k12, 500, 123, true);
  auto b = run_polarization_batch(k12, 500, 123, true);
  EXPECT_EQ(a.max_identity_failures, b.max_identity_failures);
  ASSERT_EQ(a.counterexamples.size(), b.counterexamples.size());
  for (std::size_t i = 0; i < a.counterexamples.size(); ++i)
    EXPECT_EQ(to_json(a.counterexamples[i].first), to_json(b.counterexamples[i].first));
}

TEST(SumPolarization, JsonRoundTrip) {
  std::mt19937_64 rng(1);
  auto [u, v] = random_admissible_pair(k12, rng);
  auto j = to_json(u);
  auto back = polarized_config_from_json(j);
  EXPECT_EQ(to_json(back), j);
  auto r = to_json(check_sum_polarization(k12, u, v));
  EXPECT_TRUE(r["precondition"].get<bool>());
  auto half = polarized_config_from_json(nlohmann::json::parse(R"([{"x":["1/2",0],"xi":[1,"-1/3"]}])"));
  EXPECT_EQ(half[0].x[0], Rational(1, 2));
}

// ---------------------------------------------------------------------------

TEST(HatPlus, EmptyOperand) {
  auto c = ConeCell::light_cone(2);
  auto r = hat_plus(c, ConeCell::empty_cell(2));
  EXPECT_EQ(r.base, BaseKind::LightCone);
  r = hat_plus(ConeCell::empty_cell(2), c);
  EXPECT_EQ(r.base, BaseKind::LightCone);
}

TEST(HatPlus, TransverseGeneratorCells) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> pos(0.01, 5.0);
  int checked = 0;
  for (int t = 0; t < 300; ++t) {
    std::vector<double> x{g(rng), g(rng)}, g1{g(rng), g(rng)}, g2{g(rng), g(rng)};
    ConeCell c1 = ConeCell::points(2, {{x, {{g1}}}});
    ConeCell c2 = ConeCell::points(2, {{x, {{g2}}}});
    if (!fiberwise_transverse(c1, c2)) continue;
    auto r = hat_plus(c1, c2);
    ++checked;
    // closed form (c1 + c2) u c1 u c2 at sampled covectors
    for (int k = 0; k < 20; ++k) {
      double s = pos(rng), u = pos(rng);
      std::vector<double> sum{s * g1[0] + u * g2[0], s * g1[1] + u * g2[1]};
      EXPECT_TRUE(r.contains(x, sum));
      std::vector<double> ray{s * g1[0], s * g1[1]};
      EXPECT_TRUE(r.contains(x, ray));
      std::vector<double> probe{g(rng), g(rng)};
      std::vector<double> c;
      bool in_sum = nnls({g1, g2}, probe, &c) <= 1e-9 * std::hypot(probe[0], probe[1]);
      EXPECT_EQ(r.contains(x, probe), in_sum);
    }
    std::vector<double> elsewhere{x[0] + 1, x[1]};
    EXPECT_FALSE(r.contains(elsewhere, g1));
  }
  EXPECT_GT(checked, 200);
}

TEST(HatPlus, OpposedFibersNeedSampling) {
  std::vector<double> x{0, 0};
  ConeCell c1 = ConeCell::points(2, {{x, {{{1.0, 0.0}}}}});
  ConeCell c2 = ConeCell::points(2, {{x, {{{-1.0, 0.0}}}}});
  EXPECT_FALSE(fiberwise_transverse(c1, c2));
  EXPECT_THROW(hat_plus(c1, c2), CatalogError);
  auto r = hat_plus(c1, c2, false);
  std::vector<double> back{-3.0, 0.0};
  EXPECT_TRUE(r.contains(x, back));
  EXPECT_THROW(hat_plus(ConeCell::light_cone(2), ConeCell::origin(2)), CatalogError);
}

TEST(HatPlus, TimeDeltaPairGivesGradientRays) {
  for (std::string f : {"x", "x2", "uv"}) {
    auto r = hat_plus(ConeCell::plus_i0_time(catalog_entry(f).dim), ConeCell::graph_conormal(f));
    EXPECT_EQ(r.rule, FiberRule::GradientRays);
    EXPECT_EQ(r.function, f);
  }
  // f = x^2: every nonzero covector at 0, nothing elsewhere
  auto r = hat_plus(ConeCell::graph_conormal("x2"), ConeCell::plus_i0_time(1));
  const auto& e = catalog_entry("x2");
  for (double xi : {-2.0, -0.1, 0.3, 5.0}) {
    std::vector<double> x0{0.0}, x1{0.5}, v{xi};
    EXPECT_TRUE(r.contains(x0, v));
    EXPECT_EQ(sequence_search_member(e, x0, v), true);
    EXPECT_FALSE(r.contains(x1, v));
    EXPECT_FALSE(sequence_search_member(e, x1, v));
  }
}

TEST(HatPlus, InputCellsMembership) {
  auto t = ConeCell::plus_i0_time(1);
  EXPECT_TRUE(t.contains(std::vector<double>{0, 0.3}, std::vector<double>{2, 0}));
  EXPECT_FALSE(t.contains(std::vector<double>{0, 0.3}, std::vector<double>{-2, 0}));
  auto g = ConeCell::graph_conormal("x2");
  // t = x^2 at x = 1: conormal (1, -2)
  EXPECT_TRUE(g.contains(std::vector<double>{1, 1}, std::vector<double>{-1, 2}));
  EXPECT_FALSE(g.contains(std::vector<double>{1, 1}, std::vector<double>{1, 2}));
  auto lc = ConeCell::light_cone(2);
  EXPECT_TRUE(lc.contains(std::vector<double>{1, 1}, std::vector<double>{-1, 1}));
  EXPECT_TRUE(lc.contains(std::vector<double>{0, 0}, std::vector<double>{0.2, 1}));
  EXPECT_FALSE(lc.contains(std::vector<double>{1, 1}, std::vector<double>{1, 1}));
}

// ---------------------------------------------------------------------------

TEST(Lambda, LinearExamples) {
  const auto& f = catalog_entry("x");
  EXPECT_TRUE(lambda_membership(f, std::vector<double>{0}, std::vector<double>{1}));
  EXPECT_FALSE(lambda_membership(f, std::vector<double>{0}, std::vector<double>{-1}));
  EXPECT_FALSE(lambda_membership(f, std::vector<double>{1}, std::vector<double>{1}));
  EXPECT_FALSE(lambda_membership(f, std::vector<double>{0}, std::vector<double>{0}));
}

TEST(Lambda, UvVertexTakesEveryCovector) {
  const auto& f = catalog_entry("uv");
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (int t = 0; t < 50; ++t) {
    std::vector<double> xi{g(rng), g(rng)}, x{0, 0};
    EXPECT_TRUE(lambda_membership(f, x, xi));
    EXPECT_TRUE(sequence_search_member(f, x, xi));
  }
  EXPECT_FALSE(lambda_membership(f, std::vector<double>{0, 0}, std::vector<double>{0, 0}));
}

TEST(Lambda, ZeroCovectorNeverMember) {
  for (std::string name : {"x", "x2", "uv", "minkowski2", "monomial:2,1"}) {
    const auto& f = catalog_entry(name);
    std::vector<double> x(f.dim, 0.0), xi(f.dim, 0.0);
    EXPECT_FALSE(lambda_membership(f, x, xi)) << name;
    EXPECT_FALSE(sequence_search_member(f, x, xi)) << name;
  }
}

namespace {
// random probes sit at the end of the list; axis and gradient probes always count
bool k_random(const std::vector<double>& xi, const std::vector<std::vector<double>>& covs) {
  for (std::size_t i = covs.size() - 4; i < covs.size(); ++i)
    if (&covs[i] == &xi) return true;
  return false;
}
}  // namespace

TEST(Lambda, ExactAgreesWithSequenceSearch) {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.3, 2.0);
  for (std::string name : {"x", "x2", "uv", "minkowski2", "monomial:1,2", "monomial:2,3"}) {
    const auto& f = catalog_entry(name);
    std::vector<std::vector<double>> pts;
    if (f.dim == 1) {
      pts = {{0.0}, {0.7}, {-1.2}};
    } else if (name == "minkowski2") {
      double a = u(rng);
      pts = {{0, 0}, {a, a}, {a, -a}, {-a, a}, {0.5, 0.1}};
    } else {
      double a = u(rng), b = u(rng);
      pts = {{0, 0}, {a, 0}, {-a, 0}, {0, b}, {0, -b}, {a, b}};
    }
    int positives = 0;
    for (const auto& x : pts) {
      std::vector<std::vector<double>> covs;
      for (std::size_t i = 0; i < f.dim; ++i)
        for (double s : {1.0, -1.0}) {
          std::vector<double> e(f.dim, 0.0);
          e[i] = s;
          covs.push_back(e);
        }
      auto df = f.gradient(x);
      covs.push_back(df);
      std::vector<double> minus = df;
      for (auto& v : minus) v = -v;
      covs.push_back(minus);
      for (int k = 0; k < 4; ++k) {
        std::vector<double> r(f.dim);
        for (auto& v : r) v = g(rng);
        covs.push_back(r);
      }
      for (const auto& xi : covs) {
        bool exact = lambda_membership(f, x, xi);
        if (f.dim == 2) {
          // the oracle resolves angles to ~1e-2: skip covectors near the boundary
          bool robust = true;
          for (double th : {-0.05, 0.05}) {
            std::vector<double> r{std::cos(th) * xi[0] - std::sin(th) * xi[1],
                                  std::sin(th) * xi[0] + std::cos(th) * xi[1]};
            robust = robust && lambda_membership(f, x, r) == exact;
          }
          if (!robust && k_random(xi, covs)) continue;
        }
        positives += exact;
        EXPECT_EQ(exact, sequence_search_member(f, x, xi))
            << name << " x=(" << x[0] << (f.dim > 1 ? "," + std::to_string(x[1]) : "") << ") xi=(" << xi[0]
            << (f.dim > 1 ? "," + std::to_string(xi[1]) : "") << ")";
      }
    }
    EXPECT_GT(positives, 0) << name;
  }
}

TEST(Nnls, RecoversConeCoefficients) {
  std::vector<std::vector<double>> gens{{1, 0, 0}, {1, 1, 0}, {0, 1, 1}};
  std::vector<double> xi{2, 3, 1}, c;
  EXPECT_LT(nnls(gens, xi, &c), 1e-12);
  EXPECT_NEAR(c[0], 0.0, 1e-12);
  EXPECT_NEAR(c[1], 2.0, 1e-12);
  EXPECT_NEAR(c[2], 1.0, 1e-12);
  std::vector<double> out{-1, 0, 0};
  EXPECT_NEAR(nnls(gens, out, &c), 1.0, 1e-12);
}
