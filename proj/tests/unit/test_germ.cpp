#include "meroren/germ.hpp"
#include "meroren/germ_json.hpp"
#include "meroren/germ_parser.hpp"

#include "germ_gen.hpp"

#include <gtest/gtest.h>

using namespace meroren;
using meroren::corpus::all_vars;
using meroren::corpus::random_germ;
using meroren::corpus::random_point;

namespace {

ExactGerm G(const char* text, std::size_t p) { return parse_germ(text, p); }

PoleSet poles(std::initializer_list<std::pair<std::vector<long long>, int>> list) {
  PoleSet s;
  for (const auto& [c, k] : list) s[LinearForm(c)] = k;
  return s;
}

// Independent check of g == sum(parts): evaluate both exactly at random
// Gaussian-rational points, skipping points that hit a pole.
bool agree_pointwise(const ExactGerm& g, const std::vector<ExactGerm>& parts, int trials = 20) {
  std::mt19937_64 rng(7);
  int checked = 0;
  for (int t = 0; t < 10 * trials && checked < trials; ++t) {
    auto x = random_point(rng, g.center());
    try {
      GaussRational lhs = eval_exact(g, x);
      GaussRational rhs = 0;
      for (const auto& part : parts) rhs += eval_exact(part, x);
      if (!(lhs == rhs)) return false;
      ++checked;
    } catch (const PoleError&) {
    }
  }
  return checked == trials;
}

}  // namespace

TEST(LinearForm, CanonicalizationDividesGcdAndFixesSign) {
  auto [f, s] = LinearForm({-2, 4}).canonicalize();
  EXPECT_EQ(f, LinearForm({1, -2}));
  EXPECT_EQ(s, -2);
  EXPECT_THROW(LinearForm({0, 0}).canonicalize(), GermError);
}

TEST(OrthComplement, CoordinateAxis) {
  std::vector<LinearForm> in{LinearForm({1, 0})};
  auto out = orth_complement(in, 2);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], LinearForm({0, 1}));
}

TEST(OrthComplement, Diagonal) {
  std::vector<LinearForm> in{LinearForm({1, 1})};
  auto out = orth_complement(in, 2);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], LinearForm({1, -1}));
}

TEST(OrthComplement, TwoFormsInThreeVariables) {
  // Orthogonality system a = 0, a + b = 0 leaves (0, 0, c).
  std::vector<LinearForm> in{LinearForm({1, 0, 0}), LinearForm({1, 1, 0})};
  auto out = orth_complement(in, 3);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], LinearForm({0, 0, 1}));
}

TEST(OrthComplement, DependentInputRejected) {
  std::vector<LinearForm> in{LinearForm({1, 1}), LinearForm({2, 2})};
  EXPECT_THROW(orth_complement(in, 2), GermError);
}

TEST(Parser, SimplePole) {
  auto g = G("1/(l1)", 1);
  EXPECT_EQ(g.poles(), poles({{{1}, 1}}));
  EXPECT_EQ(g.numerator(), (Polynomial<GaussRational>::constant(1, GaussRational(1))));
}

TEST(Parser, RepeatedFactorBecomesPower) {
  auto g = G("(l1+l2)/(l1*l1)", 2);
  EXPECT_EQ(g.poles(), poles({{{1, 0}, 2}}));
  auto expected = Polynomial<GaussRational>::variable(2, 0) + Polynomial<GaussRational>::variable(2, 1);
  EXPECT_EQ(g.numerator(), expected);
}

TEST(Parser, TwoDistinctForms) {
  auto g = G("1/(l1*(l1+l2))", 2);
  EXPECT_EQ(g.poles(), poles({{{1, 0}, 1}, {{1, 1}, 1}}));
}

TEST(Parser, ScalarInDenominatorMovesToNumerator) {
  auto g = G("1/(2*l1)", 1);
  EXPECT_EQ(g.poles(), poles({{{1}, 1}}));
  EXPECT_EQ(g.numerator().constant_term(), GaussRational(Rational(1, 2)));
}

TEST(Parser, NegativeExponentAndImaginaryUnit) {
  auto g = G("(1+i)*l2^-2", 2);
  EXPECT_EQ(g.poles(), poles({{{0, 1}, 2}}));
  EXPECT_EQ(g.numerator().constant_term(), GaussRational(1, 1));
}

TEST(Parser, Errors) {
  EXPECT_THROW(G("1/(l1*l1+l2*l2)", 2), ParseError);
  EXPECT_THROW(G("1/(l1+1)", 1), ParseError);
  EXPECT_THROW(G("l3", 2), ParseError);
  EXPECT_THROW(G("(l1", 1), ParseError);
  try {
    G("l1 + $", 1);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 5u);
  }
}

TEST(Parser, CanonicalTextRoundTrips) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    auto g = random_germ(rng, 3, all_vars(3), {0, 0, 0});
    auto back = parse_germ(to_text(g), 3);
    EXPECT_TRUE(same_function(g, back)) << to_text(g);
    EXPECT_EQ(simplify(g).poles(), back.poles()) << to_text(g);
  }
}

TEST(ReduceDependent, ThreeFormsInPlane) {
  auto g = G("1/(l1*l2*(l1+l2))", 2);
  auto parts = reduce_dependent(g);
  ASSERT_EQ(parts.size(), 2u);
  std::vector<PoleSet> got{parts[0].poles(), parts[1].poles()};
  std::sort(got.begin(), got.end());
  std::vector<PoleSet> want{poles({{{1, 0}, 1}, {{1, 1}, 2}}), poles({{{0, 1}, 1}, {{1, 1}, 2}})};
  std::sort(want.begin(), want.end());
  EXPECT_EQ(got, want);
  for (const auto& part : parts) EXPECT_TRUE(part.numerator() == (Polynomial<GaussRational>::constant(2, GaussRational(1))));
  EXPECT_TRUE(agree_pointwise(g, parts));
}

TEST(ReduceDependent, IndependentIsUnchanged) {
  auto g = G("1/(l1*l2)", 2);
  auto parts = reduce_dependent(g);
  ASSERT_EQ(parts.size(), 1u);
  EXPECT_EQ(parts[0].poles(), g.poles());
}

TEST(ReduceDependent, ResumsToInput) {
  auto g = G("l2/(l1*(l1+l2))", 2);
  auto parts = reduce_dependent(g);
  EXPECT_TRUE(agree_pointwise(g, parts));
  for (const auto& part : parts) EXPECT_TRUE(linearly_independent(part.pole_forms()));
}

TEST(ReduceDependent, RandomGermsResumAndBecomeIndependent) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 60; ++i) {
    auto g = random_germ(rng, 2, all_vars(2), {0, 0});
    auto parts = reduce_dependent(g);
    for (const auto& part : parts) EXPECT_TRUE(linearly_independent(part.pole_forms()));
    EXPECT_TRUE(agree_pointwise(g, parts)) << to_text(g);
  }
}

namespace {

// Oracle for the projection: f - singular stays bounded along rays into the
// center, sampled at t = 10^-k with exact arithmetic.
bool bounded_difference(const ExactGerm& f, const Decomposition<GaussRational>& d, int rays = 100) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> coord(-9, 9);
  auto sing = singular_germ(d);
  int done = 0;
  for (int r = 0; done < rays && r < 20 * rays; ++r) {
    std::vector<GaussRational> dir;
    for (std::size_t j = 0; j < f.nvars(); ++j) dir.emplace_back(Rational(coord(rng)), Rational(coord(rng)));
    double prev = -1;
    bool ok = true;
    try {
      for (int k = 2; k <= 10; k += 2) {
        Rational t(1, boost::multiprecision::pow(BigInt(10), k));
        std::vector<GaussRational> x;
        for (std::size_t j = 0; j < dir.size(); ++j) x.push_back(GaussRational(f.center()[j]) + dir[j] * GaussRational(t));
        auto diff = eval_exact(f, x) - eval_exact(sing, x);
        double mag = std::abs(diff.to_complex());
        if (prev >= 0 && mag > 2 * prev + 1e-30 && mag > 1e3) ok = false;
        prev = mag;
      }
    } catch (const PoleError&) {
      continue;
    }
    if (!ok) return false;
    ++done;
  }
  return done == rays;
}

}  // namespace

TEST(ProjectPi, PureSimplePoleHasZeroHolomorphicPart) {
  auto g = G("1/(l1)", 1);
  auto d = project_pi(g);
  EXPECT_TRUE(d.holomorphic.is_zero());
  ASSERT_EQ(d.singular.size(), 1u);
}

TEST(ProjectPi, OrthogonalNumeratorGoesToSingularPart) {
  auto g = G("(l1+l2)/l1", 2);
  auto d = project_pi(g);
  EXPECT_EQ(d.holomorphic, (Polynomial<GaussRational>::constant(2, GaussRational(1))));
  ASSERT_EQ(d.singular.size(), 1u);
  EXPECT_EQ(d.singular[0].numerator, Polynomial<GaussRational>::variable(2, 1));
  EXPECT_TRUE(bounded_difference(g, d));
}

TEST(ProjectPi, NonOrthogonalNumeratorIsSplit) {
  auto g = G("l1/(l1+l2)", 2);
  auto d = project_pi(g);
  EXPECT_EQ(d.holomorphic, (Polynomial<GaussRational>::constant(2, GaussRational(Rational(1, 2)))));
  EXPECT_TRUE(bounded_difference(g, d));
  EXPECT_TRUE(orthogonality_holds(d));
}

TEST(ProjectPi, MixedMonomialRecurses) {
  // l1*l2*l3/(l1*l2^2) -> l3/l2: the l1 factor cancels and the rest splits again.
  auto g = G("(l1+l3)*(l2+l3)/(l1*(l2+l1))", 3);
  auto d = project_pi(g);
  EXPECT_TRUE(same_function(reassemble(d), g));
  EXPECT_TRUE(orthogonality_holds(d));
  EXPECT_TRUE(bounded_difference(g, d, 30));
}

TEST(ProjectPi, NonzeroCenter) {
  auto g = parse_germ("(l1+l2)/l1", 2);
  ExactGerm shifted({-1, 2}, g.numerator(), g.poles());
  auto d = project_pi(shifted);
  EXPECT_EQ(d.center, (std::vector<long long>{-1, 2}));
  EXPECT_EQ(d.holomorphic, (Polynomial<GaussRational>::constant(2, GaussRational(1))));
  std::vector<Complex> at{Complex(-1), Complex(2)};
  EXPECT_NEAR(std::abs(eval(holomorphic_germ(d), std::span<const Complex>(at)) - 1.0), 0.0, 1e-15);
}

TEST(ProjectPi, RandomCorpusInvariants) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 40; ++i) {
    auto g = random_germ(rng, 3, all_vars(3), {0, 1, -2});
    auto d = project_pi(g);
    EXPECT_TRUE(same_function(reassemble(d), g)) << to_text(g);
    EXPECT_TRUE(orthogonality_holds(d)) << to_text(g);
    auto again = project_pi(holomorphic_germ(d));
    EXPECT_TRUE(again.singular.empty());
    EXPECT_EQ(again.holomorphic, d.holomorphic);
  }
}

TEST(ProjectPi, ApproximateFieldAgreesWithExact) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 20; ++i) {
    auto g = random_germ(rng, 2, all_vars(2), {0, 0});
    auto approx = ApproxGerm(g.center(), g.numerator().cast<Complex>(), g.poles());
    auto de = project_pi(g);
    auto da = project_pi(approx);
    auto diff = da.holomorphic - de.holomorphic.cast<Complex>();
    EXPECT_LE(diff.max_abs(), 1e-12 * std::max(1.0, de.holomorphic.max_abs()));
    // Evaluation consistency at random points off the poles.
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 20; ++k) {
      std::vector<Complex> lam{Complex(u(rng), u(rng)), Complex(u(rng), u(rng))};
      try {
        Complex whole = eval(approx, std::span<const Complex>(lam));
        Complex parts = eval(da, std::span<const Complex>(lam));
        EXPECT_LE(std::abs(whole - parts), 1e-10 * (1 + std::abs(whole)));
      } catch (const PoleError&) {
      }
    }
  }
}

TEST(Eval, Basics) {
  auto g = G("1/l1", 2);
  std::vector<Complex> a{2.0, 0.0};
  EXPECT_NEAR(std::abs(eval(g, std::span<const Complex>(a)) - 0.5), 0, 1e-16);
  std::vector<Complex> b{0.0, 1.0};
  EXPECT_THROW(eval(g, std::span<const Complex>(b)), PoleError);
  auto d = project_pi(G("(l1+l2)/l1", 2));
  std::vector<Complex> zero{0.0, 0.0};
  EXPECT_EQ(eval(holomorphic_germ(d), std::span<const Complex>(zero)), Complex(1.0));
}

TEST(Ring, MulAddIndependent) {
  auto a = G("1/l1", 2);
  auto b = G("1/l2", 2);
  auto c = G("1/(l1+l2)", 2);
  auto ab = mul(a, b);
  EXPECT_EQ(ab.poles(), poles({{{1, 0}, 1}, {{0, 1}, 1}}));
  EXPECT_TRUE(independent(a, b));
  EXPECT_FALSE(independent(a, c));
  auto z = add(a, a.scaled(GaussRational(-1)));
  EXPECT_TRUE(z.numerator().is_zero());
  EXPECT_TRUE(z.poles().empty());
}

TEST(Ring, FactorizationOnIndependentGerms) {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 30; ++i) {
    auto f = random_germ(rng, 4, {0, 1}, {0, 0, 0, 0});
    auto g = random_germ(rng, 4, {2, 3}, {0, 0, 0, 0});
    ASSERT_TRUE(independent(f, g));
    auto lhs = project_pi(mul(f, g)).holomorphic;
    auto rhs = project_pi(f).holomorphic * project_pi(g).holomorphic;
    EXPECT_EQ(lhs, rhs) << to_text(f) << " * " << to_text(g);
  }
}

TEST(Json, DecompositionRoundTrip) {
  auto d = project_pi(G("(l1+l2)^2/(l1^2*(l1-l2))", 2));
  auto j = to_json(d);
  EXPECT_TRUE(j.contains("singular"));
  auto back = exact_decomposition_from_json(j);
  EXPECT_EQ(back.holomorphic, d.holomorphic);
  EXPECT_TRUE(same_function(reassemble(back), reassemble(d)));
}
