#include "meroren/qft.hpp"

#include "qft_internal.hpp"

#include <tbb/parallel_for.h>

#include <cmath>
#include <mutex>
#include <nlohmann/json.hpp>
#include <numbers>
#include <random>

namespace meroren {

using namespace qft_detail;

namespace {

constexpr double kPi = std::numbers::pi;

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// sum_k C(m, k) U^k W^{m-k} (Gamma + i0)^{m lambda - k}; V = 0.
std::vector<std::pair<int, double>> power_terms(const PropagatorModel& model, int m) {
  std::vector<std::pair<int, double>> out;
  for (int k = 0; k <= m; ++k) {
    double c = binomial(m, k) * std::pow(model.U, k) * std::pow(model.W, m - k);
    if (c != 0.0) out.emplace_back(k, c);
  }
  return out;
}

bool boxes_disjoint(const Box& a, const Box& b) {
  for (std::size_t i = 0; i < a.lo.size(); ++i)
    if (a.hi[i] < b.lo[i] || b.hi[i] < a.lo[i]) return true;
  return false;
}

struct BlockInfo {
  std::size_t outer = 0;
  std::optional<std::size_t> inner;
  int m = 0;
  int var = -1;  // lambda index of the internal edge
};

using Key = std::pair<double, double>;
Key key_of(Complex z) { return {z.real(), z.imag()}; }

// lambda -> values at the outer points of the continued inner integral
// A(x; lambda) = int G_lambda^m(x, y) phi_inner(y) dy, and its R_pi value.
class BlockFactor {
 public:
  BlockFactor(const Spacetime& s, const PropagatorModel& model, const BlockInfo& b,
              std::vector<BumpFactor> inner, std::vector<std::vector<double>> points, const QuadratureConfig& cfg)
      : s_(s), model_(model), b_(b), inner_(std::move(inner)), points_(std::move(points)) {
    if (!b_.inner) return;
    if (b_.m == 0) {
      constant_ = s_.d == 2 ? 0.5 : 1.0;
      for (const auto& f : inner_) {
        auto [lo, hi] = factor_range(f);
        constant_ *= integrate([&](const QuadNode& n) { return f.derivative(n.x, 0); }, lo, hi, 1e-14).value;
      }
      return;
    }
    // One half-line pairing per point, axis and side: h(r) = f(x_a - s r).
    for (const auto& x : points_) {
      auto coords = coordinates(x);
      std::vector<std::unique_ptr<HyperPairing>> row;
      for (std::size_t a = 0; a < inner_.size(); ++a)
        for (int sg : {1, -1}) {
          auto h = std::make_shared<TestFunction>(
              std::vector<BumpFactor>{compose_affine(inner_[a], -static_cast<double>(sg), coords[a])});
          row.push_back(std::make_unique<HyperPairing>(h, std::vector<int>{1}, cfg));
        }
      pairings_.push_back(std::move(row));
    }
  }

  const std::vector<Complex>& at(Complex lambda) {
    Key k = key_of(lambda);
    {
      std::lock_guard lock(mutex_);
      auto it = cache_.find(k);
      if (it != cache_.end()) return *it->second;
    }
    auto vals = std::make_unique<std::vector<Complex>>(points_.size(), 1.0);
    if (b_.inner && b_.m == 0) std::fill(vals->begin(), vals->end(), Complex(constant_));
    if (b_.inner && b_.m > 0) {
      tbb::parallel_for(std::size_t{0}, points_.size(), [&](std::size_t i) { (*vals)[i] = continued(i, lambda); });
    }
    std::lock_guard lock(mutex_);
    auto [it, fresh] = cache_.emplace(k, std::move(vals));
    return *it->second;
  }

  std::vector<Complex> renormalized() const {
    std::vector<Complex> out(points_.size(), 1.0);
    if (!b_.inner) return out;
    if (b_.m == 0) {
      std::fill(out.begin(), out.end(), Complex(constant_));
      return out;
    }
    tbb::parallel_for(std::size_t{0}, points_.size(), [&](std::size_t i) { out[i] = finite_part(points_[i]); });
    return out;
  }

  const std::vector<std::vector<double>>& points() const { return points_; }

 private:
  std::vector<double> coordinates(const std::vector<double>& x) const {
    if (s_.d == 1) return x;
    return {x[0] - x[1], x[0] + x[1]};
  }

  Complex continued(std::size_t i, Complex lambda) const {
    const auto& row = pairings_[i];
    Complex total = 0.0;
    for (const auto& [k, c] : power_terms(model_, b_.m)) {
      Complex mu = static_cast<double>(b_.m) * lambda - static_cast<double>(k);
      if (s_.d == 1) {
        Complex nu[1] = {2.0 * mu};
        total += c * ((*row[0])(nu) + (*row[1])(nu));
      } else {
        Complex a[1] = {mu};
        Complex pp = (*row[0])(a), pm = (*row[1])(a), qp = (*row[2])(a), qm = (*row[3])(a);
        Complex ph = std::exp(Complex(0.0, kPi) * mu);
        total += 0.5 * c * (pp * qp + pm * qm + ph * (pp * qm + pm * qp));
      }
    }
    return total;
  }

  // Constant Laurent coefficient of the same expression at lambda = 0.
  Complex finite_part(const std::vector<double>& x) const {
    auto coords = coordinates(x);
    Complex total = 0.0;
    for (const auto& [k, c] : power_terms(model_, b_.m)) {
      if (s_.d == 1) {
        auto p = halfline_laurent(inner_[0], coords[0], 1, -2 * k, 1);
        auto q = halfline_laurent(inner_[0], coords[0], -1, -2 * k, 1);
        total += c * (p[1] + q[1]);
        continue;
      }
      // Series index i <-> eps^{i-1}.
      std::array<std::vector<Complex>, 2> P{halfline_laurent(inner_[0], coords[0], 1, -k, 1),
                                            halfline_laurent(inner_[0], coords[0], -1, -k, 1)};
      std::array<std::vector<Complex>, 2> Q{halfline_laurent(inner_[1], coords[1], 1, -k, 1),
                                            halfline_laurent(inner_[1], coords[1], -1, -k, 1)};
      double sign = k % 2 == 0 ? 1.0 : -1.0;
      std::array<Complex, 3> phase{sign, sign * Complex(0.0, kPi), sign * Complex(0.0, kPi) * Complex(0.0, kPi) / 2.0};
      Complex a0 = 0.0;
      for (int su = 0; su < 2; ++su)
        for (int sv = 0; sv < 2; ++sv)
          for (int i = -1; i <= 1; ++i)
            for (int j = -1; j <= 1; ++j) {
              int l = -i - j;
              if (l < 0 || l > 2) continue;
              Complex h = su == sv ? (l == 0 ? Complex(1.0) : Complex(0.0)) : phase[static_cast<std::size_t>(l)];
              a0 += P[static_cast<std::size_t>(su)][static_cast<std::size_t>(i + 1)] *
                    Q[static_cast<std::size_t>(sv)][static_cast<std::size_t>(j + 1)] * h;
            }
      total += 0.5 * c * a0;
    }
    return total;
  }

  Spacetime s_;
  PropagatorModel model_;
  BlockInfo b_;
  std::vector<BumpFactor> inner_;
  std::vector<std::vector<double>> points_;
  double constant_ = 1.0;
  std::vector<std::vector<std::unique_ptr<HyperPairing>>> pairings_;
  std::mutex mutex_;
  std::map<Key, std::unique_ptr<std::vector<Complex>>> cache_;
};

struct OuterRule {
  std::vector<std::vector<double>> xa, xb;  // points
  std::vector<double> wa, wb;               // weights incl. the outer vertex functions
  bool tensor = true;                       // otherwise paired samples
};

OuterRule tensor_rule(const VertexFunction& fa, const VertexFunction& fb, int level) {
  OuterRule r;
  auto fill = [&](const VertexFunction& f, auto& xs, auto& ws) {
    Box b = f.support();
    for (const auto& n : tanh_sinh_nodes(b.lo[0], b.hi[0], level)) {
      double x[1] = {n.x};
      double v = f(x) * n.weight;
      if (v == 0.0) continue;
      xs.push_back({n.x});
      ws.push_back(v);
    }
  };
  fill(fa, r.xa, r.wa);
  fill(fb, r.xb, r.wb);
  return r;
}

OuterRule sample_rule(const VertexFunction& fa, const VertexFunction& fb, std::size_t n, std::uint64_t seed) {
  OuterRule r;
  r.tensor = false;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U01(0.0, 1.0);
  Box ba = fa.support(), bb = fb.support();
  double va = 1.0, vb = 1.0;
  for (std::size_t i = 0; i < ba.lo.size(); ++i) {
    va *= ba.hi[i] - ba.lo[i];
    vb *= bb.hi[i] - bb.lo[i];
  }
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<double> x(ba.lo.size()), y(bb.lo.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = ba.lo[i] + (ba.hi[i] - ba.lo[i]) * U01(rng);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = bb.lo[i] + (bb.hi[i] - bb.lo[i]) * U01(rng);
    r.wa.push_back(va * fa(x));
    r.wb.push_back(vb * fb(y));
    r.xa.push_back(std::move(x));
    r.xb.push_back(std::move(y));
  }
  return r;
}

// Cross propagator G_{lambda_c}^{m_c} between the outer points: base and log.
struct CrossKernel {
  std::vector<Complex> base, logs;
  int m = 0;
  std::mutex mutex;
  std::map<Key, std::unique_ptr<std::vector<Complex>>> cache;

  const std::vector<Complex>& at(Complex lambda) {
    Key k = key_of(lambda);
    {
      std::lock_guard lock(mutex);
      auto it = cache.find(k);
      if (it != cache.end()) return *it->second;
    }
    auto v = std::make_unique<std::vector<Complex>>(base.size());
    for (std::size_t i = 0; i < base.size(); ++i)
      (*v)[i] = m == 0 ? base[i] : base[i] * std::exp(static_cast<double>(m) * lambda * logs[i]);
    std::lock_guard lock(mutex);
    auto [it, fresh] = cache.emplace(k, std::move(v));
    return *it->second;
  }
};

void fill_kernel(const Spacetime& s, const PropagatorModel& model, const OuterRule& r, int m, CrossKernel& K) {
  K.m = m;
  auto pair = [&](const std::vector<double>& x, const std::vector<double>& y, double w) {
    if (w == 0.0 || m == 0) {
      K.base.push_back(w);
      K.logs.push_back(0.0);
      return;
    }
    double g = synge(s, x, y).value;
    K.base.push_back(w * model.power(g, 0.0, m));
    K.logs.push_back(log_i0(g));
  };
  if (r.tensor) {
    for (std::size_t i = 0; i < r.xa.size(); ++i)
      for (std::size_t j = 0; j < r.xb.size(); ++j) pair(r.xa[i], r.xb[j], r.wa[i] * r.wb[j]);
  } else {
    for (std::size_t i = 0; i < r.xa.size(); ++i) pair(r.xa[i], r.xb[i], r.wa[i] * r.wb[i]);
  }
}

Complex contract(const OuterRule& r, const std::vector<Complex>& K, const std::vector<Complex>& a,
                 const std::vector<Complex>& b, std::size_t from = 0, std::size_t to = SIZE_MAX) {
  Complex acc = 0.0;
  if (r.tensor) {
    const std::size_t nb = r.xb.size();
    for (std::size_t i = 0; i < r.xa.size(); ++i) {
      Complex row = 0.0;
      for (std::size_t j = 0; j < nb; ++j) row += K[i * nb + j] * b[j];
      acc += a[i] * row;
    }
    return acc;
  }
  to = std::min(to, r.xa.size());
  for (std::size_t i = from; i < to; ++i) acc += K[i] * a[i] * b[i];
  return acc / static_cast<double>(to - from);
}

}  // namespace

CheckReport check_qft_factorization(const Spacetime& s, const PropagatorModel& model, const AmplitudeSpec& spec,
                                    const std::vector<std::size_t>& I, const std::vector<VertexFunction>& phi,
                                    const AmplitudeOptions& opt, double tol) {
  CheckReport rep;
  rep.name = "qft-factorization";
  rep.tolerance = tol;
  s.validate();
  spec.validate();
  if (phi.size() != spec.n) throw Error("one vertex function per vertex is required");
  std::vector<bool> in(spec.n, false);
  for (auto i : I) {
    if (i >= spec.n) throw Error("block index out of range");
    in[i] = true;
  }
  std::vector<std::size_t> A, B;
  for (std::size_t i = 0; i < spec.n; ++i) (in[i] ? A : B).push_back(i);
  if (A.empty() || B.empty()) throw Error("I must be a proper nonempty subset");
  auto fail = [&](std::string d) {
    rep.detail = std::move(d);
    return rep;
  };
  if (A.size() > 2 || B.size() > 2) return fail("unsupported: blocks of at most two vertices");
  if (model.V != 0.0) return fail("precondition violated: V = 0 required");
  for (auto i : A)
    for (auto j : B)
      if (!boxes_disjoint(phi[i].support(), phi[j].support()))
        return fail("precondition violated: supp Phi not in C_I");

  auto edges = spec.edge_list();
  auto var_of = [&](std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    for (std::size_t e = 0; e < edges.size(); ++e)
      if (edges[e] == std::make_pair(i, j)) return static_cast<int>(e);
    return -1;
  };
  auto touches_cross = [&](std::size_t v, const std::vector<std::size_t>& other) {
    for (auto w : other)
      if (spec.multiplicity(v, w) > 0) return true;
    return false;
  };
  auto make_block = [&](const std::vector<std::size_t>& V, const std::vector<std::size_t>& other,
                        BlockInfo& b) -> bool {
    if (V.size() == 1) {
      b.outer = V[0];
      return true;
    }
    bool t0 = touches_cross(V[0], other), t1 = touches_cross(V[1], other);
    if (t0 && t1) return false;
    b.inner = t1 ? V[0] : V[1];
    b.outer = t1 ? V[1] : V[0];
    b.m = spec.multiplicity(V[0], V[1]);
    b.var = var_of(V[0], V[1]);
    return true;
  };
  BlockInfo ba, bb;
  if (!make_block(A, B, ba) || !make_block(B, A, bb))
    return fail("unsupported: both vertices of a block carry cross edges");
  const int mc = spec.multiplicity(ba.outer, bb.outer);
  const int vc = var_of(ba.outer, bb.outer);
  if (mc > 0) {
    AmplitudeSpec cross;
    cross.n = spec.n;
    cross.edges[{std::min(ba.outer, bb.outer), std::max(ba.outer, bb.outer)}] = mc;
    if (!off_cone(s, cross, phi)) return fail("precondition violated: cross propagator meets the light cone");
  }
  Matrix F = coordinate_frame(s);
  auto inner_factors = [&](const BlockInfo& b) -> std::optional<std::vector<BumpFactor>> {
    if (!b.inner) return std::vector<BumpFactor>{};
    return phi[*b.inner].separable_in(F);
  };
  auto fa = inner_factors(ba), fb = inner_factors(bb);
  if (!fa || !fb) return fail("precondition violated: inner vertex functions must be separable in the frame");

  const bool mc_route = s.d == 2;
  const std::size_t N = opt.factorization_samples;
  OuterRule left = mc_route ? sample_rule(phi[ba.outer], phi[bb.outer], N, opt.seed)
                            : tensor_rule(phi[ba.outer], phi[bb.outer], 6);
  OuterRule right = mc_route && opt.independent_samples ? sample_rule(phi[ba.outer], phi[bb.outer], N, opt.seed ^ 0xA5A5A5A5DEADBEEFULL)
                             : left;

  // Left: germ of the full amplitude in every lambda, then R_pi.
  auto block_a = std::make_shared<BlockFactor>(s, model, ba, *fa, left.xa, opt.cfg);
  auto block_b = std::make_shared<BlockFactor>(s, model, bb, *fb, left.xb, opt.cfg);
  auto kernel = std::make_shared<CrossKernel>();
  fill_kernel(s, model, left, mc, *kernel);

  const std::size_t p = edges.size();
  PoleSet poles;
  double radius = 0.25;
  for (const BlockInfo* b : {&ba, &bb}) {
    if (b->var < 0) continue;
    bool pole = false;
    for (const auto& [k, c] : power_terms(model, b->m)) pole = pole || k >= 1;
    if (s.d == 2 && pole) poles[LinearForm::coordinate(p, static_cast<std::size_t>(b->var))] = 2;
    radius = std::min(radius, (s.d == 1 ? 0.125 : 0.25) / b->m);
  }
  QuadratureConfig cfg = opt.cfg;
  if (!cfg.contour_radius) cfg.contour_radius = radius;

  auto value_of = [&](std::size_t from, std::size_t to) {
    auto f = [&, from, to](std::span<const Complex> l) {
      Complex la = ba.var >= 0 ? l[static_cast<std::size_t>(ba.var)] : Complex(0.0);
      Complex lb = bb.var >= 0 ? l[static_cast<std::size_t>(bb.var)] : Complex(0.0);
      Complex lc = vc >= 0 ? l[static_cast<std::size_t>(vc)] : Complex(0.0);
      return contract(left, kernel->at(lc), block_a->at(la), block_b->at(lb), from, to);
    };
    auto g = laurent_extract(f, std::vector<long long>(p, 0), poles, cfg);
    return holomorphic_value_at_center(project_pi(g.germ));
  };

  double se_left = 0.0, se_right = 0.0;
  if (!mc_route) {
    rep.lhs = value_of(0, SIZE_MAX);
  } else {
    const std::size_t batches = 20;
    std::vector<Complex> vals;
    for (std::size_t b = 0; b < batches; ++b) vals.push_back(value_of(b * N / batches, (b + 1) * N / batches));
    Complex mean = 0.0;
    for (auto v : vals) mean += v;
    mean /= static_cast<double>(batches);
    double var = 0.0;
    for (auto v : vals) var += std::norm(v - mean);
    se_left = std::sqrt(var / (batches - 1) / batches);
    rep.lhs = mean;
  }

  // Right: finite parts of the blocks times the cross propagator at lambda = 0.
  BlockFactor ra(s, model, ba, *fa, right.xa, opt.cfg), rb(s, model, bb, *fb, right.xb, opt.cfg);
  auto Ra = ra.renormalized(), Rb = rb.renormalized();
  CrossKernel k0;
  fill_kernel(s, model, right, mc, k0);
  if (!mc_route) {
    rep.rhs = contract(right, k0.base, Ra, Rb);
  } else {
    Complex sum = 0.0;
    double sum2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      Complex v = k0.base[i] * Ra[i] * Rb[i];
      sum += v;
      sum2 += std::norm(v);
    }
    Complex mean = sum / static_cast<double>(N);
    se_right = std::sqrt(std::max(0.0, sum2 / N - std::norm(mean)) / (N - 1.0));
    rep.rhs = mean;
  }

  if (!mc_route || !opt.independent_samples) {
    rep.error = std::abs(rep.lhs - rep.rhs) / std::max(std::abs(rep.rhs), 1e-300);
    rep.pass = rep.error <= tol;
    rep.detail = "relative |left - right|";
  } else {
    double bound = 3.0 * std::hypot(se_left, se_right);
    rep.error = std::abs(rep.lhs - rep.rhs);
    rep.tolerance = bound;
    rep.pass = rep.error <= bound;
    rep.detail = "|left - right| vs 3 sqrt(se_l^2 + se_r^2); se_l = " + std::to_string(se_left) +
                 ", se_r = " + std::to_string(se_right);
  }
  return rep;
}

CheckReport check_covariance(const Spacetime& s, const PropagatorModel& model, const AmplitudeSpec& spec,
                             const std::vector<VertexFunction>& phi, const Isometry& g, const AmplitudeOptions& opt,
                             double tol) {
  CheckReport rep;
  rep.name = "covariance";
  rep.tolerance = tol;
  std::vector<VertexFunction> moved;
  for (const auto& p : phi) moved.push_back(push_forward(p, g));
  rep.lhs = renormalize_amplitude(s, model, spec, phi, opt).value;
  rep.rhs = renormalize_amplitude(s, model, spec, moved, opt).value;
  rep.error = std::abs(rep.lhs - rep.rhs) / std::max(std::abs(rep.lhs), 1e-300);
  rep.pass = rep.error <= tol;
  rep.detail = "relative |R(phi) - R(phi o g^-1)|";
  return rep;
}

// ---------------------------------------------------------------------------
// Feynman relation

bool is_feynman_element(const Spacetime& s, const QVec& x, const QVec& y, const QVec& xi, const QVec& eta) {
  const std::size_t n = s.dim();
  if (x.size() != n || y.size() != n || xi.size() != n || eta.size() != n) throw Error("dimension mismatch");
  bool zero = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (xi[i] != -eta[i]) return false;
    zero = zero && xi[i] == 0;
  }
  if (zero) return false;
  if (x == y) return true;  // conormal of the diagonal
  if (synge(s, x, y).value != 0) return false;
  // xi parallel to (y - x)^flat
  QVec flat(n);
  for (std::size_t i = 0; i < n; ++i) flat[i] = (i == 0 ? 1 : -1) * (y[i] - x[i]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (xi[i] * flat[j] != xi[j] * flat[i]) return false;
  CausalSite site = s.site();
  if (causal_less(site, x, y)) return in_forward_cone(eta, true);
  if (causal_less(site, y, x)) {
    QVec neg(n);
    for (std::size_t i = 0; i < n; ++i) neg[i] = -eta[i];
    return in_forward_cone(neg, true);
  }
  return false;
}

FeynmanReport feynman_relation_check(const Spacetime& s, const PropagatorModel& model, std::size_t samples,
                                     std::uint64_t seed) {
  s.validate();
  FeynmanReport rep;
  if (model.U == 0.0 && model.V == 0.0) {
    rep.pass = true;
    rep.detail = "constant propagator: empty wave front set";
    return rep;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coord(-6, 6), den(1, 4), pos(1, 5);
  auto rational = [&] { return Rational(coord(rng), den(rng)); };
  const std::size_t n = s.dim();
  CausalSite site = s.site();
  for (std::size_t c = 0; c < samples; ++c) {
    QVec x(n), y(n);
    for (auto& v : x) v = rational();
    bool diagonal = s.d == 1 || c % 2 == 0;
    Rational a(pos(rng), den(rng));
    QVec xi(n), eta(n);
    if (diagonal) {
      y = x;
      do
        for (auto& v : xi) v = rational();
      while (std::all_of(xi.begin(), xi.end(), [](const Rational& r) { return r == 0; }));
      for (std::size_t i = 0; i < n; ++i) eta[i] = -xi[i];
    } else {
      Rational t = rational();
      if (t == 0) t = 1;
      int dir = pos(rng) % 2 == 0 ? 1 : -1;
      y = {x[0] + t, x[1] + dir * t};
      auto g = synge(s, x, y);
      for (std::size_t i = 0; i < n; ++i) {
        xi[i] = a * g.dx[i];
        eta[i] = a * g.dy[i];
      }
    }
    ++rep.cases;
    PolarizedConfig cfg{{x, xi}, {y, eta}};
    bool ok = is_feynman_element(s, x, y, xi, eta) && is_polarized(site, cfg, !diagonal);
    if (!ok) ++rep.failures;
    // a < 0: reversed orientation (off the diagonal), or a non-conormal pair on it.
    QVec rxi(n), reta(n);
    for (std::size_t i = 0; i < n; ++i) {
      rxi[i] = diagonal ? xi[i] : -xi[i];
      reta[i] = diagonal ? xi[i] : -eta[i];
    }
    PolarizedConfig rcfg{{x, rxi}, {y, reta}};
    bool accepted = diagonal ? is_feynman_element(s, x, y, rxi, reta)
                             : is_feynman_element(s, x, y, rxi, reta) || is_polarized(site, rcfg, true);
    if (accepted) ++rep.reversed_accepted;
  }
  rep.pass = rep.failures == 0 && rep.reversed_accepted == 0;
  rep.detail = std::to_string(rep.cases) + " elements, " + std::to_string(rep.failures) + " rejected, " +
               std::to_string(rep.reversed_accepted) + " reversed accepted";
  return rep;
}

// ---------------------------------------------------------------------------
// Regions C_I

bool RegionCover::contains(const std::vector<std::size_t>& I, const std::vector<std::vector<double>>& config) const {
  std::vector<bool> in(n, false);
  for (auto i : I) in.at(i) = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (in[i] && !in[j] && config[i] == config[j]) return false;
  return true;
}

bool RegionCover::covered(const std::vector<std::vector<double>>& config) const {
  for (const auto& I : subsets)
    if (contains(I, config)) return true;
  return false;
}

RegionCover cover_regions(std::size_t n) {
  if (n < 2 || n > 20) throw Error("cover_regions: n out of range");
  RegionCover c;
  c.n = n;
  for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
    std::vector<std::size_t> I;
    for (std::size_t i = 0; i < n; ++i)
      if ((mask >> i) & 1) I.push_back(i);
    c.subsets.push_back(std::move(I));
  }
  return c;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const AmplitudeValue& v) {
  nlohmann::json j{{"value", {v.value.real(), v.value.imag()}}, {"route", to_string(v.route)}};
  if (v.monte_carlo) j["stderr"] = v.error;
  else j["error"] = v.error;
  return j;
}

AmplitudeSpec amplitude_spec_from_json(const nlohmann::json& j) {
  AmplitudeSpec s;
  s.n = j.at("n").get<std::size_t>();
  for (const auto& e : j.at("edges")) {
    auto i = e.at(0).get<std::size_t>(), k = e.at(1).get<std::size_t>();
    if (i > k) std::swap(i, k);
    s.edges[{i, k}] = e.at(2).get<int>();
  }
  s.validate();
  return s;
}

VertexFunction vertex_function_from_json(const nlohmann::json& j, const Spacetime& s) {
  std::vector<BumpFactor> f;
  for (const auto& b : j.at("factors")) {
    BumpFactor bf;
    bf.center = b.at("center").get<double>();
    bf.half_width = b.at("half_width").get<double>();
    if (b.contains("poly")) bf.poly = b.at("poly").get<std::vector<double>>();
    f.push_back(std::move(bf));
  }
  std::string frame = j.value("frame", "cartesian");
  VertexFunction v;
  if (frame == "light_cone") v = VertexFunction::light_cone(std::move(f));
  else if (frame == "cartesian") v = VertexFunction::cartesian(std::move(f));
  else throw Error("unknown frame: " + frame);
  if (v.dim() != s.dim()) throw Error("vertex function dimension mismatch");
  return v;
}

}  // namespace meroren
