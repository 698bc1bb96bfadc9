#include "meroren/qft.hpp"

#include "qft_internal.hpp"

#include <tbb/parallel_for.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace meroren {

namespace {
constexpr double kPi = std::numbers::pi;
}  // namespace

// ---------------------------------------------------------------------------
// Geometry

void Spacetime::validate() const {
  if (d != 1 && d != 2) throw Error("spacetime dimension must be 1 or 2");
}

SyngeValue synge(const Spacetime& s, std::span<const double> x, std::span<const double> y) {
  s.validate();
  if (x.size() != s.dim() || y.size() != s.dim()) throw Error("synge: point dimension mismatch");
  SyngeValue r;
  if (s.d == 1) {
    double dl = x[0] - y[0];
    r.value = dl * dl;
    r.dx = {2 * dl};
  } else {
    double d0 = x[0] - y[0], d1 = x[1] - y[1];
    r.value = (d0 - d1) * (d0 + d1);
    r.dx = {2 * d0, -2 * d1};
  }
  for (double v : r.dx) r.dy.push_back(-v);
  return r;
}

SyngeExact synge(const Spacetime& s, const QVec& x, const QVec& y) {
  s.validate();
  if (x.size() != s.dim() || y.size() != s.dim()) throw Error("synge: point dimension mismatch");
  SyngeExact r;
  if (s.d == 1) {
    Rational dl = x[0] - y[0];
    r.value = dl * dl;
    r.dx = {2 * dl};
  } else {
    Rational d0 = x[0] - y[0], d1 = x[1] - y[1];
    r.value = d0 * d0 - d1 * d1;
    r.dx = {2 * d0, -2 * d1};
  }
  for (const auto& v : r.dx) r.dy.push_back(-v);
  return r;
}

Rational synge_identity_defect(const Spacetime& s, const QVec& x, const QVec& y) {
  auto g = synge(s, x, y);
  Rational norm = g.dx[0] * g.dx[0];
  for (std::size_t i = 1; i < g.dx.size(); ++i) norm -= g.dx[i] * g.dx[i];
  return norm - 4 * g.value;
}

Complex PropagatorModel::power(double gamma, Complex lambda, int n) const {
  if (gamma == 0.0) throw PoleError("propagator evaluated on the light cone");
  Complex L = qft_detail::log_i0(gamma);
  Complex G = U * std::exp(-L) + V * L + W;
  return std::pow(G, n) * std::exp(static_cast<double>(n) * lambda * L);
}

std::vector<std::pair<std::size_t, std::size_t>> AmplitudeSpec::edge_list() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& [e, m] : edges)
    if (m > 0) out.push_back(e);
  return out;
}

int AmplitudeSpec::multiplicity(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  auto it = edges.find({i, j});
  return it == edges.end() ? 0 : it->second;
}

void AmplitudeSpec::validate() const {
  if (n < 2) throw Error("amplitude needs at least two vertices");
  bool any = false;
  for (const auto& [e, m] : edges) {
    if (e.first >= e.second || e.second >= n) throw Error("edge (i, j) needs i < j < n");
    if (m < 0) throw Error("edge multiplicities must be nonnegative");
    any = any || m > 0;
  }
  if (!any) throw Error("amplitude needs at least one edge");
}

AmplitudeSpec AmplitudeSpec::two_point(int n12) {
  AmplitudeSpec s;
  s.n = 2;
  s.edges[{0, 1}] = n12;
  return s;
}

// ---------------------------------------------------------------------------
// Vertex functions and isometries

namespace qft_detail {

Complex log_i0(double gamma) {
  return gamma > 0 ? Complex(std::log(gamma), 0.0) : Complex(std::log(-gamma), kPi);
}

Matrix identity(std::size_t n) {
  Matrix m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

Matrix light_cone_frame() { return {{1.0, -1.0}, {1.0, 1.0}}; }

Matrix multiply(const Matrix& a, const Matrix& b) {
  std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
  Matrix r(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l)
      for (std::size_t j = 0; j < m; ++j) r[i][j] += a[i][l] * b[l][j];
  return r;
}

std::vector<double> apply(const Matrix& a, std::span<const double> x) {
  std::vector<double> r(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) r[i] += a[i][j] * x[j];
  return r;
}

Matrix inverse(const Matrix& a) {
  const std::size_t n = a.size();
  Matrix m = a, inv = identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    if (m[piv][c] == 0.0) throw Error("singular matrix");
    std::swap(m[c], m[piv]);
    std::swap(inv[c], inv[piv]);
    double p = m[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      m[c][j] /= p;
      inv[c][j] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || m[r][c] == 0.0) continue;
      double f = m[r][c];
      for (std::size_t j = 0; j < n; ++j) {
        m[r][j] -= f * m[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

double determinant(const Matrix& a) {
  if (a.size() == 1) return a[0][0];
  if (a.size() == 2) return a[0][0] * a[1][1] - a[0][1] * a[1][0];
  throw Error("determinant: dimension above 2");
}

BumpFactor compose_affine(const BumpFactor& f, double a, double b) {
  if (a == 0.0) throw Error("degenerate affine map");
  BumpFactor g;
  g.center = (f.center - b) / a;
  g.half_width = f.half_width / std::abs(a);
  // P(a y + b) by binomial expansion
  std::vector<double> out(f.poly.size(), 0.0);
  for (std::size_t k = 0; k < f.poly.size(); ++k) {
    double binom = 1.0;
    for (std::size_t j = 0; j <= k; ++j) {
      out[j] += f.poly[k] * binom * std::pow(a, static_cast<double>(j)) *
                std::pow(b, static_cast<double>(k - j));
      binom = binom * static_cast<double>(k - j) / static_cast<double>(j + 1);
    }
  }
  g.poly = std::move(out);
  return g;
}

std::pair<double, double> factor_range(const BumpFactor& f) {
  return {f.center - f.half_width, f.center + f.half_width};
}

Box frame_box(const VertexFunction& phi, const Matrix& F) {
  // {x : L x + c in B} mapped by F; extremes at the corners.
  Box b = phi.chi.support();
  Matrix M = multiply(F, inverse(phi.L));
  const std::size_t n = b.lo.size();
  Box out{std::vector<double>(n, INFINITY), std::vector<double>(n, -INFINITY)};
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<double> corner(n);
    for (std::size_t i = 0; i < n; ++i) corner[i] = ((mask >> i) & 1 ? b.hi[i] : b.lo[i]) - phi.c[i];
    auto y = qft_detail::apply(M, corner);
    for (std::size_t i = 0; i < n; ++i) {
      out.lo[i] = std::min(out.lo[i], y[i]);
      out.hi[i] = std::max(out.hi[i], y[i]);
    }
  }
  return out;
}

Matrix coordinate_frame(const Spacetime& s) { return s.d == 2 ? light_cone_frame() : identity(1); }

}  // namespace qft_detail

using namespace qft_detail;

VertexFunction VertexFunction::cartesian(std::vector<BumpFactor> factors) {
  VertexFunction v;
  v.chi = TestFunction(std::move(factors));
  v.L = identity(v.chi.dim());
  v.c.assign(v.chi.dim(), 0.0);
  return v;
}

VertexFunction VertexFunction::light_cone(std::vector<BumpFactor> factors) {
  if (factors.size() != 2) throw Error("light-cone vertex functions need two factors");
  VertexFunction v;
  v.chi = TestFunction(std::move(factors));
  v.L = light_cone_frame();
  v.c.assign(2, 0.0);
  return v;
}

double VertexFunction::operator()(std::span<const double> x) const {
  auto y = qft_detail::apply(L, x);
  double v = 1.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    v *= chi.factors()[i].derivative(y[i] + c[i], 0);
    if (v == 0.0) return 0.0;
  }
  return v;
}

std::shared_ptr<const SmoothFunction> VertexFunction::function() const {
  return std::make_shared<AffinePullback>(std::make_shared<TestFunction>(chi), L, c, 1.0);
}

std::optional<std::vector<BumpFactor>> VertexFunction::separable_in(const Matrix& F) const {
  Matrix M = multiply(L, inverse(F));
  double scale = 0.0;
  for (const auto& row : M)
    for (double v : row) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < M.size(); ++i)
    for (std::size_t j = 0; j < M.size(); ++j)
      if (i != j && std::abs(M[i][j]) > 1e-14 * scale) return std::nullopt;
  std::vector<BumpFactor> out;
  for (std::size_t i = 0; i < M.size(); ++i) out.push_back(compose_affine(chi.factors()[i], M[i][i], c[i]));
  return out;
}

Box VertexFunction::support() const { return frame_box(*this, identity(dim())); }

Isometry Isometry::identity(std::size_t dim) { return {qft_detail::identity(dim), std::vector<double>(dim, 0.0)}; }

Isometry Isometry::translation(std::vector<double> a) {
  Isometry g = identity(a.size());
  g.a = std::move(a);
  return g;
}

Isometry Isometry::boost(double rapidity) {
  double ch = std::cosh(rapidity), sh = std::sinh(rapidity);
  return {{{ch, sh}, {sh, ch}}, {0.0, 0.0}};
}

Isometry Isometry::reflection(std::size_t dim) {
  Isometry g = identity(dim);
  g.Lambda[dim - 1][dim - 1] = -1.0;
  return g;
}

VertexFunction push_forward(const VertexFunction& phi, const Isometry& g) {
  // phi(g^{-1} x) = chi(L Lambda^{-1} x + c - L Lambda^{-1} a)
  VertexFunction out = phi;
  out.L = multiply(phi.L, inverse(g.Lambda));
  auto shift = qft_detail::apply(out.L, g.a);
  for (std::size_t i = 0; i < out.c.size(); ++i) out.c[i] -= shift[i];
  return out;
}

std::string to_string(Route r) {
  switch (r) {
    case Route::Auto: return "auto";
    case Route::Chart: return "chart";
    case Route::Integrable: return "integrable";
    case Route::OffCone: return "off-cone";
  }
  return "auto";
}

Route route_from_string(const std::string& s) {
  if (s == "auto") return Route::Auto;
  if (s == "chart" || s == "a") return Route::Chart;
  if (s == "integrable" || s == "b") return Route::Integrable;
  if (s == "off-cone" || s == "c") return Route::OffCone;
  throw Error("unknown route: " + s);
}

// ---------------------------------------------------------------------------
// Correlations and half-line Laurent series

Correlation1D::Correlation1D(BumpFactor f, BumpFactor g) : f_(std::move(f)), g_(std::move(g)) {}

double Correlation1D::derivative(std::span<const double> x, std::span<const int> d) const {
  const double z = x[0];
  const int k = d[0];
  auto [flo, fhi] = factor_range(f_);
  auto [glo, ghi] = factor_range(g_);
  double lo = std::max(flo - z, glo), hi = std::min(fhi - z, ghi);
  if (!(hi > lo)) return 0.0;
  // High derivatives of the bump cancel strongly; the attainable tolerance grows with k.
  const double tol = k == 0 ? 1e-14 : k <= 2 ? 1e-12 : 1e-10;
  return integrate([&](const QuadNode& n) { return f_.derivative(z + n.x, k) * g_.derivative(n.x, 0); }, lo, hi, tol,
                   14)
      .value;
}

Box Correlation1D::support() const {
  auto [flo, fhi] = factor_range(f_);
  auto [glo, ghi] = factor_range(g_);
  return {{flo - ghi}, {fhi - glo}};
}

std::vector<Breakline> Correlation1D::breaklines() const {
  auto [flo, fhi] = factor_range(f_);
  auto [glo, ghi] = factor_range(g_);
  std::vector<double> at{flo - ghi, fhi - glo, flo - glo, fhi - ghi};
  std::sort(at.begin(), at.end());
  at.erase(std::unique(at.begin(), at.end()), at.end());
  std::vector<Breakline> out;
  for (double a : at) out.push_back({{1.0}, a});
  return out;
}

std::vector<Complex> halfline_laurent(const BumpFactor& f, double x, int sign, int nu0, int order) {
  if (order < 0) throw Error("halfline_laurent: negative order");
  // K integrations by parts, h(r) = f(x - sign r):
  //   int r^nu h = (-1)^K / prod_{m=1..K} (nu + m) * int r^{nu + K} h^{(K)}.
  const int K = std::max(0, -nu0);
  const std::size_t len = static_cast<std::size_t>(order) + 2;  // eps^-1 .. eps^order

  // Prefactor as a series in eps, index a <-> eps^{a - 1}.
  std::vector<double> pre(len + 1, 0.0);
  {
    std::vector<double> ser(len + 1, 0.0);  // prod over m != -nu0 of 1 / (c_m + eps)
    ser[0] = 1.0;
    for (int m = 1; m <= K; ++m) {
      int cm = nu0 + m;
      if (cm == 0) continue;
      std::vector<double> inv(len + 1), next(len + 1, 0.0);
      double p = 1.0 / cm;
      for (std::size_t i = 0; i <= len; ++i, p *= -1.0 / cm) inv[i] = p;
      for (std::size_t i = 0; i <= len; ++i)
        for (std::size_t j = 0; i + j <= len; ++j) next[i + j] += ser[i] * inv[j];
      ser = std::move(next);
    }
    double sg = K % 2 == 0 ? 1.0 : -1.0;
    bool pole = nu0 <= -1;
    for (std::size_t a = 0; a <= len; ++a) {
      // 1 / eps shifts the series by one place.
      std::size_t src = pole ? a : (a == 0 ? len + 1 : a - 1);
      pre[a] = src <= len ? sg * ser[src] : 0.0;
    }
  }

  // I_i = int r^{nu0 + K} log^i r h^{(K)}(r) dr / i!, i = 0..order+1.
  auto [flo, fhi] = factor_range(f);
  double rlo = std::max(0.0, sign > 0 ? x - fhi : flo - x);
  double rhi = sign > 0 ? x - flo : fhi - x;
  std::vector<double> I(len, 0.0);
  if (rhi > rlo) {
    const double dsign = std::pow(-static_cast<double>(sign), K);
    std::vector<double> cuts{rlo, rhi};
    if (rlo < 1.0 && rhi > 1.0) cuts.insert(cuts.begin() + 1, 1.0);
    double ifact = 1.0;
    for (std::size_t i = 0; i < len; ++i) {
      if (i > 0) ifact *= static_cast<double>(i);
      double acc = 0.0;
      for (std::size_t p = 0; p + 1 < cuts.size(); ++p)
        acc += integrate(
                   [&](const QuadNode& n) {
                     double r = n.x;
                     if (!(r > 0.0)) return 0.0;
                     double v = dsign * f.derivative(x - sign * r, K) * std::pow(r, nu0 + K);
                     return i == 0 ? v : v * std::pow(std::log(r), static_cast<double>(i));
                   },
                   cuts[p], cuts[p + 1], 1e-11, 14)
                   .value;
      I[i] = acc / ifact;
    }
  }
  std::vector<Complex> out(len, 0.0);
  for (std::size_t t = 0; t < len; ++t) {
    double acc = 0.0;
    for (std::size_t a = 0; a <= t; ++a) acc += pre[a] * I[t - a];
    out[t] = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Node caches

Complex NodeCache::sum(std::span<const Complex> c, double* stderr_out) const {
  Complex s = 0.0;
  double s2 = 0.0;
  const std::size_t m = base.size();
  for (std::size_t i = 0; i < m; ++i) {
    Complex e = 0.0;
    for (std::size_t k = 0; k < ne; ++k) e += c[k] * logs[i * ne + k];
    Complex v = base[i] * std::exp(e);
    s += v;
    if (mc) s2 += std::norm(v);
  }
  if (!mc) return s;
  double n = static_cast<double>(samples);
  Complex mean = s / n;
  if (stderr_out) {
    double var = std::max(0.0, s2 / n - std::norm(mean));
    *stderr_out = std::sqrt(var / std::max(1.0, n - 1.0));
  }
  return mean;
}

namespace {

// Nested tanh-sinh over u_{sigma(0)} <= u_{sigma(1)} <= ... with every
// singular locus at an interval endpoint; gaps kept to full accuracy.
void build_ordered(const std::vector<BumpFactor>& f, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                   const std::vector<std::size_t>& sigma, int level,
                   const std::function<double(std::span<const double>)>& weight_of_gaps, NodeCache& out) {
  const std::size_t n = f.size();
  std::vector<std::size_t> pos(n);
  for (std::size_t k = 0; k < n; ++k) pos[sigma[k]] = k;
  std::vector<double> gap(n, 0.0), at(n, 0.0), delta(edges.size());

  std::function<void(std::size_t, double)> rec = [&](std::size_t k, double w) {
    if (k == n) {
      for (std::size_t e = 0; e < edges.size(); ++e) {
        std::size_t a = std::min(pos[edges[e].first], pos[edges[e].second]);
        std::size_t b = std::max(pos[edges[e].first], pos[edges[e].second]);
        double d = 0.0;
        for (std::size_t t = a + 1; t <= b; ++t) d += gap[t];
        if (!(d > 0.0)) return;
        delta[e] = d;
      }
      double extra = weight_of_gaps(delta);
      if (extra == 0.0) return;
      out.base.push_back(w * extra);
      for (double d : delta) out.logs.emplace_back(std::log(d), 0.0);
      return;
    }
    std::size_t v = sigma[k];
    auto [lo, hi] = factor_range(f[v]);
    double prev = k == 0 ? -INFINITY : at[k - 1];
    double start = std::max(lo, prev);
    if (!(hi > start)) return;
    for (const auto& nd : tanh_sinh_nodes(start, hi, level)) {
      double fv = f[v].derivative(nd.x, 0);
      if (fv == 0.0 || nd.weight == 0.0) continue;
      at[k] = nd.x;
      gap[k] = k == 0 ? 0.0 : (start - prev) + nd.from_lo;
      rec(k + 1, w * nd.weight * fv);
    }
  };
  rec(0, 1.0);
}

int level_for_budget(std::size_t axes, std::size_t copies, std::size_t budget) {
  int level = 1;
  for (int l = 2; l <= 10; ++l) {
    double per_axis = 8.0 * std::pow(2.0, l) + 1.0;
    if (static_cast<double>(copies) * std::pow(per_axis, static_cast<double>(axes)) > static_cast<double>(budget))
      break;
    level = l;
  }
  return level;
}

// Orderings sigma for which u_{sigma(0)} <= u_{sigma(1)} <= ... can hold on
// the supports of every axis factor list.
std::vector<std::vector<std::size_t>> feasible_orderings(const std::vector<BumpFactor>& f) {
  std::vector<std::size_t> p(f.size());
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<std::size_t>> out;
  do {
    double cur = -INFINITY;
    bool ok = true;
    for (auto v : p) {
      auto [lo, hi] = factor_range(f[v]);
      cur = std::max(cur, lo);
      if (cur >= hi) ok = false;
    }
    if (ok) out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

}  // namespace

// One-dimensional factors per vertex and axis, if the vertex functions
// allow the ordered-region decomposition.
std::optional<std::vector<std::vector<BumpFactor>>> qft_detail::axis_factors(const Spacetime& s,
                                                                             const std::vector<VertexFunction>& phi) {
  std::vector<std::vector<BumpFactor>> axes(s.dim());
  Matrix F = coordinate_frame(s);
  for (const auto& p : phi) {
    auto fac = p.separable_in(F);
    if (!fac) return std::nullopt;
    for (std::size_t a = 0; a < s.dim(); ++a) axes[a].push_back((*fac)[a]);
  }
  return axes;
}

AmplitudeCache qft_detail::build_cache(const Spacetime& s, const PropagatorModel& model, const AmplitudeSpec& spec,
                                       const std::vector<VertexFunction>& phi, std::size_t budget,
                                       std::size_t mc_samples, std::uint64_t seed, int level_offset) {
  AmplitudeCache c;
  c.edges = spec.edge_list();
  for (const auto& e : c.edges) c.mult.push_back(spec.multiplicity(e.first, e.second));
  const std::size_t n = spec.n, ne = c.edges.size();
  auto axes = axis_factors(s, phi);
  bool pure_power = model.V == 0.0 && model.W == 0.0;
  c.kind = !axes || n > 4 || (s.d == 2 && !pure_power) ? AmplitudeCache::Kind::MonteCarlo
           : s.d == 1                                   ? AmplitudeCache::Kind::Ordered1
                                                        : AmplitudeCache::Kind::LightCone;

  if (c.kind == AmplitudeCache::Kind::MonteCarlo) {
    std::vector<Box> boxes;
    double vol = 1.0;
    for (const auto& p : phi) {
      boxes.push_back(p.support());
      for (std::size_t a = 0; a < s.dim(); ++a) vol *= boxes.back().hi[a] - boxes.back().lo[a];
    }
    NodeCache nc;
    nc.ne = ne;
    nc.mc = true;
    nc.samples = mc_samples;
    nc.base.resize(mc_samples);
    nc.logs.resize(mc_samples * ne);
    const std::size_t chunk = 4096;
    tbb::parallel_for(std::size_t{0}, (mc_samples + chunk - 1) / chunk, [&](std::size_t b) {
      std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + b);
      std::uniform_real_distribution<double> U01(0.0, 1.0);
      std::vector<std::vector<double>> x(n, std::vector<double>(s.dim()));
      for (std::size_t i = b * chunk; i < std::min(mc_samples, (b + 1) * chunk); ++i) {
        Complex v = vol;
        for (std::size_t k = 0; k < n; ++k) {
          for (std::size_t a = 0; a < s.dim(); ++a)
            x[k][a] = boxes[k].lo[a] + (boxes[k].hi[a] - boxes[k].lo[a]) * U01(rng);
          v *= phi[k](x[k]);
        }
        for (std::size_t e = 0; e < ne; ++e) {
          double g = synge(s, x[c.edges[e].first], x[c.edges[e].second]).value;
          if (v == 0.0 || g == 0.0) {
            v = 0.0;
            nc.logs[i * ne + e] = 0.0;
            continue;
          }
          v *= model.power(g, 0.0, c.mult[e]);
          nc.logs[i * ne + e] = log_i0(g);
        }
        nc.base[i] = v;
      }
    });
    c.parts.push_back(std::move(nc));
    return c;
  }

  if (c.kind == AmplitudeCache::Kind::Ordered1) {
    auto perms = feasible_orderings((*axes)[0]);
    int level = std::max(1, level_for_budget(n, perms.size(), budget) - level_offset);
    NodeCache nc;
    nc.ne = ne;
    auto weight = [&](std::span<const double> delta) {
      double w = 1.0;
      for (std::size_t e = 0; e < ne; ++e) w *= model.power(delta[e] * delta[e], 0.0, c.mult[e]).real();
      return w;
    };
    for (const auto& sigma : perms) build_ordered((*axes)[0], c.edges, sigma, level, weight, nc);
    c.parts.push_back(std::move(nc));
    return c;
  }

  // Light cone: u and v integrals per ordering, combined with phases.
  std::array<std::vector<std::vector<std::size_t>>, 2> perms{feasible_orderings((*axes)[0]),
                                                             feasible_orderings((*axes)[1])};
  int level = std::max(1, level_for_budget(n, std::max(perms[0].size(), perms[1].size()), budget / 2) - level_offset);
  auto one = [](std::span<const double>) { return 1.0; };
  c.split = perms[0].size();
  for (std::size_t a = 0; a < 2; ++a)
    for (const auto& sigma : perms[a]) {
      NodeCache nc;
      nc.ne = ne;
      build_ordered((*axes)[a], c.edges, sigma, level, one, nc);
      c.parts.push_back(std::move(nc));
      c.orders.push_back(sigma);
    }
  c.prefactor = std::pow(0.5, static_cast<double>(n));
  for (int m : c.mult) c.prefactor *= std::pow(model.U, m);
  return c;
}

Complex AmplitudeCache::operator()(std::span<const Complex> lambda, double* stderr_out) const {
  const std::size_t ne = edges.size();
  std::vector<Complex> coef(ne);
  switch (kind) {
    case Kind::MonteCarlo:
      for (std::size_t e = 0; e < ne; ++e) coef[e] = static_cast<double>(mult[e]) * lambda[e];
      return parts[0].sum(coef, stderr_out);
    case Kind::Ordered1:
      for (std::size_t e = 0; e < ne; ++e) coef[e] = 2.0 * static_cast<double>(mult[e]) * lambda[e];
      return parts[0].sum(coef);
    case Kind::LightCone: break;
  }
  std::vector<Complex> mu(ne), phase(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    mu[e] = static_cast<double>(mult[e]) * (lambda[e] - 1.0);
    phase[e] = std::exp(Complex(0.0, kPi) * mu[e]);
  }
  const std::size_t nu = split, nv = parts.size() - split;
  std::vector<Complex> iu(nu), iv(nv);
  for (std::size_t k = 0; k < nu; ++k) iu[k] = parts[k].sum(mu);
  for (std::size_t k = 0; k < nv; ++k) iv[k] = parts[nu + k].sum(mu);
  Complex total = 0.0;
  if (orders.empty()) return 0.0;
  const std::size_t n = orders[0].size();
  std::vector<std::size_t> pu(n), pv(n);
  for (std::size_t a = 0; a < nu; ++a) {
    if (iu[a] == 0.0) continue;
    for (std::size_t k = 0; k < n; ++k) pu[orders[a][k]] = k;
    for (std::size_t b = 0; b < nv; ++b) {
      if (iv[b] == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) pv[orders[nu + b][k]] = k;
      Complex ph = 1.0;
      for (std::size_t e = 0; e < ne; ++e) {
        bool su = pu[edges[e].first] < pu[edges[e].second];
        bool sv = pv[edges[e].first] < pv[edges[e].second];
        if (su != sv) ph *= phase[e];
      }
      total += ph * iu[a] * iv[b];
    }
  }
  return prefactor * total;
}

// ---------------------------------------------------------------------------
// Validity

bool off_cone(const Spacetime& s, const AmplitudeSpec& spec, const std::vector<VertexFunction>& phi) {
  Matrix F = coordinate_frame(s);
  std::vector<Box> boxes;
  for (const auto& p : phi) boxes.push_back(frame_box(p, F));
  for (const auto& [i, j] : spec.edge_list()) {
    bool away = false;
    for (std::size_t a = 0; a < s.dim(); ++a) {
      double lo = boxes[i].lo[a] - boxes[j].hi[a], hi = boxes[i].hi[a] - boxes[j].lo[a];
      bool excl = lo > 0.0 || hi < 0.0;
      if (s.d == 1) away = excl;
      else if (a == 0) away = excl;
      else away = away && excl;
    }
    if (!away) return false;
  }
  return true;
}

bool in_integrable_region(const AmplitudeSpec& spec, std::span<const Complex> lambda) {
  auto edges = spec.edge_list();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    int m = spec.multiplicity(edges[e].first, edges[e].second);
    if (!(lambda[e].real() > 1.0 - 1.0 / m)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Route (a): the relative-coordinate chart for n = 2

ChartAmplitude::ChartAmplitude(const Spacetime& s, const PropagatorModel& model, const AmplitudeSpec& spec,
                               const std::vector<VertexFunction>& phi, const QuadratureConfig& cfg)
    : model_(model) {
  if (spec.n != 2) throw ValidityError("chart route needs n = 2");
  m_ = spec.multiplicity(0, 1);
  if (s.d == 1) {
    auto f0 = phi[0].separable_in(identity(1)), f1 = phi[1].separable_in(identity(1));
    auto psi = std::make_shared<Correlation1D>((*f0)[0], (*f1)[0]);
    pp_ = std::make_unique<PowerPairing>(std::vector<FactorSpec>{{"x2", {0}}}, psi, cfg);
    lattice_step_ = 0.5;
  } else {
    auto f0 = phi[0].separable_in(light_cone_frame()), f1 = phi[1].separable_in(light_cone_frame());
    if (!f0 || !f1) throw ValidityError("chart route needs light-cone separable vertex functions");
    std::size_t q = 0;
    for (std::size_t a = 0; a < 2; ++a) {
      auto xi = std::make_shared<Correlation1D>((*f0)[a], (*f1)[a]);
      for (int sg : {1, -1}) hp_[q++] = std::make_unique<HyperPairing>(xi, std::vector<int>{sg}, cfg);
    }
    lattice_step_ = 1.0;
  }
  // (U e^{-L} + V L + W)^m = sum C U^k V^j W^{m-k-j} L^j e^{-k L}
  std::vector<double> fact(static_cast<std::size_t>(m_) + 1, 1.0);
  for (int i = 1; i <= m_; ++i) fact[static_cast<std::size_t>(i)] = fact[static_cast<std::size_t>(i) - 1] * i;
  for (int k = 0; k <= m_; ++k)
    for (int j = 0; j + k <= m_; ++j) {
      double c = fact[static_cast<std::size_t>(m_)] /
                 (fact[static_cast<std::size_t>(k)] * fact[static_cast<std::size_t>(j)] *
                  fact[static_cast<std::size_t>(m_ - k - j)]) *
                 std::pow(model.U, k) * std::pow(model.V, j) * std::pow(model.W, m_ - k - j);
      if (c != 0.0) terms_.push_back({k, j, c});
    }
}

Complex ChartAmplitude::base(Complex mu) const {
  Complex a[1] = {mu};
  if (pp_) return (*pp_)(a);
  // dw = du dv / 2, psi = Xi_u Xi_v / 2; Gamma < 0 off the diagonal quadrants.
  Complex up = (*hp_[0])(a), um = (*hp_[1])(a), vp = (*hp_[2])(a), vm = (*hp_[3])(a);
  Complex ph = std::exp(Complex(0.0, kPi) * mu);
  return 0.25 * (up * vp + um * vm + ph * (up * vm + um * vp));
}

Complex ChartAmplitude::pairing(Complex mu, int j) const {
  if (j == 0) return base(mu);
  // Cauchy integral on a circle avoiding the lattice mu in -step * N.
  double dist = INFINITY;
  if (mu.real() < lattice_step_ * 0.5) {
    double kk = std::max(1.0, std::round(-mu.real() / lattice_step_));
    for (double t : {kk - 1, kk, kk + 1})
      if (t >= 1) dist = std::min(dist, std::abs(mu + t * lattice_step_));
  }
  double rho = std::min(0.25, 0.5 * dist);
  if (!(rho > 1e-6)) throw PoleError();
  const int K = 64;
  Complex acc = 0.0;
  for (int q = 0; q < K; ++q) {
    Complex e = std::polar(1.0, 2 * kPi * q / K);
    acc += base(mu + rho * e) / std::pow(e, j);
  }
  double jf = std::tgamma(j + 1.0);
  return acc / static_cast<double>(K) * jf / std::pow(rho, j);
}

Complex ChartAmplitude::operator()(Complex lambda) const {
  Complex total = 0.0;
  for (const auto& t : terms_) total += t.coef * pairing(static_cast<double>(m_) * lambda - static_cast<double>(t.k), t.j);
  return total;
}

PoleSet ChartAmplitude::poles_at_zero() const {
  int order = 0;
  for (const auto& t : terms_) {
    int o = 0;
    if (pp_) {
      long long c[1] = {-t.k};
      for (const auto& [f, sv] : pp_->poles_at(c)) o = std::max(o, sv);
    } else if (t.k >= 1) {
      o = (hp_[0]->singular(0) || hp_[1]->singular(0) ? 1 : 0) + (hp_[2]->singular(0) || hp_[3]->singular(0) ? 1 : 0);
    }
    if (o > 0) order = std::max(order, o + t.j);
  }
  PoleSet out;
  if (order > 0) out[LinearForm::coordinate(1, 0)] = order;
  return out;
}

double ChartAmplitude::radius() const {
  // Samples mu = m lambda - k stay within a quarter of the lattice step.
  return 0.25 * lattice_step_ / m_;
}

// ---------------------------------------------------------------------------
// Public entry points

namespace {

bool chart_possible(const Spacetime& s, const AmplitudeSpec& spec, const std::vector<VertexFunction>& phi) {
  if (spec.n != 2) return false;
  if (s.d == 1) return true;
  return phi[0].separable_in(light_cone_frame()) && phi[1].separable_in(light_cone_frame());
}

void check_inputs(const Spacetime& s, const AmplitudeSpec& spec, const std::vector<VertexFunction>& phi) {
  s.validate();
  spec.validate();
  if (phi.size() != spec.n) throw Error("one vertex function per vertex is required");
  for (const auto& p : phi)
    if (p.dim() != s.dim()) throw Error("vertex function dimension mismatch");
}

}  // namespace

AmplitudeValue regularized_amplitude(const Spacetime& s, const PropagatorModel& model, const AmplitudeSpec& spec,
                                     std::span<const Complex> lambda, const std::vector<VertexFunction>& phi,
                                     const AmplitudeOptions& opt) {
  check_inputs(s, spec, phi);
  if (lambda.size() != spec.edge_list().size()) throw Error("one lambda per edge is required");
  Route route = opt.route;
  if (route == Route::Auto) {
    if (chart_possible(s, spec, phi)) route = Route::Chart;
    else if (off_cone(s, spec, phi)) route = Route::OffCone;
    else if (in_integrable_region(spec, lambda)) route = Route::Integrable;
    else throw ValidityError("outside validity region");
  }
  AmplitudeValue out;
  out.route = route;
  if (route == Route::Chart) {
    ChartAmplitude ca(s, model, spec, phi, opt.cfg);
    out.value = ca(lambda[0]);
    out.error = opt.cfg.tolerance * std::max(1.0, std::abs(out.value));
    return out;
  }
  if (route == Route::OffCone && !off_cone(s, spec, phi)) throw ValidityError("outside validity region");
  if (route == Route::Integrable && !in_integrable_region(spec, lambda))
    throw ValidityError("outside validity region");
  auto fine = build_cache(s, model, spec, phi, opt.node_budget, opt.mc_samples, opt.seed, 0);
  double se = 0.0;
  out.value = fine(lambda, &se);
  if (fine.kind == AmplitudeCache::Kind::MonteCarlo) {
    out.monte_carlo = true;
    out.error = se;
  } else {
    auto coarse = build_cache(s, model, spec, phi, opt.node_budget, opt.mc_samples, opt.seed, 1);
    out.error = std::abs(out.value - coarse(lambda));
  }
  return out;
}

NumericGerm amplitude_germ(const Spacetime& s, const PropagatorModel& model, const AmplitudeSpec& spec,
                           const std::vector<VertexFunction>& phi, std::optional<PoleSet> declared,
                           const AmplitudeOptions& opt) {
  check_inputs(s, spec, phi);
  const std::size_t p = spec.edge_list().size();
  QuadratureConfig cfg = opt.cfg;
  bool chart = opt.route == Route::Chart || (opt.route == Route::Auto && chart_possible(s, spec, phi));
  if (chart) {
    auto ca = std::make_shared<ChartAmplitude>(s, model, spec, phi, opt.cfg);
    if (!cfg.contour_radius) cfg.contour_radius = ca->radius();
    PoleSet poles = declared ? *declared : ca->poles_at_zero();
    return laurent_extract([ca](std::span<const Complex> l) { return (*ca)(l[0]); }, {0}, poles, cfg);
  }
  if (!off_cone(s, spec, phi)) throw ValidityError("outside validity region");
  auto cache = std::make_shared<AmplitudeCache>(
      build_cache(s, model, spec, phi, opt.germ_node_budget, opt.mc_samples, opt.seed, 0));
  if (!cfg.contour_radius) cfg.contour_radius = 0.25;
  return laurent_extract([cache](std::span<const Complex> l) { return (*cache)(l); },
                         std::vector<long long>(p, 0), declared ? *declared : PoleSet{}, cfg);
}

RenormResult renormalize_amplitude(const Spacetime& s, const PropagatorModel& model, const AmplitudeSpec& spec,
                                   const std::vector<VertexFunction>& phi, const AmplitudeOptions& opt) {
  RenormResult r;
  r.germ = amplitude_germ(s, model, spec, phi, std::nullopt, opt);
  r.decomposition = project_pi(r.germ.germ);
  r.value = holomorphic_value_at_center(r.decomposition);
  r.value_error = r.germ.coefficient_error;
  return r;
}

}  // namespace meroren
