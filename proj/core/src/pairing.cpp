#include "meroren/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace meroren {

namespace {

constexpr std::size_t kMaxGridPoints = std::size_t{1} << 22;

bool is_identity(const Chart& c) {
  for (std::size_t r = 0; r < c.A.size(); ++r) {
    if (c.b[r] != 0.0) return false;
    for (std::size_t k = 0; k < c.A.size(); ++k)
      if (c.A[r][k] != (r == k ? 1.0 : 0.0)) return false;
  }
  return true;
}

}  // namespace

HyperPairing::HyperPairing(std::shared_ptr<const SmoothFunction> phi, std::vector<int> orthant,
                           QuadratureConfig cfg)
    : phi_(std::move(phi)), orthant_(std::move(orthant)), cfg_(cfg) {
  const std::size_t n = orthant_.size();
  if (phi_->dim() != n) throw Error("orthant dimension does not match the test function");
  Box box = phi_->support();
  for (std::size_t i = 0; i < n; ++i) {
    double lo = box.lo[i], hi = box.hi[i];
    switch (orthant_[i]) {
      case 1:
        empty_ = empty_ || hi <= 0.0;
        singular_.push_back(lo < 0.0 && hi > 0.0);
        lo_.push_back(std::max(lo, 0.0));
        hi_.push_back(hi);
        break;
      case -1:
        empty_ = empty_ || lo >= 0.0;
        singular_.push_back(lo < 0.0 && hi > 0.0);
        lo_.push_back(std::max(-hi, 0.0));
        hi_.push_back(-lo);
        break;
      case 0:
        singular_.push_back(false);
        lo_.push_back(lo);
        hi_.push_back(hi);
        break;
      default:
        throw Error("orthant entries must be -1, 0 or 1");
    }
  }
  axis_breaks_.assign(n, {});
  for (auto l : phi_->breaklines()) {
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (orthant_[i] == -1) l.normal[i] = -l.normal[i];
      norm = std::max(norm, std::abs(l.normal[i]));
    }
    std::vector<std::size_t> nz;
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(l.normal[i]) > 1e-14 * norm) nz.push_back(i);
    if (nz.size() == 1)
      axis_breaks_[nz[0]].push_back(l.offset / l.normal[nz[0]]);
    else if (nz.size() > 1)
      oblique_.push_back(std::move(l));
  }
}

std::vector<int> HyperPairing::shifts(std::span<const Complex> mu) const {
  std::vector<int> k(mu.size(), 0);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!singular_[i]) continue;
    double need = -0.5 - mu[i].real();
    k[i] = need < 0.0 ? 0 : static_cast<int>(std::floor(need)) + 1;
  }
  return k;
}

std::vector<double> HyperPairing::pieces(std::size_t axis, double lo, double hi,
                                         const std::vector<double>& extra) const {
  const double eps = 1e-12 * std::max(1.0, hi - lo);
  std::vector<double> cuts{lo, hi};
  for (const auto* src : {&axis_breaks_[axis], &extra})
    for (double c : *src)
      if (c > lo + eps && c < hi - eps) cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> out;
  for (double c : cuts)
    if (out.empty() || c - out.back() > eps) out.push_back(c);
  if (out.back() != hi) out.back() = hi;
  return out;
}

namespace {

struct AxisRule {
  std::vector<double> x, logz, w;
};

AxisRule piecewise_rule(const std::vector<double>& cuts, int level, bool free_axis) {
  AxisRule r;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p)
    // Long tails only where an algebraic endpoint singularity can sit.
    for (const auto& q : tanh_sinh_nodes(cuts[p], cuts[p + 1], level, cuts[p] == 0.0 && !free_axis ? 4.0 : 3.0)) {
      r.x.push_back(q.x);
      r.w.push_back(q.weight);
      r.logz.push_back(free_axis ? 0.0 : cuts[p] == 0.0 ? std::log(q.from_lo) : std::log(q.x));
    }
  return r;
}

}  // namespace

Complex HyperPairing::NestedGrid::contract(Complex e_outer, Complex e_inner) const {
  Complex total = 0.0;
  for (std::size_t j = 0; j + 1 < row_start.size(); ++j) {
    Complex acc = 0.0;
    for (std::size_t i = row_start[j]; i < row_start[j + 1]; ++i)
      acc += w_inner[i] * values[i] * std::exp(e_inner * log_inner[i]);
    total += w_outer[j] * std::exp(e_outer * log_outer[j]) * acc;
  }
  return total;
}

Complex HyperPairing::Plan::contract(std::span<const Complex> e) const {
  return nested ? nest.contract(e[0], e[1]) : grid.contract(e);
}

double HyperPairing::Plan::magnitude(std::span<const Complex> e) const {
  std::vector<Complex> re(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) re[i] = e[i].real();
  if (nested) {
    NestedGrid a = nest;
    for (auto& v : a.values) v = std::abs(v);
    return std::abs(a.contract(re[0], re[1]));
  }
  PowerGrid a = grid;
  for (auto& v : a.values) v = std::abs(v);
  return std::abs(a.contract(re));
}

HyperPairing::Plan HyperPairing::build(const std::vector<int>& k, int level) const {
  const std::size_t n = orthant_.size();
  Plan p;
  p.level = level;
  auto to_y = [&](std::size_t a, double z) { return orthant_[a] == -1 ? -z : z; };

  if (n == 2 && !oblique_.empty()) {
    p.nested = true;
    // Inner-axis lines: oblique ones and those aligned with axis 1.
    std::vector<Breakline> lines = oblique_;
    for (double c : axis_breaks_[1]) lines.push_back({{0.0, 1.0}, c});
    std::vector<double> outer_extra;
    for (std::size_t a = 0; a < lines.size(); ++a)
      for (std::size_t b = a + 1; b < lines.size(); ++b) {
        const auto& L1 = lines[a];
        const auto& L2 = lines[b];
        double det = L1.normal[0] * L2.normal[1] - L1.normal[1] * L2.normal[0];
        if (std::abs(det) < 1e-14) continue;
        outer_extra.push_back((L1.offset * L2.normal[1] - L2.offset * L1.normal[1]) / det);
      }
    // The singular endpoint of the inner axis is a line too.
    for (const auto& l : oblique_)
      if (std::abs(l.normal[0]) > 1e-14) outer_extra.push_back(l.offset / l.normal[0]);
    auto outer = piecewise_rule(pieces(0, lo_[0], hi_[0], outer_extra), level, orthant_[0] == 0);
    p.nest.log_outer = outer.logz;
    p.nest.w_outer = outer.w;
    p.nest.row_start.push_back(0);
    std::size_t total = 0;
    double y[2];
    for (std::size_t j = 0; j < outer.x.size(); ++j) {
      std::vector<double> inner_extra;
      for (const auto& l : lines)
        if (std::abs(l.normal[1]) > 1e-14) inner_extra.push_back((l.offset - l.normal[0] * outer.x[j]) / l.normal[1]);
      auto inner = piecewise_rule(pieces(1, lo_[1], hi_[1], inner_extra), level, orthant_[1] == 0);
      total += inner.x.size();
      if (total > kMaxGridPoints) throw QuadratureError("quadrature grid exceeds the size cap");
      y[0] = to_y(0, outer.x[j]);
      for (std::size_t i = 0; i < inner.x.size(); ++i) {
        y[1] = to_y(1, inner.x[i]);
        p.nest.values.push_back(phi_->derivative(y, k));
      }
      p.nest.log_inner.insert(p.nest.log_inner.end(), inner.logz.begin(), inner.logz.end());
      p.nest.w_inner.insert(p.nest.w_inner.end(), inner.w.begin(), inner.w.end());
      p.nest.row_start.push_back(total);
    }
    return p;
  }

  std::vector<AxisRule> axes;
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    axes.push_back(piecewise_rule(pieces(i, lo_[i], hi_[i], {}), level, orthant_[i] == 0));
    total *= axes.back().x.size();
    p.grid.log_z.push_back(axes.back().logz);
    p.grid.weight.push_back(axes.back().w);
  }
  if (total > kMaxGridPoints) throw QuadratureError("quadrature grid exceeds the size cap");
  p.grid.values.resize(total);
  std::vector<double> y(n);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (std::size_t a = n; a-- > 0;) {
      y[a] = to_y(a, axes[a].x[rem % axes[a].x.size()]);
      rem /= axes[a].x.size();
    }
    p.grid.values[flat] = phi_->derivative(y, k);
  }
  return p;
}

const HyperPairing::Plan& HyperPairing::plan(const std::vector<int>& k) const {
  std::lock_guard lock(mutex_);
  auto it = plans_.find(k);
  if (it != plans_.end()) return *it->second;

  const std::size_t n = orthant_.size();
  // Probe exponents near the worst admissible endpoint behaviour and a mild one.
  std::vector<std::vector<Complex>> probes(2, std::vector<Complex>(n));
  for (std::size_t i = 0; i < n; ++i) {
    bool free_axis = orthant_[i] == 0;
    bool sing = singular_[i];
    probes[0][i] = free_axis ? Complex(0) : sing ? Complex(-0.45, 0.5) : Complex(-3.0, 0.5);
    probes[1][i] = free_axis ? Complex(0) : sing ? Complex(0.4, -0.5) : Complex(2.0, -0.5);
  }
  Plan prev = build(k, 3);
  for (int level = 4; level <= cfg_.max_level; ++level) {
    Plan cur = build(k, level);
    bool ok = true;
    for (const auto& e : probes) {
      double scale = std::max({prev.magnitude(e), cur.magnitude(e), 1e-300});
      if (std::abs(prev.contract(e) - cur.contract(e)) > cfg_.tolerance * scale) ok = false;
    }
    if (ok) return *plans_.emplace(k, std::make_unique<Plan>(std::move(cur))).first->second;
    prev = std::move(cur);
  }
  throw QuadratureError("hypergeometric quadrature did not converge by level " + std::to_string(cfg_.max_level));
}

Complex HyperPairing::operator()(std::span<const Complex> mu, int extra_shift) const {
  const std::size_t n = orthant_.size();
  if (mu.size() != n) throw Error("exponent count does not match the orthant dimension");
  if (empty_) return 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (orthant_[i] == 0 && mu[i] != Complex(0)) throw Error("free axes carry no exponent");
    if (!singular_[i]) continue;
    double m = std::round(-mu[i].real());
    if (m >= 1.0 && std::abs(mu[i] + m) < kPoleGuard) throw PoleError("on pole");
  }
  std::vector<int> k = shifts(mu);
  for (std::size_t i = 0; i < n; ++i)
    if (singular_[i]) k[i] += extra_shift;

  // prod_i (-s_i)^{k_i} / ((mu_i + 1) ... (mu_i + k_i)); the s_i^{k_i} is the
  // chain rule for phi(s z).
  Complex pre = 1.0;
  std::vector<Complex> e(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 1; j <= k[i]; ++j) pre /= mu[i] + static_cast<double>(j);
    if (k[i] % 2 == 1 && orthant_[i] == 1) pre = -pre;
    e[i] = orthant_[i] == 0 ? Complex(0) : mu[i] + static_cast<double>(k[i]);
  }
  return pre * plan(k).contract(e);
}

Complex hyper_pairing(std::span<const Complex> mu, std::shared_ptr<const SmoothFunction> phi,
                      std::vector<int> orthant, const QuadratureConfig& cfg, int extra_shift) {
  return HyperPairing(std::move(phi), std::move(orthant), cfg)(mu, extra_shift);
}

PowerPairing::PowerPairing(std::vector<FactorSpec> factors, std::shared_ptr<const SmoothFunction> phi,
                           QuadratureConfig cfg)
    : factors_(std::move(factors)) {
  const std::size_t n = phi->dim();
  if (factors_.empty()) throw Error("at least one factor is required");

  struct Group {
    std::vector<std::size_t> block;
    const CatalogEntry* entry;
    std::vector<std::size_t> members;
  };
  std::vector<Group> groups;
  std::vector<int> owner(n, -1);
  for (std::size_t j = 0; j < factors_.size(); ++j) {
    const auto& f = factors_[j];
    const CatalogEntry& e = catalog_entry(f.entry);
    if (f.block.size() != e.dim)
      throw CatalogError("factor '" + f.entry + "' needs a block of " + std::to_string(e.dim) + " variables");
    std::set<std::size_t> uniq(f.block.begin(), f.block.end());
    if (uniq.size() != f.block.size()) throw CatalogError("repeated variable in a factor block");
    auto g = std::find_if(groups.begin(), groups.end(), [&](const Group& g) { return g.block == f.block; });
    if (g != groups.end()) {
      if (g->entry != &e) throw CatalogError("factors on one block must use the same catalog entry");
      g->members.push_back(j);
      continue;
    }
    for (auto v : f.block) {
      if (v >= n) throw CatalogError("factor variable out of range");
      if (owner[v] != -1) throw CatalogError("factor blocks must be identical or disjoint");
      owner[v] = static_cast<int>(groups.size());
    }
    groups.push_back({f.block, &e, {j}});
  }

  std::vector<std::size_t> choice(groups.size(), 0);
  for (;;) {
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) A[i][i] = 1.0;
    std::vector<double> b(n, 0.0);
    std::vector<int> orthant(n, 0);
    double jac = 1.0;
    bool trivial = true;
    Term t;
    t.mu_rows.assign(n, std::vector<long long>(factors_.size(), 0));
    t.negative.assign(factors_.size(), false);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const Chart& c = groups[g].entry->charts[choice[g]];
      const auto& blk = groups[g].block;
      trivial = trivial && is_identity(c);
      for (std::size_t r = 0; r < blk.size(); ++r) {
        for (std::size_t q = 0; q < blk.size(); ++q) A[blk[r]][blk[q]] = c.A[r][q];
        b[blk[r]] = c.b[r];
        orthant[blk[r]] = c.orthant[r];
        for (auto j : groups[g].members) t.mu_rows[blk[r]][j] += c.alpha[r];
      }
      jac *= c.jacobian;
      for (auto j : groups[g].members) t.negative[j] = c.epsilon < 0;
    }
    std::shared_ptr<const SmoothFunction> psi =
        trivial && jac == 1.0 ? phi : std::make_shared<AffinePullback>(phi, A, b, jac);
    t.hyper = std::make_unique<HyperPairing>(psi, orthant, cfg);
    if (!t.hyper->empty()) terms_.push_back(std::move(t));

    std::size_t g = 0;
    while (g < groups.size() && ++choice[g] == groups[g].entry->charts.size()) choice[g++] = 0;
    if (g == groups.size()) break;
  }
}

Complex PowerPairing::operator()(std::span<const Complex> lambda) const {
  if (lambda.size() != factors_.size()) throw Error("one exponent per factor is required");
  Complex sum = 0.0;
  for (const auto& t : terms_) {
    const std::size_t n = t.mu_rows.size();
    std::vector<Complex> mu(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < lambda.size(); ++j)
        if (t.mu_rows[i][j]) mu[i] += static_cast<double>(t.mu_rows[i][j]) * lambda[j];
    Complex phase_arg = 0.0;
    for (std::size_t j = 0; j < lambda.size(); ++j)
      if (t.negative[j]) phase_arg += lambda[j];
    Complex phase = std::exp(Complex(0, std::numbers::pi) * phase_arg);
    sum += phase * (*t.hyper)(mu);
  }
  return sum;
}

std::vector<LatticeForm> PowerPairing::lattice() const {
  std::set<LatticeForm> out;
  for (const auto& t : terms_)
    for (std::size_t i = 0; i < t.mu_rows.size(); ++i)
      if (t.hyper->singular(i)) out.insert({t.mu_rows[i]});
  return {out.begin(), out.end()};
}

PoleSet PowerPairing::poles_at(std::span<const long long> center) const {
  if (center.size() != factors_.size()) throw Error("center arity mismatch");
  PoleSet out;
  for (const auto& t : terms_) {
    PoleSet here;
    for (std::size_t i = 0; i < t.mu_rows.size(); ++i) {
      if (!t.hyper->singular(i)) continue;
      long long v = 0;
      for (std::size_t j = 0; j < center.size(); ++j) v += t.mu_rows[i][j] * center[j];
      if (v <= -1) here[LinearForm(t.mu_rows[i]).canonicalize().first] += 1;
    }
    for (const auto& [f, s] : here) out[f] = std::max(out[f], s);
  }
  return out;
}

double PowerPairing::default_radius(std::span<const long long> center) const {
  double r = 0.25;
  for (const auto& t : terms_)
    for (std::size_t i = 0; i < t.mu_rows.size(); ++i) {
      if (!t.hyper->singular(i)) continue;
      long long v = 0, l1 = 0;
      for (std::size_t j = 0; j < center.size(); ++j) {
        v += t.mu_rows[i][j] * center[j];
        l1 += std::llabs(t.mu_rows[i][j]);
      }
      if (l1 == 0) continue;
      double d = v <= -1 ? 1.0 : static_cast<double>(v + 1);
      r = std::min(r, 0.25 * d / static_cast<double>(l1));
    }
  return r;
}

Complex power_pairing(const std::vector<FactorSpec>& factors, std::span<const Complex> lambda,
                      std::shared_ptr<const SmoothFunction> phi, const QuadratureConfig& cfg) {
  return PowerPairing(factors, std::move(phi), cfg)(lambda);
}

}  // namespace meroren
