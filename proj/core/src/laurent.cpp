#include "meroren/laurent.hpp"

#include "meroren/germ_json.hpp"

#include <tbb/parallel_for.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <numbers>
#include <sstream>

namespace meroren {

namespace {

std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= b;
  return r;
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Discrete Fourier coefficients c_m = N^-p sum_k F_k e^{-i m.theta_k} for
/// m in [-neg, deg]^p, stored row-major with nf = neg + deg + 1 per axis.
std::vector<Complex> torus_coefficients(const std::vector<Complex>& samples, std::size_t p, std::size_t N,
                                        int neg, int deg) {
  const std::size_t nf = static_cast<std::size_t>(neg + deg + 1);
  std::vector<Complex> twiddle(nf * N);
  for (std::size_t f = 0; f < nf; ++f) {
    long long m = static_cast<long long>(f) - neg;
    for (std::size_t k = 0; k < N; ++k) {
      long long e = (m * static_cast<long long>(k)) % static_cast<long long>(N);
      double ang = -2.0 * std::numbers::pi * static_cast<double>(e) / static_cast<double>(N);
      twiddle[f * N + k] = Complex(std::cos(ang), std::sin(ang)) / static_cast<double>(N);
    }
  }
  std::vector<Complex> cur = samples;
  // Axis a has extent N before and nf after its transform.
  for (std::size_t a = 0; a < p; ++a) {
    std::size_t outer = ipow(nf, a);
    std::size_t inner = ipow(N, p - a - 1);
    std::vector<Complex> next(outer * nf * inner);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t f = 0; f < nf; ++f)
        for (std::size_t in = 0; in < inner; ++in) {
          Complex acc = 0.0;
          for (std::size_t k = 0; k < N; ++k) acc += twiddle[f * N + k] * cur[(o * N + k) * inner + in];
          next[(o * nf + f) * inner + in] = acc;
        }
    cur = std::move(next);
  }
  return cur;
}

std::vector<Complex> subsample(const std::vector<Complex>& s, std::size_t p, std::size_t N) {
  std::size_t half = N / 2;
  std::vector<Complex> out(ipow(half, p));
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    std::size_t rem = flat, src = 0, stride = 1;
    for (std::size_t a = p; a-- > 0;) {
      src += 2 * (rem % half) * stride;
      rem /= half;
      stride *= N;
    }
    out[flat] = s[src];
  }
  return out;
}

std::vector<int> unflatten(std::size_t flat, std::size_t p, std::size_t extent, int offset) {
  std::vector<int> m(p);
  for (std::size_t a = p; a-- > 0;) {
    m[a] = static_cast<int>(flat % extent) - offset;
    flat /= extent;
  }
  return m;
}

std::string describe(const std::vector<Complex>& coeffs, std::size_t p, std::size_t nf, int neg, int deg) {
  std::ostringstream os;
  int shown = 0;
  for (std::size_t flat = 0; flat < coeffs.size() && shown < 6; ++flat) {
    auto m = unflatten(flat, p, nf, neg);
    int tot = 0;
    bool ok = true;
    for (int v : m) {
      ok = ok && v >= 0;
      tot += v;
    }
    if (!ok || tot > deg) continue;
    os << (shown ? ", " : "") << to_string(coeffs[flat]);
    ++shown;
  }
  return os.str();
}

}  // namespace

NumericGerm laurent_extract(const Pairing& f, std::vector<long long> center, const PoleSet& poles,
                            const QuadratureConfig& cfg) {
  cfg.validate();
  const std::size_t p = center.size();
  if (p == 0) throw ExtractionError("empty center");
  int pole_degree = 0;
  long long max_l1 = 0;
  bool mixed = false;
  for (const auto& [form, s] : poles) {
    if (form.size() != p) throw ExtractionError("pole form arity does not match the center");
    if (s <= 0) throw ExtractionError("pole orders must be positive");
    pole_degree += s;
    long long l1 = 0;
    for (std::size_t j = 0; j < p; ++j) l1 += std::llabs(form[j]);
    max_l1 = std::max(max_l1, l1);
    mixed = mixed || form.support().size() > 1;
  }
  const int deg = pole_degree + cfg.extra_order;

  // Distinct radii keep mixed forms nonzero on the torus.
  const double r0 = cfg.contour_radius.value_or(0.25);
  const double q = mixed ? 1.0 / static_cast<double>(max_l1 + 1) : 1.0;
  std::vector<double> radii(p);
  for (std::size_t j = 0; j < p; ++j) radii[j] = r0 * std::pow(q, static_cast<double>(j));

  const int neg = std::min(deg + 1, 4);
  const int start = p == 1 ? cfg.nodes : std::max(8, cfg.nodes >> (2 * (p - 1)));
  const int cap = p == 1 ? cfg.max_nodes : std::max(16, cfg.max_nodes >> (2 * (p - 1)));
  std::size_t N = static_cast<std::size_t>(std::max(start, next_pow2(2 * (deg + neg + 1))));
  const std::size_t nf = static_cast<std::size_t>(neg + deg + 1);

  auto cleared = [&](const std::vector<Complex>& delta) {
    std::vector<Complex> lambda(p);
    for (std::size_t j = 0; j < p; ++j) lambda[j] = static_cast<double>(center[j]) + delta[j];
    Complex v = f(lambda);
    for (const auto& [form, s] : poles) v *= std::pow(form.apply<Complex>(delta), s);
    return v;
  };

  std::vector<Complex> samples;
  std::size_t sampled_N = 0;
  std::vector<Complex> prev_coeffs;
  for (;;) {
    std::vector<Complex> next(ipow(N, p));
    std::vector<char> have(next.size(), 0);
    if (sampled_N) {
      // Reuse the coarser grid: it is the all-even index subset.
      std::size_t half = sampled_N;
      for (std::size_t flat = 0; flat < samples.size(); ++flat) {
        std::size_t rem = flat, dst = 0, stride = 1;
        for (std::size_t a = p; a-- > 0;) {
          dst += 2 * (rem % half) * stride;
          rem /= half;
          stride *= N;
        }
        next[dst] = samples[flat];
        have[dst] = 1;
      }
    }
    tbb::parallel_for(std::size_t{0}, next.size(), [&](std::size_t flat) {
      if (have[flat]) return;
      std::vector<Complex> delta(p);
      std::size_t rem = flat;
      for (std::size_t a = p; a-- > 0;) {
        std::size_t k = rem % N;
        rem /= N;
        double ang = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(N);
        delta[a] = std::polar(radii[a], ang);
      }
      next[flat] = cleared(delta);
    });
    samples = std::move(next);
    sampled_N = N;

    double scale = 0.0;
    for (const auto& v : samples) scale = std::max(scale, std::abs(v));
    auto coeffs = torus_coefficients(samples, p, N, neg, deg);
    auto coarse = torus_coefficients(subsample(samples, p, N), p, N / 2, neg, deg);

    double diff = 0.0, negmax = 0.0;
    for (std::size_t flat = 0; flat < coeffs.size(); ++flat) {
      auto m = unflatten(flat, p, nf, neg);
      bool negative = false;
      int tot = 0;
      for (int v : m) {
        negative = negative || v < 0;
        tot += v;
      }
      if (negative)
        negmax = std::max(negmax, std::abs(coeffs[flat]));
      else if (tot <= deg)
        diff = std::max(diff, std::abs(coeffs[flat] - coarse[flat]));
    }
    // Geometric convergence: the finer set's error is about diff^2 / scale.
    double est = scale > 0.0 ? std::min(diff, diff * diff / scale) : diff;
    if (est <= cfg.tolerance * scale) {
      if (negmax > std::sqrt(cfg.tolerance) * scale)
        throw ExtractionError("declared-pole mismatch: cleared function fails Cauchy decay (negative coefficient " +
                              std::to_string(negmax) + " vs scale " + std::to_string(scale) + ")");
      Polynomial<Complex> num(p);
      double coeff_err = 0.0;
      for (std::size_t flat = 0; flat < coeffs.size(); ++flat) {
        auto m = unflatten(flat, p, nf, neg);
        int tot = 0;
        bool negative = false;
        double rpow = 1.0;
        for (std::size_t j = 0; j < p; ++j) {
          negative = negative || m[j] < 0;
          tot += m[j];
          if (m[j] > 0) rpow *= std::pow(radii[j], m[j]);
        }
        if (negative || tot > deg) continue;
        num.add_term(m, coeffs[flat] / rpow);
        coeff_err = std::max(coeff_err, std::max(est, cfg.tolerance * scale) / rpow);
      }
      NumericGerm g;
      g.germ = ApproxGerm(std::move(center), std::move(num), poles);
      g.radii = radii;
      g.nodes = static_cast<int>(N);
      g.coefficient_error = coeff_err;
      g.scale = scale;
      return g;
    }
    if (static_cast<int>(N) >= cap)
      throw ExtractionError("contour sampling did not converge at " + std::to_string(N) +
                            " nodes per variable; last coefficients [" + describe(coeffs, p, nf, neg, deg) +
                            "], previous [" + describe(coarse, p, nf, neg, deg) + "]");
    prev_coeffs = std::move(coeffs);
    N *= 2;
  }
}

Complex residue(const Pairing& f, long long center, const QuadratureConfig& cfg) {
  QuadratureConfig c = cfg;
  c.extra_order = 0;
  PoleSet poles{{LinearForm(std::vector<long long>{1}), 1}};
  auto g = laurent_extract(f, {center}, poles, c);
  return g.germ.numerator().constant_term();
}

nlohmann::json to_json(const NumericGerm& g) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& [m, c] : g.germ.numerator().terms())
    coeffs.push_back({{"monomial", m}, {"value", {c.real(), c.imag()}}});
  return {{"center", g.germ.center()},
          {"poles", poles_to_json(g.germ.poles())},
          {"numerator", g.germ.numerator().to_string()},
          {"coefficients", coeffs},
          {"radii", g.radii},
          {"nodes", g.nodes},
          {"coefficient_error", g.coefficient_error},
          {"scale", g.scale}};
}

}  // namespace meroren
