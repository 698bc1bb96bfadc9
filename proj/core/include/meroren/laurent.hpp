#pragma once

// Germ extraction from a numerically given meromorphic function by
// sampling the pole-cleared function on a polydisk torus.

#include "meroren/germ.hpp"
#include "meroren/quadrature.hpp"

#include <functional>
#include <nlohmann/json_fwd.hpp>

namespace meroren {

using Pairing = std::function<Complex(std::span<const Complex>)>;

struct NumericGerm {
  ApproxGerm germ;
  std::vector<double> radii;
  int nodes = 0;                   // per variable
  double coefficient_error = 0.0;  // max estimated error over Taylor coefficients
  double scale = 0.0;              // max |cleared function| on the torus
};

/// Taylor data of the cleared function F = f * prod L^s up to total degree
/// sum(s) + cfg.extra_order, turned back into F / prod L^s.
NumericGerm laurent_extract(const Pairing& f, std::vector<long long> center, const PoleSet& poles,
                            const QuadratureConfig& cfg = {});

/// Residue at a simple pole of a one-variable function.
Complex residue(const Pairing& f, long long center, const QuadratureConfig& cfg = {});

nlohmann::json to_json(const NumericGerm& g);

}  // namespace meroren
