#pragma once

// R_pi: evaluation at the target exponents of the holomorphic part of the
// regularized pairing lambda -> prod (f_j + i0)^{lambda_j} (phi).

#include "meroren/laurent.hpp"
#include "meroren/pairing.hpp"

#include <nlohmann/json_fwd.hpp>

namespace meroren {

struct RenormRequest {
  std::vector<FactorSpec> factors;
  std::vector<long long> exponents;
  std::shared_ptr<const SmoothFunction> phi;
  QuadratureConfig cfg;
};

struct RenormResult {
  Complex value;
  double value_error = 0.0;
  NumericGerm germ;
  Decomposition<Complex> decomposition;
};

RenormResult renormalize(const RenormRequest& req);

/// Outcome of an equality check between two independently computed values.
struct CheckReport {
  std::string name;
  bool pass = false;
  Complex lhs, rhs;
  double error = 0.0;      // measured discrepancy (absolute or relative, see detail)
  double tolerance = 0.0;
  std::string detail;
};

/// R_pi against direct quadrature of prod f_j^{k_j} phi when phi avoids
/// every zero set; |difference| <= tol * L1 norm of the integrand.
CheckReport check_extension(const RenormRequest& req, double tol = 1e-6);

/// R_pi(A x B)(phi_A (x) phi_B) against R_pi(A)(phi_A) R_pi(B)(phi_B),
/// relative error <= tol.
CheckReport check_tensor_factorization(const RenormRequest& a, const RenormRequest& b, double tol = 1e-5);

/// prod_j f_j(x)^{k_j} at a point (real, integer exponents).
double integer_power_product(const std::vector<FactorSpec>& factors, std::span<const long long> k,
                             std::span<const double> x);

nlohmann::json to_json(const RenormResult& r);
nlohmann::json to_json(const CheckReport& r);

}  // namespace meroren
