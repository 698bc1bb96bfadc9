#include "meroren/renorm.hpp"

#include "meroren/germ_json.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

namespace meroren {

RenormResult renormalize(const RenormRequest& req) {
  if (!req.phi) throw Error("renormalization needs a test function");
  if (req.exponents.size() != req.factors.size())
    throw Error("one target exponent per factor is required");
  auto pp = std::make_shared<PowerPairing>(req.factors, req.phi, req.cfg);
  PoleSet poles = pp->poles_at(req.exponents);

  // Declared forms must come from the catalog lattice.
  std::set<LinearForm> lattice;
  for (const auto& f : pp->lattice()) lattice.insert(LinearForm(f.alpha).canonicalize().first);
  for (const auto& [form, s] : poles)
    if (!lattice.count(form)) throw ExtractionError("lattice mismatch: " + form.to_string());

  QuadratureConfig cfg = req.cfg;
  if (!cfg.contour_radius) cfg.contour_radius = pp->default_radius(req.exponents);
  RenormResult r;
  try {
    r.germ = laurent_extract([pp](std::span<const Complex> l) { return (*pp)(l); }, req.exponents, poles, cfg);
  } catch (const ExtractionError& e) {
    if (std::string(e.what()).find("declared-pole mismatch") != std::string::npos)
      throw ExtractionError(std::string("lattice mismatch: ") + e.what());
    throw;
  }
  r.decomposition = project_pi(r.germ.germ);
  r.value = holomorphic_value_at_center(r.decomposition);
  r.value_error = r.germ.coefficient_error;
  return r;
}

double integer_power_product(const std::vector<FactorSpec>& factors, std::span<const long long> k,
                             std::span<const double> x) {
  double v = 1.0;
  std::vector<double> local;
  for (std::size_t j = 0; j < factors.size(); ++j) {
    const auto& e = catalog_entry(factors[j].entry);
    local.clear();
    for (auto i : factors[j].block) local.push_back(x[i]);
    v *= std::pow(e.value(local), static_cast<double>(k[j]));
  }
  return v;
}

CheckReport check_extension(const RenormRequest& req, double tol) {
  CheckReport rep;
  rep.name = "extension";
  rep.tolerance = tol;
  PowerPairing pp(req.factors, req.phi, req.cfg);
  if (!pp.lattice().empty()) {
    rep.detail = "precondition violated: test function meets a zero set";
    return rep;
  }
  RenormResult r = renormalize(req);
  Box box = req.phi->support();
  auto integrand = [&](std::span<const double> x) {
    return integer_power_product(req.factors, req.exponents, x) * (*req.phi)(x);
  };
  double l1 = integrate_box([&](std::span<const double> x) { return std::abs(integrand(x)); }, box.lo, box.hi,
                            1e-9);
  double direct = integrate_box(integrand, box.lo, box.hi, 1e-12);
  rep.lhs = r.value;
  rep.rhs = direct;
  rep.error = std::abs(r.value - direct);
  double scale = std::max(l1, 1e-300);
  rep.pass = rep.error <= tol * scale || (l1 == 0.0 && std::abs(r.value) <= tol);
  rep.detail = "|R - direct| vs tol * L1 norm " + std::to_string(scale);
  return rep;
}

CheckReport check_tensor_factorization(const RenormRequest& a, const RenormRequest& b, double tol) {
  CheckReport rep;
  rep.name = "tensor-factorization";
  rep.tolerance = tol;
  RenormRequest joint;
  joint.cfg = a.cfg;
  joint.phi = std::make_shared<TensorProduct>(a.phi, b.phi);
  const std::size_t shift = a.phi->dim();
  joint.factors = a.factors;
  for (auto f : b.factors) {
    for (auto& v : f.block) v += shift;
    joint.factors.push_back(std::move(f));
  }
  joint.exponents = a.exponents;
  joint.exponents.insert(joint.exponents.end(), b.exponents.begin(), b.exponents.end());
  RenormResult lhs = renormalize(joint);
  Complex rhs = renormalize(a).value * renormalize(b).value;
  rep.lhs = lhs.value;
  rep.rhs = rhs;
  double denom = std::max(std::abs(rhs), 1e-300);
  rep.error = std::abs(lhs.value - rhs) / denom;
  rep.pass = rep.error <= tol || (std::abs(rhs) == 0.0 && std::abs(lhs.value) <= tol);
  rep.detail = "relative error";
  return rep;
}

nlohmann::json to_json(const RenormResult& r) {
  nlohmann::json singular = nlohmann::json::array();
  for (const auto& t : r.decomposition.singular) {
    nlohmann::json coeff = nlohmann::json::array();
    for (const auto& [m, c] : t.numerator.terms())
      coeff.push_back({{"monomial", m}, {"value", {c.real(), c.imag()}}});
    singular.push_back({{"poles", poles_to_json(t.poles)}, {"coeff", coeff}, {"err", r.germ.coefficient_error}});
  }
  return {{"value", {r.value.real(), r.value.imag()}},
          {"singular", singular},
          {"meta",
           {{"value_error", r.value_error},
            {"center", r.germ.germ.center()},
            {"radii", r.germ.radii},
            {"nodes", r.germ.nodes},
            {"scale", r.germ.scale}}}};
}

nlohmann::json to_json(const CheckReport& r) {
  return {{"name", r.name},
          {"pass", r.pass},
          {"lhs", {r.lhs.real(), r.lhs.imag()}},
          {"rhs", {r.rhs.real(), r.rhs.imag()}},
          {"error", r.error},
          {"tolerance", r.tolerance},
          {"detail", r.detail}};
}

}  // namespace meroren
