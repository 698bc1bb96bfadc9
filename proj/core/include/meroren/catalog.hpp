#pragma once

// Catalog of functions with exact monomializing charts.

#include "meroren/field.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace meroren {

/// On the orthant {orthant_i * y_i > 0}, f(A y + b) = epsilon * prod |y_i|^{alpha_i}.
struct Chart {
  std::vector<int> orthant;
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  double jacobian = 1.0;  // |det A|
  int epsilon = 1;
  std::vector<int> alpha;
};

struct CatalogEntry {
  std::string name;
  std::size_t dim = 0;
  std::vector<Chart> charts;
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;
  std::string critical_locus;
  /// b(lambda) for one integration-by-parts step on a chart coordinate with
  /// exponent alpha: prod_{m=1..alpha} (alpha lambda + m) is the monomial
  /// Bernstein-Sato polynomial (up to normalization).
  std::string bernstein_sato;
  /// x -> true iff (x; xi) lies in Lambda_f.
  std::function<bool(std::span<const double>, std::span<const double>)> lambda_member;
};

/// Entries: "x", "x2", "uv", "minkowski2", "monomial:a,b" (a, b >= 1).
const CatalogEntry& catalog_entry(const std::string& name);

std::vector<std::string> catalog_names();

}  // namespace meroren
