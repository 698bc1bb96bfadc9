#pragma once

// Named check suites shared by `meroren check` and the acceptance runner.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace meroren::suites {

struct SuiteOptions {
  std::uint64_t seed = 1;
};

struct SuiteResult {
  std::string name;
  bool pass = false;
  std::string summary;  // one line
  nlohmann::json report;
};

/// germ, laurent, residues, extension, tensor, polarization, synge,
/// qft-factorization-d1, qft-factorization-d2, covariance, holomorphy, feynman.
const std::vector<std::string>& suite_names();
bool has_suite(const std::string& name);

/// Throws meroren::Error for an unknown name.
SuiteResult run_suite(const std::string& name, const SuiteOptions& opt = {});

}  // namespace meroren::suites
