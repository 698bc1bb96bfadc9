#pragma once

#include "cache.hpp"

#include "meroren/errors.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace meroren::cli {

/// Malformed request: reported with exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct RunContext {
  std::optional<std::uint64_t> seed;  // --seed overrides the config
  std::optional<double> tol;          // --tol overrides quadrature.tolerance
  ResultCache cache;
};

struct Outcome {
  nlohmann::json output;
  bool pass = true;  // false: exit code 1
};

Outcome cmd_germ(const nlohmann::json& config, RunContext& ctx);
Outcome cmd_renorm(const nlohmann::json& config, RunContext& ctx);
Outcome cmd_qft(const nlohmann::json& config, RunContext& ctx);
Outcome cmd_polar(const nlohmann::json& config, RunContext& ctx);
/// suite: a suite name or "all".
Outcome cmd_check(const std::string& suite, RunContext& ctx);

}  // namespace meroren::cli
