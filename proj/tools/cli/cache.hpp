#pragma once

// Content-addressed result cache: <dir>/<sha256 of canonical request>.json.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace meroren::cli {

/// Hex SHA-256 of the canonical (sorted-key, compact) serialization.
std::string cache_key(const nlohmann::json& request);

class ResultCache {
 public:
  ResultCache() = default;  // disabled
  explicit ResultCache(std::filesystem::path dir);

  bool enabled() const { return !dir_.empty(); }
  std::optional<nlohmann::json> get(const std::string& key) const;
  /// Atomic: written to a temporary file in the same directory, then renamed.
  void put(const std::string& key, const nlohmann::json& value) const;

 private:
  std::filesystem::path dir_;
};

/// Writes text to path via a temporary sibling and rename.
void write_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace meroren::cli
