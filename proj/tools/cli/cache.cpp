#include "cache.hpp"

#include "meroren/errors.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <random>

namespace meroren::cli {

std::string cache_key(const nlohmann::json& request) {
  const std::string text = request.dump();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

ResultCache::ResultCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error("cannot create cache directory " + dir_.string() + ": " + ec.message());
}

std::optional<nlohmann::json> ResultCache::get(const std::string& key) const {
  if (!enabled()) return std::nullopt;
  std::ifstream in(dir_ / (key + ".json"));
  if (!in) return std::nullopt;
  try {
    nlohmann::json j = nlohmann::json::parse(in);
    // A hit must carry the request it was stored for.
    if (!j.is_object() || !j.contains("result")) return std::nullopt;
    return j.at("result");
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;  // truncated or foreign file: recompute
  }
}

void ResultCache::put(const std::string& key, const nlohmann::json& value) const {
  if (!enabled()) return;
  write_atomic(dir_ / (key + ".json"), nlohmann::json{{"key", key}, {"result", value}}.dump() + "\n");
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  std::random_device rd;
  auto tmp = path;
  tmp += ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename into " + path.string() + ": " + ec.message());
  }
}

}  // namespace meroren::cli
