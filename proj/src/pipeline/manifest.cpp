#include "creditvote/pipeline/manifest.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <memory>

#include "creditvote/errors.hpp"
#include "creditvote/pipeline/csv.hpp"

namespace creditvote::pipeline {

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

std::filesystem::path write_manifest(const std::filesystem::path& out_dir, std::string_view stage,
                                     const nlohmann::json& config,
                                     const std::vector<std::filesystem::path>& inputs,
                                     const std::vector<std::filesystem::path>& outputs,
                                     const nlohmann::json& notes) {
  nlohmann::json m;
  m["stage"] = stage;
  m["version"] = kVersion;
  m["config"] = config;
  m["config_sha256"] = sha256_hex(config.dump());
  nlohmann::json in = nlohmann::json::object();
  for (const auto& p : inputs) in[p.filename().string()] = sha256_file(p);
  nlohmann::json out = nlohmann::json::object();
  for (const auto& p : outputs) out[p.filename().string()] = sha256_file(p);
  m["inputs"] = std::move(in);
  m["outputs"] = std::move(out);
  m["notes"] = notes;
  const auto path = out_dir / fmt::format("manifest_{}.json", stage);
  write_file(path, m.dump(2) + "\n");
  return path;
}

}  // namespace creditvote::pipeline
