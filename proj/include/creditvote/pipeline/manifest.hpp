#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace creditvote::pipeline {

inline constexpr std::string_view kVersion = "creditvote 0.1.0";

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// manifest_<stage>.json in `out_dir`: config and its hash, SHA-256 of every
// input and output (keyed by file name), plus stage-specific notes. No
// timestamps, so reruns on unchanged inputs reproduce it byte for byte.
std::filesystem::path write_manifest(const std::filesystem::path& out_dir, std::string_view stage,
                                     const nlohmann::json& config,
                                     const std::vector<std::filesystem::path>& inputs,
                                     const std::vector<std::filesystem::path>& outputs,
                                     const nlohmann::json& notes = nlohmann::json::object());

}  // namespace creditvote::pipeline
