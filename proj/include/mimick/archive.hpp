#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mimick/tensor.hpp"

namespace mimick {

// Single-file model container; byte layout is documented in
// docs/model-archive.md.
//
//   "MMKARCH\0" | u32 version | u64 manifest bytes | manifest JSON | blobs
//
// Integers and tensor values are little-endian; values are IEEE-754 doubles
// written in manifest order with no padding.
struct ModelArchive {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::string kind;
  nlohmann::json meta = nlohmann::json::object();
  std::vector<std::pair<std::string, Tensor>> tensors;

  void add(std::string name, const Tensor& tensor);
  // Throws ArchiveError (missing tensor / shape mismatch).
  const Tensor& tensor(std::string_view name) const;
  const Tensor& tensor(std::string_view name, const Shape& expected) const;
};

std::string serialize_archive(const ModelArchive& archive);
// Validates magic, version, kind, manifest and blob sizes before returning.
ModelArchive parse_archive(std::string_view bytes,
                           std::string_view expected_kind);

void save_archive(const std::filesystem::path& path,
                  const ModelArchive& archive);
ModelArchive load_archive(const std::filesystem::path& path,
                          std::string_view expected_kind);

}  // namespace mimick
