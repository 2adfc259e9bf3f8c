#include "mimick/archive.hpp"

#include <bit>
#include <cstring>

#include "mimick/errors.hpp"
#include "mimick/files.hpp"

namespace mimick {

namespace {

constexpr char kMagic[8] = {'M', 'M', 'K', 'A', 'R', 'C', 'H', '\0'};
constexpr std::size_t kHeaderBytes = 8 + 4 + 8;

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

std::uint64_t get_le(std::string_view bytes, std::size_t offset, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + i]))
         << (8 * i);
  }
  return v;
}

}  // namespace

void ModelArchive::add(std::string name, const Tensor& tensor) {
  tensors.emplace_back(std::move(name), tensor);
}

const Tensor& ModelArchive::tensor(std::string_view name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  throw ArchiveError(ArchiveError::Kind::kMissingTensor,
                     "archive has no tensor '" + std::string(name) + "'");
}

const Tensor& ModelArchive::tensor(std::string_view name,
                                   const Shape& expected) const {
  const Tensor& t = tensor(name);
  if (t.shape() != expected) {
    throw ArchiveError(ArchiveError::Kind::kShapeMismatch,
                       "tensor '" + std::string(name) + "' has shape " +
                           shape_string(t.shape()) + ", expected " +
                           shape_string(expected));
  }
  return t;
}

std::string serialize_archive(const ModelArchive& archive) {
  nlohmann::json manifest;
  manifest["format_version"] = ModelArchive::kFormatVersion;
  manifest["kind"] = archive.kind;
  manifest["meta"] = archive.meta;
  manifest["tensors"] = nlohmann::json::array();
  for (const auto& [name, t] : archive.tensors) {
    manifest["tensors"].push_back({{"name", name}, {"shape", t.shape()}});
  }
  const std::string text = manifest.dump();

  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, ModelArchive::kFormatVersion);
  put_u64(out, text.size());
  out += text;
  for (const auto& [name, t] : archive.tensors) {
    for (double v : t.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

ModelArchive parse_archive(std::string_view bytes,
                           std::string_view expected_kind) {
  using K = ArchiveError::Kind;
  if (bytes.size() < kHeaderBytes) {
    throw ArchiveError(K::kTruncated, "archive shorter than its header");
  }
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw ArchiveError(K::kBadMagic, "not a model archive (bad magic)");
  }
  const auto version = static_cast<std::uint32_t>(get_le(bytes, 8, 4));
  if (version != ModelArchive::kFormatVersion) {
    throw ArchiveError(K::kVersionMismatch,
                       "archive format version " + std::to_string(version) +
                           ", this build reads version " +
                           std::to_string(ModelArchive::kFormatVersion));
  }
  const std::uint64_t manifest_size = get_le(bytes, 12, 8);
  if (manifest_size > bytes.size() - kHeaderBytes) {
    throw ArchiveError(K::kTruncated, "archive truncated inside manifest");
  }
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(bytes.substr(kHeaderBytes, manifest_size));
  } catch (const nlohmann::json::exception& e) {
    throw ArchiveError(K::kCorruptManifest,
                       std::string("unreadable manifest: ") + e.what());
  }

  ModelArchive archive;
  std::vector<std::pair<std::string, Shape>> layout;
  try {
    if (manifest.at("format_version").get<std::uint32_t>() != version) {
      throw ArchiveError(K::kCorruptManifest,
                         "manifest version disagrees with header");
    }
    archive.kind = manifest.at("kind").get<std::string>();
    archive.meta = manifest.at("meta");
    for (const auto& entry : manifest.at("tensors")) {
      layout.emplace_back(entry.at("name").get<std::string>(),
                          entry.at("shape").get<Shape>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ArchiveError(K::kCorruptManifest,
                       std::string("malformed manifest: ") + e.what());
  }
  if (archive.kind != expected_kind) {
    throw ArchiveError(K::kKindMismatch, "archive holds a '" + archive.kind +
                                             "' model, expected '" +
                                             std::string(expected_kind) + "'");
  }

  std::size_t offset = kHeaderBytes + manifest_size;
  for (auto& [name, shape] : layout) {
    if (shape.empty() || shape_size(shape) == 0) {
      throw ArchiveError(K::kShapeMismatch,
                         "tensor '" + name + "' has an empty shape");
    }
    const std::size_t n = shape_size(shape);
    if ((bytes.size() - offset) / 8 < n) {
      throw ArchiveError(K::kTruncated,
                         "archive truncated inside tensor '" + name + "'");
    }
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i, offset += 8) {
      values[i] = std::bit_cast<double>(get_le(bytes, offset, 8));
    }
    archive.tensors.emplace_back(std::move(name),
                                 Tensor(std::move(shape), std::move(values)));
  }
  if (offset != bytes.size()) {
    throw ArchiveError(K::kCorruptManifest,
                       "archive has " + std::to_string(bytes.size() - offset) +
                           " trailing bytes");
  }
  return archive;
}

void save_archive(const std::filesystem::path& path,
                  const ModelArchive& archive) {
  write_file_atomic(path, serialize_archive(archive));
}

ModelArchive load_archive(const std::filesystem::path& path,
                          std::string_view expected_kind) {
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const Error& e) {
    throw ArchiveError(ArchiveError::Kind::kIo, e.what());
  }
  return parse_archive(bytes, expected_kind);
}

}  // namespace mimick
