#include "mimick/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mimick/errors.hpp"
#include "mimick/utf8.hpp"

namespace mimick {

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw ContractError("embedding dimension must be positive");
}

void EmbeddingTable::add(std::string word, std::span<const double> vector) {
  if (vector.size() != dim_) {
    throw DimensionError("vector for '" + word + "' has dimension " +
                         std::to_string(vector.size()) + ", table has " +
                         std::to_string(dim_));
  }
  if (word.empty()) throw ContractError("empty word form");
  if (word == kUnkToken) {
    throw ContractError("'<UNK>' is reserved; use set_unk");
  }
  if (!index_.emplace(word, words_.size()).second) {
    throw ContractError("duplicate word '" + word + "'");
  }
  words_.push_back(std::move(word));
  data_.insert(data_.end(), vector.begin(), vector.end());
}

std::optional<std::size_t> EmbeddingTable::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingTable::set_unk(std::span<const double> vector) {
  if (vector.size() != dim_) {
    throw DimensionError("UNK vector has dimension " +
                         std::to_string(vector.size()) + ", table has " +
                         std::to_string(dim_));
  }
  unk_.assign(vector.begin(), vector.end());
}

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(' ', start);
    fields.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line, const char* what) {
  T value{};
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw ParseError(line, std::string("unparseable ") + what + " '" +
                               std::string(field) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) {
      throw ParseError(line, std::string("non-finite ") + what + " '" +
                                 std::string(field) + "'");
    }
  }
  return value;
}

void append_number(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.append(buf, ptr);
}

}  // namespace

EmbeddingTable read_embeddings(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(1, "missing header 'V d'");
  const auto header = split_spaces(line);
  if (header.size() != 2) throw ParseError(1, "header must be 'V d'");
  const auto rows = parse_number<std::size_t>(header[0], 1, "row count");
  const auto dim = parse_number<std::size_t>(header[1], 1, "dimension");
  if (dim == 0) throw ParseError(1, "dimension must be positive");

  EmbeddingTable table(dim);
  std::vector<double> vec(dim);
  for (std::size_t r = 0; r < rows; ++r) {
    ++line_no;
    if (!std::getline(in, line)) {
      throw ParseError(line_no, "expected " + std::to_string(rows) +
                                    " rows, found " + std::to_string(r));
    }
    const auto fields = split_spaces(line);
    if (fields.size() != dim + 1) {
      throw ParseError(line_no, "expected word and " + std::to_string(dim) +
                                    " values, found " +
                                    std::to_string(fields.size() - 1) +
                                    " values");
    }
    if (fields[0].empty()) throw ParseError(line_no, "empty word form");
    for (std::size_t k = 0; k < dim; ++k) {
      vec[k] = parse_number<double>(fields[k + 1], line_no, "number");
    }
    if (fields[0] == kUnkToken) {
      if (table.has_unk()) throw ParseError(line_no, "duplicate word '<UNK>'");
      table.set_unk(vec);
      continue;
    }
    if (table.contains(fields[0])) {
      throw ParseError(line_no,
                       "duplicate word '" + std::string(fields[0]) + "'");
    }
    table.add(std::string(fields[0]), vec);
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty()) {
      throw ParseError(line_no, "more rows than the header count " +
                                    std::to_string(rows));
    }
  }
  return table;
}

EmbeddingTable read_embeddings_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_embeddings(in);
}

std::string embeddings_to_string(const EmbeddingTable& table) {
  std::string out;
  out += std::to_string(table.size() + (table.has_unk() ? 1 : 0));
  out += ' ';
  out += std::to_string(table.dim());
  out += '\n';
  auto row = [&](std::string_view word, std::span<const double> v) {
    out += word;
    for (double x : v) {
      out += ' ';
      append_number(out, x);
    }
    out += '\n';
  };
  for (std::size_t i = 0; i < table.size(); ++i) {
    row(table.word(i), table.vector(i));
  }
  if (table.has_unk()) row(kUnkToken, table.unk());
  return out;
}

void write_embeddings(const EmbeddingTable& table, std::ostream& out) {
  out << embeddings_to_string(table);
  if (!out) throw Error("error writing embeddings");
}

std::string_view to_string(BackoffPolicy policy) {
  switch (policy) {
    case BackoffPolicy::kUnkWithLowercase: return "unk-with-lowercase-backoff";
    case BackoffPolicy::kMimickDirect: return "mimick-direct";
    case BackoffPolicy::kTableOnly: return "table-only";
  }
  return "?";
}

std::string_view to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::kInVocab: return "in-vocab";
    case Provenance::kLowercase: return "lowercase";
    case Provenance::kUnk: return "unk";
    case Provenance::kMimicked: return "mimicked";
  }
  return "?";
}

LookupResult lookup(const EmbeddingTable& table, BackoffPolicy policy,
                    const OovEmbedder* mimick, std::string_view word) {
  if (policy == BackoffPolicy::kUnkWithLowercase && !table.has_unk()) {
    throw ContractError("unk-with-lowercase-backoff needs a table with <UNK>");
  }
  if (policy == BackoffPolicy::kMimickDirect) {
    if (mimick == nullptr) {
      throw ContractError("mimick-direct needs a trained mimick model");
    }
    if (mimick->output_dim() != table.dim()) {
      throw DimensionError("mimick output dimension " +
                           std::to_string(mimick->output_dim()) +
                           " differs from table dimension " +
                           std::to_string(table.dim()));
    }
  }
  if (auto i = table.find(word)) {
    const auto v = table.vector(*i);
    return {{v.begin(), v.end()}, Provenance::kInVocab};
  }
  switch (policy) {
    case BackoffPolicy::kUnkWithLowercase: {
      if (auto i = table.find(utf8::to_lower(word))) {
        const auto v = table.vector(*i);
        return {{v.begin(), v.end()}, Provenance::kLowercase};
      }
      return {{table.unk().begin(), table.unk().end()}, Provenance::kUnk};
    }
    case BackoffPolicy::kMimickDirect:
      return {mimick->embed(word), Provenance::kMimicked};
    case BackoffPolicy::kTableOnly:
      break;
  }
  throw LookupError("word '" + std::string(word) +
                    "' is not in the embedding table");
}

}  // namespace mimick
