#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mimick {

inline constexpr std::string_view kUnkToken = "<UNK>";

// Word forms (exact, case-sensitive) with fixed-dimension vectors, plus an
// optional UNK vector carried in-band as the form "<UNK>".
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

  // Throws ContractError on duplicates or if the form is "<UNK>".
  void add(std::string word, std::span<const double> vector);
  std::optional<std::size_t> find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }

  const std::string& word(std::size_t i) const { return words_[i]; }
  const std::vector<std::string>& words() const { return words_; }
  std::span<const double> vector(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * dim_, dim_);
  }
  // Row-major size() x dim() matrix of all vectors.
  std::span<const double> matrix() const { return data_; }

  bool has_unk() const { return !unk_.empty(); }
  std::span<const double> unk() const { return unk_; }
  void set_unk(std::span<const double> vector);

 private:
  std::size_t dim_;
  std::vector<std::string> words_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> unk_;
};

// Text format: header "V d", then V lines "word v1 ... vd" separated by single
// spaces; V counts the optional "<UNK>" line. Errors carry line numbers.
EmbeddingTable read_embeddings(std::istream& in);
EmbeddingTable read_embeddings_file(const std::string& path);
// Deterministic: table order, "<UNK>" last, 17 significant digits.
void write_embeddings(const EmbeddingTable& table, std::ostream& out);
std::string embeddings_to_string(const EmbeddingTable& table);

// Source of vectors for words outside a table (a trained mimick model).
class OovEmbedder {
 public:
  virtual ~OovEmbedder() = default;
  virtual std::size_t output_dim() const = 0;
  virtual std::vector<double> embed(std::string_view word) const = 0;
};

enum class BackoffPolicy { kUnkWithLowercase, kMimickDirect, kTableOnly };
enum class Provenance { kInVocab, kLowercase, kUnk, kMimicked };

std::string_view to_string(BackoffPolicy policy);
std::string_view to_string(Provenance provenance);

struct LookupResult {
  std::vector<double> vector;
  Provenance provenance;
};

// In-vocabulary words resolve to their own vector under every policy. OOV:
//   kUnkWithLowercase: lowercased form if present, else UNK (UNK required);
//   kMimickDirect: the embedder's output, no lowercase attempt;
//   kTableOnly: LookupError.
LookupResult lookup(const EmbeddingTable& table, BackoffPolicy policy,
                    const OovEmbedder* mimick, std::string_view word);

}  // namespace mimick
