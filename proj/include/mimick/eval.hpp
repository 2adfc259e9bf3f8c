#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "mimick/conllu.hpp"
#include "mimick/embeddings.hpp"

namespace mimick {

// Gold and predicted corpora aligned token by token, with a per-token flag for
// forms absent from the tagger's training vocabulary.
class TaggedCorpusPair {
 public:
  // Throws ContractError naming the first divergence (sentence count, token
  // count or form).
  TaggedCorpusPair(Corpus gold, Corpus predicted,
                   const std::unordered_set<std::string>& training_forms);
  TaggedCorpusPair(Corpus gold, Corpus predicted,
                   std::vector<std::vector<bool>> oov);

  const Corpus& gold() const { return gold_; }
  const Corpus& predicted() const { return predicted_; }
  bool oov(std::size_t sentence, std::size_t token) const {
    return oov_[sentence][token];
  }
  std::size_t token_count() const;
  std::size_t oov_count() const;

 private:
  Corpus gold_;
  Corpus predicted_;
  std::vector<std::vector<bool>> oov_;
};

enum class TokenSubset { kAll, kOovOnly, kInVocabOnly };

// Fraction of tokens in the subset whose predicted POS equals the gold POS.
// An empty subset throws ContractError.
double pos_accuracy(const TaggedCorpusPair& pair,
                    TokenSubset subset = TokenSubset::kAll);
// Per-token POS correctness in corpus order, restricted to `subset`.
std::vector<bool> pos_correctness(const TaggedCorpusPair& pair,
                                  TokenSubset subset = TokenSubset::kAll);

struct F1Counts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Fills precision/recall/F1 from the counts. Empty denominators give 0,
// except that no predicted and no gold assignments at all is a vacuous 1.
void finalize_f1(F1Counts& counts);

struct MicroF1Report {
  F1Counts total;
  std::map<std::string, F1Counts> per_attribute;
};

// Slot-level micro F1 over non-NONE attribute assignments (POS excluded). A
// mismatching non-NONE prediction is both a false positive and a false
// negative.
MicroF1Report micro_f1(const TaggedCorpusPair& pair);

struct SimilarityPair {
  std::string first;
  std::string second;
  double score = 0.0;
};
using SimilarityDataset = std::vector<SimilarityPair>;

// Tab-separated "word1 word2 score [extra columns...]".
SimilarityDataset parse_similarity_dataset(std::string_view text);
SimilarityDataset read_similarity_dataset(const std::string& path);

// Average (fractional) ranks, 1-based.
std::vector<double> average_ranks(const std::vector<double>& values);
double pearson(const std::vector<double>& x, const std::vector<double>& y);
// Pearson correlation of average ranks. Throws ContractError for fewer than
// two points or a constant input.
double spearman_rho(const std::vector<double>& x, const std::vector<double>& y);

struct SpearmanResult {
  double rho = 0.0;
  std::size_t resolved = 0;
  std::size_t total = 0;
};

using VectorResolver =
    std::function<std::optional<std::vector<double>>(const std::string&)>;

// Cosine similarity of resolved vectors against the human scores. Pairs with
// an unresolvable word (or a zero vector) are excluded and counted.
SpearmanResult spearman(const SimilarityDataset& dataset,
                        const VectorResolver& resolve);
SpearmanResult spearman(const SimilarityDataset& dataset,
                        const EmbeddingTable& table, BackoffPolicy policy,
                        const OovEmbedder* mimick);

struct McNemarResult {
  std::uint64_t b = 0;  // A correct, B wrong
  std::uint64_t c = 0;  // A wrong, B correct
  double p_value = 1.0;
  bool exact = true;
  bool significant = false;
};

inline constexpr std::uint64_t kMcNemarExactLimit = 1000;

// Two-sided exact binomial p: min(1, 2 * P[X <= min(b, c)]), X ~ Bin(b+c, 1/2).
double mcnemar_exact_p(std::uint64_t b, std::uint64_t c);
// Continuity-corrected chi-square: (|b - c| - 1)^2 / (b + c) against chi2(1).
double mcnemar_chi2_p(std::uint64_t b, std::uint64_t c);

McNemarResult mcnemar(const std::vector<bool>& correct_a,
                      const std::vector<bool>& correct_b, double alpha = 0.01);
McNemarResult mcnemar_from_counts(std::uint64_t b, std::uint64_t c,
                                  double alpha = 0.01);

struct EvalReport {
  std::size_t tokens = 0;
  std::size_t oov_tokens = 0;
  double pos_accuracy = 0.0;
  std::optional<double> pos_accuracy_oov;
  MicroF1Report f1;
  std::optional<McNemarResult> mcnemar;
};

EvalReport evaluate(const TaggedCorpusPair& pair);
// Key/value text with "[attribute NAME]" and "[mcnemar]" sections; see
// docs/formats.md.
std::string format_report(const EvalReport& report);

}  // namespace mimick
