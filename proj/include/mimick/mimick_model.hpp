#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mimick/archive.hpp"
#include "mimick/embeddings.hpp"
#include "mimick/lstm.hpp"
#include "mimick/random.hpp"
#include "mimick/tape.hpp"
#include "mimick/tensor.hpp"

namespace mimick {

// Dense character index built from a word list. Index 0 is the reserved UNK
// character; seen characters follow in code-point order.
class CharVocabulary {
 public:
  static constexpr std::size_t kUnk = 0;

  CharVocabulary() = default;
  static CharVocabulary build(const std::vector<std::string>& words);
  // `characters` excludes UNK; must be strictly increasing.
  static CharVocabulary from_characters(std::vector<char32_t> characters);

  std::size_t size() const { return characters_.size() + 1; }
  std::size_t index(char32_t c) const;
  std::vector<std::size_t> encode(std::string_view word) const;
  const std::vector<char32_t>& characters() const { return characters_; }

  friend bool operator==(const CharVocabulary& a, const CharVocabulary& b) {
    return a.characters_ == b.characters_;
  }

 private:
  std::vector<char32_t> characters_;
  std::unordered_map<char32_t, std::size_t> index_;
};

struct MimickArchitecture {
  std::size_t char_dim = 20;
  std::size_t lstm_hidden = 50;
  std::size_t mlp_hidden = 50;
};

struct MimickTrainConfig {
  std::size_t char_dim = 20;
  std::size_t lstm_hidden = 50;
  std::size_t mlp_hidden = 50;
  int epochs = 60;
  double dev_fraction = 0.01;
  double learning_rate = 0.005;
  // Epoch e (from 1) steps with learning_rate / (1 + lr_decay * (e - 1)).
  double lr_decay = 0.03;
  double momentum = 0.9;
  // Global gradient-norm clipping threshold; 0 disables.
  double clip_norm = 5.0;
  // Per-occurrence probability of feeding the UNK character while training.
  double unk_char_rate = 0.05;
  std::uint64_t seed = 1;

  MimickArchitecture architecture() const {
    return {char_dim, lstm_hidden, mlp_hidden};
  }
};

// Character BiLSTM + MLP mapping a spelling to an embedding:
//   f(w) = O_T tanh(T_h [h_f^n; h_b^0] + b_h) + b_T
// where h_f^n is the forward LSTM's final state and h_b^0 the backward LSTM's
// final state after reading the word right to left.
class MimickModel final : public OovEmbedder {
 public:
  MimickModel() = default;
  // Copies and moves carry the parameters; the inference counter restarts.
  MimickModel(const MimickModel& other);
  MimickModel& operator=(const MimickModel& other);
  MimickModel(MimickModel&& other) noexcept;
  MimickModel& operator=(MimickModel&& other) noexcept;

  static MimickModel create(CharVocabulary chars, std::size_t output_dim,
                            const MimickArchitecture& arch, Rng& rng);
  // All parameters zero.
  static MimickModel zeros(CharVocabulary chars, std::size_t output_dim,
                           const MimickArchitecture& arch);

  const CharVocabulary& chars() const { return chars_; }
  const MimickArchitecture& architecture() const { return arch_; }
  std::size_t output_dim() const override { return output_dim_; }

  Var forward(Tape& tape, std::span<const std::size_t> char_ids) const;
  Var forward(Tape& tape, std::string_view word) const;
  // Squared Euclidean distance between f(w) and `target`.
  Var loss(Tape& tape, std::span<const std::size_t> char_ids,
           std::span<const double> target) const;

  // mimick_forward as a pure function; counts invocations.
  std::vector<double> embed(std::string_view word) const override;
  std::size_t inference_count() const { return inference_count_.load(); }

  Parameter& char_embeddings() { return char_embeddings_; }
  LstmCell& forward_lstm() { return forward_lstm_; }
  LstmCell& backward_lstm() { return backward_lstm_; }
  Parameter& hidden_weight() { return hidden_weight_; }
  Parameter& hidden_bias() { return hidden_bias_; }
  Parameter& output_weight() { return output_weight_; }
  Parameter& output_bias() { return output_bias_; }
  const Parameter& char_embeddings() const { return char_embeddings_; }
  const LstmCell& forward_lstm() const { return forward_lstm_; }
  const LstmCell& backward_lstm() const { return backward_lstm_; }
  const Parameter& hidden_weight() const { return hidden_weight_; }
  const Parameter& hidden_bias() const { return hidden_bias_; }
  const Parameter& output_weight() const { return output_weight_; }
  const Parameter& output_bias() const { return output_bias_; }

  ParameterList parameters();
  std::vector<const Parameter*> parameters() const;

  // Tensors are named with `prefix`; meta holds inventory and sizes.
  void write_to(ModelArchive& archive, const std::string& prefix) const;
  static MimickModel read_from(const ModelArchive& archive,
                               const nlohmann::json& meta,
                               const std::string& prefix);
  nlohmann::json meta() const;

  void save(const std::filesystem::path& path,
            const nlohmann::json& run_config = nlohmann::json::object()) const;
  static MimickModel load(const std::filesystem::path& path);

 private:
  CharVocabulary chars_;
  MimickArchitecture arch_;
  std::size_t output_dim_ = 0;
  Parameter char_embeddings_;
  LstmCell forward_lstm_;
  LstmCell backward_lstm_;
  Parameter hidden_weight_;
  Parameter hidden_bias_;
  Parameter output_weight_;
  Parameter output_bias_;
  mutable std::atomic<std::size_t> inference_count_{0};
};

std::vector<double> mimick_forward(const MimickModel& model,
                                   std::string_view word);
double mimick_loss(const MimickModel& model, std::string_view word,
                   std::span<const double> target);

struct MimickEpoch {
  int epoch = 0;
  // Mean over training words, evaluated after the epoch on clean spellings.
  double train_loss = 0.0;
  // Mean of the per-step losses actually minimized during the epoch (with
  // UNK-character substitution).
  double sgd_loss = 0.0;
  double dev_loss = 0.0;    // mean over dev words, NaN when the split is empty
};

struct MimickTrainResult {
  MimickModel model;
  std::vector<MimickEpoch> trace;
  std::vector<std::string> train_words;
  std::vector<std::string> dev_words;
};

// Number of dev words for a vocabulary of `vocab` words.
std::size_t mimick_dev_size(std::size_t vocab, double dev_fraction);

MimickTrainResult train_mimick(const EmbeddingTable& table,
                               const MimickTrainConfig& cfg);

// Mimicked vectors for exactly the requested words (duplicates collapse),
// whether or not they are in `table`.
EmbeddingTable infer_oov(const MimickModel& model, const EmbeddingTable& table,
                         const std::vector<std::string>& words);

struct Neighbor {
  std::string word;
  double similarity = 0.0;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Top-k table words by cosine similarity, descending, ties by table order.
std::vector<Neighbor> nearest_neighbors(const EmbeddingTable& table,
                                        std::span<const double> query,
                                        std::size_t k);
// Same ranking computed with the serial scan kernel.
std::vector<Neighbor> nearest_neighbors_serial(const EmbeddingTable& table,
                                               std::span<const double> query,
                                               std::size_t k);

}  // namespace mimick
