#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "mimick/conllu.hpp"
#include "mimick/embeddings.hpp"
#include "mimick/lstm.hpp"
#include "mimick/mimick_model.hpp"
#include "mimick/random.hpp"
#include "mimick/tape.hpp"
#include "mimick/tensor.hpp"

namespace mimick {

enum class Variant { kNoChar, kMimick, kCharToTag, kBoth };
enum class LossMode { kSum, kWeighted };

std::string_view to_string(Variant variant);
std::string_view to_string(LossMode mode);
// Accepts "no-char", "mimick", "char2tag" (or "char-to-tag") and "both".
Variant parse_variant(std::string_view text);
// Accepts "sum" and "weighted".
LossMode parse_loss_mode(std::string_view text);

bool uses_mimick(Variant variant);
bool uses_char_to_tag(Variant variant);

// Task-trained character BiLSTM whose final states are appended to the word
// vector.
struct CharToTagParams {
  CharVocabulary chars;
  Parameter char_embeddings;
  LstmCell forward;
  LstmCell backward;

  static CharToTagParams create(CharVocabulary chars, std::size_t char_dim,
                                std::size_t hidden, Rng& rng);
  std::size_t output_dim() const { return 2 * forward.hidden_size; }
  // [h_f^n; h_b^0] over `char_ids` (non-empty).
  Var encode(Tape& tape, std::span<const std::size_t> char_ids) const;
  ParameterList parameters();
  std::vector<const Parameter*> parameters() const;
};

// How word representations are initialized and backed off.
struct WordRepSpec {
  Variant variant = Variant::kNoChar;
  EmbeddingTable table{1};
  // Required by the mimick and both variants. Shared so callers can observe
  // its inference counter.
  std::shared_ptr<const MimickModel> mimick;
  // Built from the training forms by train_tagger when absent.
  std::optional<CharToTagParams> char_to_tag;

  // Throws ContractError for a variant whose prerequisites are missing, and
  // DimensionError when the mimick model and the table disagree.
  void validate() const;
};

struct TaggerArchitecture {
  std::size_t word_lstm_layers = 2;
  std::size_t word_lstm_hidden = 128;  // per direction
  std::size_t char_dim = 20;
  std::size_t char_hidden = 128;
};

// Two-layer feed-forward head: logits = O tanh(W h + b) + b_O.
struct TaggerHead {
  std::string name;
  Parameter hidden_weight;
  Parameter hidden_bias;
  Parameter output_weight;
  Parameter output_bias;

  std::size_t size() const { return output_bias.value().size(); }
};

class TaggerModel {
 public:
  // Head 0 is POS; head 1 + a is schema attribute a.
  static constexpr std::size_t kPosHead = 0;

  // Embedding layer rows: 0 = UNK, then every table word, then (mimick and
  // both variants) each training form missing from the table, initialized
  // with its mimicked vector.
  static TaggerModel create(const AttributeSchema& schema,
                            const WordRepSpec& spec,
                            const std::vector<std::string>& training_forms,
                            const TaggerArchitecture& arch, Rng& rng,
                            bool pos_only = false);

  Variant variant() const { return variant_; }
  // POS-only models carry no attribute heads and ignore FEATS.
  bool pos_only() const { return pos_only_; }
  const AttributeSchema& schema() const { return schema_; }
  const TaggerArchitecture& architecture() const { return arch_; }
  std::size_t word_dim() const { return embeddings_.value().cols(); }
  std::size_t input_dim() const;
  std::size_t state_dim() const { return 2 * arch_.word_lstm_hidden; }

  const Parameter& embeddings() const { return embeddings_; }
  Parameter& embeddings() { return embeddings_; }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  // Embedding row for a form, or nullopt when the form has no row.
  std::optional<std::size_t> row(std::string_view form) const;
  bool is_training_form(std::string_view form) const {
    return training_forms_.contains(std::string(form));
  }
  const std::unordered_set<std::string>& training_forms() const {
    return training_forms_;
  }

  const std::shared_ptr<const MimickModel>& mimick() const { return mimick_; }
  const std::optional<CharToTagParams>& char_to_tag() const {
    return char_to_tag_;
  }
  const std::vector<LstmCell>& forward_layers() const { return forward_; }
  const std::vector<LstmCell>& backward_layers() const { return backward_; }
  std::vector<LstmCell>& forward_layers() { return forward_; }
  std::vector<LstmCell>& backward_layers() { return backward_; }

  std::size_t head_count() const { return heads_.size(); }
  const TaggerHead& head(std::size_t i) const { return heads_[i]; }
  TaggerHead& head(std::size_t i) { return heads_[i]; }
  // "UPOS" names the POS head; other names are schema attributes.
  std::size_t head_index(std::string_view name) const;

  // Trainable parameters (the mimick model is frozen and excluded).
  ParameterList parameters();
  std::vector<const Parameter*> parameters() const;

  void save(const std::filesystem::path& path,
            const nlohmann::json& run_config = nlohmann::json::object()) const;
  static TaggerModel load(const std::filesystem::path& path);

 private:
  // Zero-valued parameters of the right shapes for `vocabulary`.
  static TaggerModel allocate(Variant variant, AttributeSchema schema,
                              const TaggerArchitecture& arch,
                              std::vector<std::string> vocabulary,
                              std::size_t word_dim,
                              std::optional<CharVocabulary> chars);

  Variant variant_ = Variant::kNoChar;
  bool pos_only_ = false;
  AttributeSchema schema_;
  TaggerArchitecture arch_;
  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, std::size_t> row_index_;
  std::unordered_set<std::string> training_forms_;
  Parameter embeddings_;
  std::shared_ptr<const MimickModel> mimick_;
  std::optional<CharToTagParams> char_to_tag_;
  std::vector<LstmCell> forward_;
  std::vector<LstmCell> backward_;
  std::vector<TaggerHead> heads_;
};

struct ForwardOptions {
  bool train = false;
  double dropout = 0.0;
  // Probability of replacing a character by UNK in the char-to-tag LSTM.
  double unk_char_rate = 0.0;
  Rng* rng = nullptr;  // required when train is set
};

// Word representation of a form: embedding row (with the variant's backoff)
// and the char-to-tag encoding when configured.
Var word_representation(Tape& tape, const TaggerModel& model,
                        std::string_view form,
                        const ForwardOptions& options = {});

// One state of width state_dim() per token.
std::vector<Var> sentence_forward(Tape& tape, const TaggerModel& model,
                                  const Sentence& sentence,
                                  const ForwardOptions& options = {});

Var head_logits(Tape& tape, const TaggerModel& model, Var state,
                std::size_t head);
std::vector<double> head_logits(const TaggerModel& model,
                                std::span<const double> state,
                                std::size_t head);
// Softmax of the head's logits for one token state.
std::vector<double> attribute_distribution(const TaggerModel& model,
                                           std::span<const double> state,
                                           std::size_t head);
std::vector<double> attribute_distribution(const TaggerModel& model,
                                           std::span<const double> state,
                                           std::string_view head_name);

// Gold class per head for each token; throws SchemaError for a tag, attribute
// or value outside the schema.
std::vector<std::vector<std::size_t>> gold_classes(const TaggerModel& model,
                                                   const Sentence& sentence);

// Sum over heads and tokens of -log Pr(gold). Weighted mode scales each
// attribute's sum by its training proportion; POS keeps weight 1.
Var joint_loss(Tape& tape, const TaggerModel& model,
               std::span<const Var> states, const Sentence& sentence,
               LossMode mode);
double joint_loss(const TaggerModel& model, const Sentence& sentence,
                  LossMode mode);

// Argmax per head, lowest index on ties; NONE becomes an absent attribute.
Sentence decode_states(const TaggerModel& model, const Sentence& sentence,
                       const std::vector<std::vector<double>>& states);
Sentence tag(const TaggerModel& model, const Sentence& sentence);
// Tags sentences in parallel; output identical to tag_corpus_serial.
Corpus tag_corpus(const TaggerModel& model, const Corpus& corpus);
Corpus tag_corpus_serial(const TaggerModel& model, const Corpus& corpus);

struct TaggerTrainConfig {
  LossMode loss = LossMode::kSum;
  int epochs = 40;
  // Training sets at or below this many tokens train for twice the epochs.
  std::size_t low_resource_tokens = 5000;
  bool auto_double_epochs = true;
  double dropout = 0.5;
  double learning_rate = 0.01;
  double momentum = 0.9;
  double clip_norm = 5.0;
  double unk_char_rate = 0.05;
  bool pos_only = false;
  TaggerArchitecture architecture;
  std::uint64_t seed = 1;

  int effective_epochs(std::size_t train_tokens) const;
};

nlohmann::json to_json(const TaggerTrainConfig& cfg);

struct TaggerEpoch {
  int epoch = 0;
  double train_loss = 0.0;  // mean per training sentence
  double dev_pos_accuracy = 0.0;  // NaN without a dev split
  double dev_micro_f1 = 0.0;
};

struct TaggerTrainResult {
  TaggerModel model;
  std::vector<TaggerEpoch> trace;
  int epochs = 0;
};

TaggerTrainResult train_tagger(const CorpusSplit& corpus, WordRepSpec spec,
                               const TaggerTrainConfig& cfg);

}  // namespace mimick
