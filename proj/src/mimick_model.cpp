#include "mimick/mimick_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "mimick/errors.hpp"
#include "mimick/init.hpp"
#include "mimick/kernels.hpp"
#include "mimick/ops.hpp"
#include "mimick/optimizer.hpp"
#include "mimick/utf8.hpp"

namespace mimick {

CharVocabulary CharVocabulary::build(const std::vector<std::string>& words) {
  std::set<char32_t> seen;
  for (const auto& w : words) {
    for (char32_t c : utf8::decode(w)) seen.insert(c);
  }
  return from_characters({seen.begin(), seen.end()});
}

CharVocabulary CharVocabulary::from_characters(
    std::vector<char32_t> characters) {
  CharVocabulary v;
  for (std::size_t i = 0; i < characters.size(); ++i) {
    if (i > 0 && characters[i] <= characters[i - 1]) {
      throw ContractError("character inventory must be strictly increasing");
    }
    v.index_.emplace(characters[i], i + 1);
  }
  v.characters_ = std::move(characters);
  return v;
}

std::size_t CharVocabulary::index(char32_t c) const {
  auto it = index_.find(c);
  return it == index_.end() ? kUnk : it->second;
}

std::vector<std::size_t> CharVocabulary::encode(std::string_view word) const {
  std::vector<std::size_t> ids;
  for (char32_t c : utf8::decode(word)) ids.push_back(index(c));
  return ids;
}

MimickModel::MimickModel(const MimickModel& other)
    : chars_(other.chars_),
      arch_(other.arch_),
      output_dim_(other.output_dim_),
      char_embeddings_(other.char_embeddings_),
      forward_lstm_(other.forward_lstm_),
      backward_lstm_(other.backward_lstm_),
      hidden_weight_(other.hidden_weight_),
      hidden_bias_(other.hidden_bias_),
      output_weight_(other.output_weight_),
      output_bias_(other.output_bias_) {}

MimickModel::MimickModel(MimickModel&& other) noexcept
    : chars_(std::move(other.chars_)),
      arch_(other.arch_),
      output_dim_(other.output_dim_),
      char_embeddings_(std::move(other.char_embeddings_)),
      forward_lstm_(std::move(other.forward_lstm_)),
      backward_lstm_(std::move(other.backward_lstm_)),
      hidden_weight_(std::move(other.hidden_weight_)),
      hidden_bias_(std::move(other.hidden_bias_)),
      output_weight_(std::move(other.output_weight_)),
      output_bias_(std::move(other.output_bias_)) {}

MimickModel& MimickModel::operator=(const MimickModel& other) {
  if (this != &other) *this = MimickModel(other);
  return *this;
}

MimickModel& MimickModel::operator=(MimickModel&& other) noexcept {
  chars_ = std::move(other.chars_);
  arch_ = other.arch_;
  output_dim_ = other.output_dim_;
  char_embeddings_ = std::move(other.char_embeddings_);
  forward_lstm_ = std::move(other.forward_lstm_);
  backward_lstm_ = std::move(other.backward_lstm_);
  hidden_weight_ = std::move(other.hidden_weight_);
  hidden_bias_ = std::move(other.hidden_bias_);
  output_weight_ = std::move(other.output_weight_);
  output_bias_ = std::move(other.output_bias_);
  inference_count_.store(0);
  return *this;
}

MimickModel MimickModel::zeros(CharVocabulary chars, std::size_t output_dim,
                               const MimickArchitecture& arch) {
  if (output_dim == 0 || arch.char_dim == 0 || arch.lstm_hidden == 0 ||
      arch.mlp_hidden == 0) {
    throw DimensionError("mimick model sizes must be positive");
  }
  MimickModel m;
  m.arch_ = arch;
  m.output_dim_ = output_dim;
  m.char_embeddings_ = Parameter(
      "chars", Tensor({chars.size(), arch.char_dim}), /*row_sparse=*/true);
  m.chars_ = std::move(chars);
  m.forward_lstm_ = LstmCell::zeros("forward", arch.char_dim, arch.lstm_hidden);
  m.backward_lstm_ =
      LstmCell::zeros("backward", arch.char_dim, arch.lstm_hidden);
  m.hidden_weight_ =
      Parameter("hidden.weight", Tensor({arch.mlp_hidden, 2 * arch.lstm_hidden}));
  m.hidden_bias_ = Parameter("hidden.bias", Tensor({arch.mlp_hidden}));
  m.output_weight_ =
      Parameter("output.weight", Tensor({output_dim, arch.mlp_hidden}));
  m.output_bias_ = Parameter("output.bias", Tensor({output_dim}));
  return m;
}

MimickModel MimickModel::create(CharVocabulary chars, std::size_t output_dim,
                                const MimickArchitecture& arch, Rng& rng) {
  MimickModel m = zeros(std::move(chars), output_dim, arch);
  m.char_embeddings_.value() =
      char_embedding_init(m.chars_.size(), arch.char_dim, rng);
  m.forward_lstm_ =
      LstmCell::create("forward", arch.char_dim, arch.lstm_hidden, rng);
  m.backward_lstm_ =
      LstmCell::create("backward", arch.char_dim, arch.lstm_hidden, rng);
  m.hidden_weight_.value() =
      glorot_uniform(arch.mlp_hidden, 2 * arch.lstm_hidden, rng);
  m.output_weight_.value() = glorot_uniform(output_dim, arch.mlp_hidden, rng);
  return m;
}

Var MimickModel::forward(Tape& tape,
                         std::span<const std::size_t> char_ids) const {
  if (char_ids.empty()) throw ContractError("mimick_forward: empty word");
  std::vector<Var> embedded;
  embedded.reserve(char_ids.size());
  for (std::size_t id : char_ids) {
    embedded.push_back(lookup_row(tape, char_embeddings_, id));
  }
  LstmState fwd = lstm_initial_state(tape, forward_lstm_);
  for (Var x : embedded) fwd = lstm_step(tape, forward_lstm_, x, fwd);
  LstmState bwd = lstm_initial_state(tape, backward_lstm_);
  for (auto it = embedded.rbegin(); it != embedded.rend(); ++it) {
    bwd = lstm_step(tape, backward_lstm_, *it, bwd);
  }
  const Var both = concat(tape, {fwd.h, bwd.h});
  const Var hidden = tanh(tape, affine(tape, both, hidden_weight_, hidden_bias_));
  return affine(tape, hidden, output_weight_, output_bias_);
}

Var MimickModel::forward(Tape& tape, std::string_view word) const {
  const auto ids = chars_.encode(word);
  return forward(tape, ids);
}

Var MimickModel::loss(Tape& tape, std::span<const std::size_t> char_ids,
                      std::span<const double> target) const {
  if (target.size() != output_dim_) {
    throw DimensionError("mimick_loss: target has dimension " +
                         std::to_string(target.size()) + ", model outputs " +
                         std::to_string(output_dim_));
  }
  return squared_distance(tape, forward(tape, char_ids), target);
}

std::vector<double> MimickModel::embed(std::string_view word) const {
  inference_count_.fetch_add(1, std::memory_order_relaxed);
  Tape tape(false);
  const auto v = tape.value(forward(tape, word));
  return {v.begin(), v.end()};
}

ParameterList MimickModel::parameters() {
  return {&char_embeddings_,   &forward_lstm_.weight,  &forward_lstm_.bias,
          &backward_lstm_.weight, &backward_lstm_.bias, &hidden_weight_,
          &hidden_bias_,       &output_weight_,        &output_bias_};
}

std::vector<const Parameter*> MimickModel::parameters() const {
  return {&char_embeddings_,   &forward_lstm_.weight,  &forward_lstm_.bias,
          &backward_lstm_.weight, &backward_lstm_.bias, &hidden_weight_,
          &hidden_bias_,       &output_weight_,        &output_bias_};
}

nlohmann::json MimickModel::meta() const {
  nlohmann::json inventory = nlohmann::json::array();
  for (char32_t c : chars_.characters()) {
    inventory.push_back(static_cast<std::uint32_t>(c));
  }
  return {{"char_inventory", inventory},
          {"char_dim", arch_.char_dim},
          {"lstm_hidden", arch_.lstm_hidden},
          {"mlp_hidden", arch_.mlp_hidden},
          {"output_dim", output_dim_}};
}

void MimickModel::write_to(ModelArchive& archive,
                           const std::string& prefix) const {
  for (const Parameter* p : parameters()) {
    archive.add(prefix + p->name(), p->value());
  }
}

MimickModel MimickModel::read_from(const ModelArchive& archive,
                                   const nlohmann::json& meta,
                                   const std::string& prefix) {
  MimickArchitecture arch;
  std::size_t output_dim = 0;
  std::vector<char32_t> characters;
  try {
    arch.char_dim = meta.at("char_dim").get<std::size_t>();
    arch.lstm_hidden = meta.at("lstm_hidden").get<std::size_t>();
    arch.mlp_hidden = meta.at("mlp_hidden").get<std::size_t>();
    output_dim = meta.at("output_dim").get<std::size_t>();
    for (const auto& c : meta.at("char_inventory")) {
      characters.push_back(static_cast<char32_t>(c.get<std::uint32_t>()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ArchiveError(ArchiveError::Kind::kCorruptManifest,
                       std::string("mimick manifest: ") + e.what());
  }
  MimickModel m;
  try {
    m = zeros(CharVocabulary::from_characters(std::move(characters)),
              output_dim, arch);
  } catch (const Error& e) {
    throw ArchiveError(ArchiveError::Kind::kCorruptManifest, e.what());
  }
  for (Parameter* p : m.parameters()) {
    p->value() = archive.tensor(prefix + p->name(), p->shape());
  }
  return m;
}

void MimickModel::save(const std::filesystem::path& path,
                       const nlohmann::json& run_config) const {
  ModelArchive archive;
  archive.kind = "mimick";
  archive.meta = {{"model", meta()}, {"run_config", run_config}};
  write_to(archive, "");
  save_archive(path, archive);
}

MimickModel MimickModel::load(const std::filesystem::path& path) {
  const ModelArchive archive = load_archive(path, "mimick");
  if (!archive.meta.contains("model")) {
    throw ArchiveError(ArchiveError::Kind::kCorruptManifest,
                       "mimick archive without model metadata");
  }
  return read_from(archive, archive.meta["model"], "");
}

std::vector<double> mimick_forward(const MimickModel& model,
                                   std::string_view word) {
  return model.embed(word);
}

double mimick_loss(const MimickModel& model, std::string_view word,
                   std::span<const double> target) {
  Tape tape(false);
  const auto ids = model.chars().encode(word);
  return tape.scalar(model.loss(tape, ids, target));
}

std::size_t mimick_dev_size(std::size_t vocab, double dev_fraction) {
  return static_cast<std::size_t>(
      std::llround(dev_fraction * static_cast<double>(vocab)));
}

MimickTrainResult train_mimick(const EmbeddingTable& table,
                               const MimickTrainConfig& cfg) {
  if (table.size() < 2) {
    throw ContractError("train_mimick needs at least 2 words, table has " +
                        std::to_string(table.size()));
  }
  if (cfg.epochs < 1) throw ContractError("epochs must be >= 1");
  if (!(cfg.lr_decay >= 0)) throw ContractError("lr decay must be >= 0");
  if (!(cfg.dev_fraction >= 0 && cfg.dev_fraction < 0.5)) {
    throw ContractError("dev fraction must lie in [0, 0.5)");
  }
  if (!(cfg.unk_char_rate >= 0 && cfg.unk_char_rate < 1)) {
    throw ContractError("UNK character rate must lie in [0, 1)");
  }

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(table.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  const std::size_t n_dev = mimick_dev_size(table.size(), cfg.dev_fraction);
  std::vector<std::size_t> dev(order.begin(), order.begin() + n_dev);
  std::vector<std::size_t> train(order.begin() + n_dev, order.end());
  std::sort(dev.begin(), dev.end());
  std::sort(train.begin(), train.end());

  MimickTrainResult result;
  for (std::size_t i : train) result.train_words.push_back(table.word(i));
  for (std::size_t i : dev) result.dev_words.push_back(table.word(i));

  Rng init_rng = rng.fork();
  result.model =
      MimickModel::create(CharVocabulary::build(result.train_words),
                          table.dim(), cfg.architecture(), init_rng);
  MimickModel& model = result.model;
  MomentumSgd optimizer(model.parameters(), cfg.learning_rate, cfg.momentum,
                        cfg.clip_norm);

  std::vector<std::vector<std::size_t>> encoded(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    encoded[i] = model.chars().encode(table.word(i));
  }

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    optimizer.set_learning_rate(cfg.learning_rate /
                                (1.0 + cfg.lr_decay * (epoch - 1)));
    rng.shuffle(train);
    double total = 0;
    for (std::size_t i : train) {
      std::vector<std::size_t> ids = encoded[i];
      for (std::size_t& id : ids) {
        if (rng.bernoulli(cfg.unk_char_rate)) id = CharVocabulary::kUnk;
      }
      Tape tape(false);
      const Var loss = model.loss(tape, ids, table.vector(i));
      total += tape.scalar(loss);
      tape.backward(loss);
      optimizer.step();
    }
    auto mean_loss = [&](const std::vector<std::size_t>& words) {
      if (words.empty()) return std::numeric_limits<double>::quiet_NaN();
      double sum = 0;
      for (std::size_t i : words) {
        Tape tape(false);
        sum += tape.scalar(model.loss(tape, encoded[i], table.vector(i)));
      }
      return sum / static_cast<double>(words.size());
    };
    MimickEpoch e;
    e.epoch = epoch;
    e.sgd_loss = total / static_cast<double>(train.size());
    e.train_loss = mean_loss(train);
    e.dev_loss = mean_loss(dev);
    result.trace.push_back(e);
  }
  return result;
}

EmbeddingTable infer_oov(const MimickModel& model, const EmbeddingTable& table,
                         const std::vector<std::string>& words) {
  if (model.output_dim() != table.dim()) {
    throw DimensionError("mimick model outputs dimension " +
                         std::to_string(model.output_dim()) +
                         ", table has " + std::to_string(table.dim()));
  }
  EmbeddingTable out(table.dim());
  for (const auto& w : words) {
    if (w.empty() || w == kUnkToken || out.contains(w)) continue;
    out.add(w, model.embed(w));
  }
  return out;
}

namespace {

std::vector<Neighbor> rank_neighbors(const EmbeddingTable& table,
                                     std::span<const double> query,
                                     std::size_t k, bool serial) {
  if (query.size() != table.dim()) {
    throw DimensionError("query has dimension " + std::to_string(query.size()) +
                         ", table has " + std::to_string(table.dim()));
  }
  if (k == 0 || k > table.size()) {
    throw ContractError("k must lie in [1, " + std::to_string(table.size()) +
                        "], got " + std::to_string(k));
  }
  if (std::all_of(query.begin(), query.end(), [](double v) { return v == 0; })) {
    throw ContractError("nearest_neighbors: zero query vector");
  }
  std::vector<double> scores(table.size());
  if (serial) {
    kernels::serial::cosine_scores(table.matrix(), table.size(), table.dim(),
                                   query, scores);
  } else {
    kernels::cosine_scores(table.matrix(), table.size(), table.dim(), query,
                           scores);
  }
  std::vector<std::size_t> idx(table.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  std::vector<Neighbor> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.push_back({table.word(idx[i]), scores[idx[i]]});
  }
  return out;
}

}  // namespace

std::vector<Neighbor> nearest_neighbors(const EmbeddingTable& table,
                                        std::span<const double> query,
                                        std::size_t k) {
  return rank_neighbors(table, query, k, false);
}

std::vector<Neighbor> nearest_neighbors_serial(const EmbeddingTable& table,
                                               std::span<const double> query,
                                               std::size_t k) {
  return rank_neighbors(table, query, k, true);
}

}  // namespace mimick
