#include "mimick/tagger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "mimick/archive.hpp"
#include "mimick/errors.hpp"
#include "mimick/eval.hpp"
#include "mimick/init.hpp"
#include "mimick/ops.hpp"
#include "mimick/optimizer.hpp"
#include "mimick/utf8.hpp"

namespace mimick {

namespace {

constexpr std::string_view kPosHeadName = "UPOS";

std::string head_prefix(const std::string& name) { return "head." + name; }

std::string layer_name(bool forward, std::size_t layer) {
  return std::string("word.") + (forward ? "forward" : "backward") +
         std::to_string(layer);
}

TaggerHead make_head(const std::string& name, std::size_t size,
                     std::size_t state_dim) {
  const std::string p = head_prefix(name);
  return {name, Parameter(p + ".hidden.weight", Tensor({size, state_dim})),
          Parameter(p + ".hidden.bias", Tensor({size})),
          Parameter(p + ".output.weight", Tensor({size, size})),
          Parameter(p + ".output.bias", Tensor({size}))};
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

nlohmann::json schema_to_json(const AttributeSchema& schema) {
  nlohmann::json attrs = nlohmann::json::array();
  for (const auto& a : schema.attributes) {
    attrs.push_back({{"name", a.name},
                     {"values", a.values},
                     {"annotated_tokens", a.annotated_tokens},
                     {"proportion", a.proportion}});
  }
  return {{"pos_tags", schema.pos_tags},
          {"attributes", attrs},
          {"training_tokens", schema.training_tokens}};
}

AttributeSchema schema_from_json(const nlohmann::json& j) {
  AttributeSchema schema;
  schema.pos_tags = j.at("pos_tags").get<std::vector<std::string>>();
  schema.training_tokens = j.at("training_tokens").get<std::size_t>();
  for (const auto& a : j.at("attributes")) {
    AttributeInventory inv;
    inv.name = a.at("name").get<std::string>();
    inv.values = a.at("values").get<std::vector<std::string>>();
    inv.annotated_tokens = a.at("annotated_tokens").get<std::size_t>();
    inv.proportion = a.at("proportion").get<double>();
    schema.attributes.push_back(std::move(inv));
  }
  return schema;
}

nlohmann::json chars_to_json(const CharVocabulary& chars) {
  nlohmann::json out = nlohmann::json::array();
  for (char32_t c : chars.characters()) {
    out.push_back(static_cast<std::uint32_t>(c));
  }
  return out;
}

CharVocabulary chars_from_json(const nlohmann::json& j) {
  std::vector<char32_t> chars;
  for (const auto& c : j) chars.push_back(static_cast<char32_t>(c.get<std::uint32_t>()));
  return CharVocabulary::from_characters(std::move(chars));
}

}  // namespace

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::kNoChar: return "no-char";
    case Variant::kMimick: return "mimick";
    case Variant::kCharToTag: return "char2tag";
    case Variant::kBoth: return "both";
  }
  return "?";
}

std::string_view to_string(LossMode mode) {
  return mode == LossMode::kSum ? "sum" : "weighted";
}

Variant parse_variant(std::string_view text) {
  if (text == "no-char") return Variant::kNoChar;
  if (text == "mimick") return Variant::kMimick;
  if (text == "char2tag" || text == "char-to-tag") return Variant::kCharToTag;
  if (text == "both") return Variant::kBoth;
  throw ContractError("unknown variant '" + std::string(text) +
                      "' (expected no-char, mimick, char2tag or both)");
}

LossMode parse_loss_mode(std::string_view text) {
  if (text == "sum") return LossMode::kSum;
  if (text == "weighted") return LossMode::kWeighted;
  throw ContractError("unknown loss mode '" + std::string(text) +
                      "' (expected sum or weighted)");
}

bool uses_mimick(Variant v) { return v == Variant::kMimick || v == Variant::kBoth; }
bool uses_char_to_tag(Variant v) {
  return v == Variant::kCharToTag || v == Variant::kBoth;
}

CharToTagParams CharToTagParams::create(CharVocabulary chars,
                                        std::size_t char_dim,
                                        std::size_t hidden, Rng& rng) {
  CharToTagParams p;
  p.char_embeddings = Parameter("char2tag.chars",
                                char_embedding_init(chars.size(), char_dim, rng),
                                /*row_sparse=*/true);
  p.chars = std::move(chars);
  p.forward = LstmCell::create("char2tag.forward", char_dim, hidden, rng);
  p.backward = LstmCell::create("char2tag.backward", char_dim, hidden, rng);
  return p;
}

Var CharToTagParams::encode(Tape& tape,
                            std::span<const std::size_t> char_ids) const {
  if (char_ids.empty()) throw ContractError("char-to-tag: empty word");
  std::vector<Var> embedded;
  embedded.reserve(char_ids.size());
  for (std::size_t id : char_ids) {
    embedded.push_back(lookup_row(tape, char_embeddings, id));
  }
  LstmState fwd = lstm_initial_state(tape, forward);
  for (Var x : embedded) fwd = lstm_step(tape, forward, x, fwd);
  LstmState bwd = lstm_initial_state(tape, backward);
  for (auto it = embedded.rbegin(); it != embedded.rend(); ++it) {
    bwd = lstm_step(tape, backward, *it, bwd);
  }
  return concat(tape, {fwd.h, bwd.h});
}

ParameterList CharToTagParams::parameters() {
  return {&char_embeddings, &forward.weight, &forward.bias, &backward.weight,
          &backward.bias};
}

std::vector<const Parameter*> CharToTagParams::parameters() const {
  return {&char_embeddings, &forward.weight, &forward.bias, &backward.weight,
          &backward.bias};
}

void WordRepSpec::validate() const {
  if (uses_mimick(variant)) {
    if (!mimick) {
      throw ContractError("variant " + std::string(to_string(variant)) +
                          " requires a mimick model");
    }
    if (mimick->output_dim() != table.dim()) {
      throw DimensionError("mimick model outputs dimension " +
                           std::to_string(mimick->output_dim()) +
                           ", embedding table has " +
                           std::to_string(table.dim()));
    }
  }
  if (char_to_tag && !uses_char_to_tag(variant)) {
    throw ContractError("char-to-tag parameters given for variant " +
                        std::string(to_string(variant)));
  }
}

TaggerModel TaggerModel::allocate(Variant variant, AttributeSchema schema,
                                  const TaggerArchitecture& arch,
                                  std::vector<std::string> vocabulary,
                                  std::size_t word_dim,
                                  std::optional<CharVocabulary> chars) {
  if (arch.word_lstm_layers == 0 || arch.word_lstm_hidden == 0 ||
      arch.char_dim == 0 || arch.char_hidden == 0 || word_dim == 0) {
    throw DimensionError("tagger sizes must be positive");
  }
  if (schema.pos_tags.empty()) throw ContractError("schema has no POS tags");
  TaggerModel m;
  m.variant_ = variant;
  m.arch_ = arch;
  m.schema_ = std::move(schema);
  m.embeddings_ = Parameter("embeddings", Tensor({vocabulary.size() + 1, word_dim}),
                            /*row_sparse=*/true);
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    if (!m.row_index_.emplace(vocabulary[i], i + 1).second) {
      throw ContractError("duplicate vocabulary form '" + vocabulary[i] + "'");
    }
  }
  m.vocabulary_ = std::move(vocabulary);
  if (uses_char_to_tag(variant)) {
    if (!chars) throw ContractError("char-to-tag variant without inventory");
    CharToTagParams p;
    p.char_embeddings =
        Parameter("char2tag.chars", Tensor({chars->size(), arch.char_dim}), true);
    p.chars = std::move(*chars);
    p.forward = LstmCell::zeros("char2tag.forward", arch.char_dim, arch.char_hidden);
    p.backward = LstmCell::zeros("char2tag.backward", arch.char_dim, arch.char_hidden);
    m.char_to_tag_ = std::move(p);
  }
  const std::size_t h = arch.word_lstm_hidden;
  for (std::size_t l = 0; l < arch.word_lstm_layers; ++l) {
    const std::size_t in = l == 0 ? m.input_dim() : 2 * h;
    m.forward_.push_back(LstmCell::zeros(layer_name(true, l), in, h));
    m.backward_.push_back(LstmCell::zeros(layer_name(false, l), in, h));
  }
  m.heads_.push_back(make_head(std::string(kPosHeadName),
                               m.schema_.pos_tags.size(), m.state_dim()));
  for (std::size_t a = 0; a < m.schema_.attributes.size(); ++a) {
    m.heads_.push_back(make_head(m.schema_.attributes[a].name,
                                 m.schema_.head_size(a), m.state_dim()));
  }
  return m;
}

TaggerModel TaggerModel::create(const AttributeSchema& schema,
                                const WordRepSpec& spec,
                                const std::vector<std::string>& training_forms,
                                const TaggerArchitecture& arch, Rng& rng,
                                bool pos_only) {
  spec.validate();
  AttributeSchema s = schema;
  if (pos_only) s.attributes.clear();

  std::vector<std::string> vocabulary = spec.table.words();
  std::vector<std::string> mimicked;
  if (uses_mimick(spec.variant)) {
    std::set<std::string> missing;
    for (const auto& f : training_forms) {
      if (!spec.table.contains(f)) missing.insert(f);
    }
    mimicked.assign(missing.begin(), missing.end());
    vocabulary.insert(vocabulary.end(), mimicked.begin(), mimicked.end());
  }
  std::optional<CharVocabulary> chars;
  if (spec.char_to_tag) {
    chars = spec.char_to_tag->chars;
  } else if (uses_char_to_tag(spec.variant)) {
    chars = CharVocabulary::build(training_forms);
  }

  TaggerModel m = allocate(spec.variant, std::move(s), arch,
                           std::move(vocabulary), spec.table.dim(), chars);
  m.pos_only_ = pos_only;
  m.mimick_ = spec.mimick;
  m.training_forms_.insert(training_forms.begin(), training_forms.end());

  Tensor& emb = m.embeddings_.value();
  const std::size_t d = spec.table.dim();
  if (spec.table.has_unk()) {
    std::copy(spec.table.unk().begin(), spec.table.unk().end(), emb.row(0).begin());
  }
  for (std::size_t i = 0; i < spec.table.size(); ++i) {
    const auto v = spec.table.vector(i);
    std::copy(v.begin(), v.end(), emb.row(i + 1).begin());
  }
  for (std::size_t i = 0; i < mimicked.size(); ++i) {
    const auto v = spec.mimick->embed(mimicked[i]);
    std::copy(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(d),
              emb.row(1 + spec.table.size() + i).begin());
  }

  if (spec.char_to_tag) {
    if (spec.char_to_tag->forward.input_size != arch.char_dim ||
        spec.char_to_tag->forward.hidden_size != arch.char_hidden) {
      throw DimensionError("char-to-tag parameters do not match the architecture");
    }
    m.char_to_tag_ = *spec.char_to_tag;
  } else if (m.char_to_tag_) {
    m.char_to_tag_ = CharToTagParams::create(m.char_to_tag_->chars,
                                             arch.char_dim, arch.char_hidden, rng);
  }
  for (std::size_t l = 0; l < arch.word_lstm_layers; ++l) {
    const std::size_t in = m.forward_[l].input_size;
    m.forward_[l] = LstmCell::create(layer_name(true, l), in,
                                     arch.word_lstm_hidden, rng);
    m.backward_[l] = LstmCell::create(layer_name(false, l), in,
                                      arch.word_lstm_hidden, rng);
  }
  for (TaggerHead& head : m.heads_) {
    const std::size_t n = head.size();
    head.hidden_weight.value() = glorot_uniform(n, m.state_dim(), rng);
    head.output_weight.value() = glorot_uniform(n, n, rng);
  }
  return m;
}

std::size_t TaggerModel::input_dim() const {
  return word_dim() + (char_to_tag_ ? char_to_tag_->output_dim() : 0);
}

std::optional<std::size_t> TaggerModel::row(std::string_view form) const {
  auto it = row_index_.find(std::string(form));
  if (it == row_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t TaggerModel::head_index(std::string_view name) const {
  if (name == kPosHeadName) return kPosHead;
  if (auto a = schema_.attribute_index(name)) return 1 + *a;
  throw SchemaError("unknown attribute '" + std::string(name) + "'");
}

ParameterList TaggerModel::parameters() {
  ParameterList out{&embeddings_};
  if (char_to_tag_) {
    for (Parameter* p : char_to_tag_->parameters()) out.push_back(p);
  }
  for (std::size_t l = 0; l < forward_.size(); ++l) {
    for (Parameter* p : forward_[l].parameters()) out.push_back(p);
    for (Parameter* p : backward_[l].parameters()) out.push_back(p);
  }
  for (TaggerHead& h : heads_) {
    out.insert(out.end(), {&h.hidden_weight, &h.hidden_bias, &h.output_weight,
                           &h.output_bias});
  }
  return out;
}

std::vector<const Parameter*> TaggerModel::parameters() const {
  const ParameterList all = const_cast<TaggerModel*>(this)->parameters();
  return {all.begin(), all.end()};
}

void TaggerModel::save(const std::filesystem::path& path,
                       const nlohmann::json& run_config) const {
  ModelArchive archive;
  archive.kind = "tagger";
  std::vector<std::string> forms(training_forms_.begin(), training_forms_.end());
  std::sort(forms.begin(), forms.end());
  archive.meta = {
      {"variant", to_string(variant_)},
      {"pos_only", pos_only_},
      {"architecture",
       {{"word_lstm_layers", arch_.word_lstm_layers},
        {"word_lstm_hidden", arch_.word_lstm_hidden},
        {"char_dim", arch_.char_dim},
        {"char_hidden", arch_.char_hidden}}},
      {"word_dim", word_dim()},
      {"schema", schema_to_json(schema_)},
      {"vocabulary", vocabulary_},
      {"training_forms", forms},
      {"char_inventory",
       char_to_tag_ ? chars_to_json(char_to_tag_->chars) : nlohmann::json()},
      {"mimick", mimick_ ? mimick_->meta() : nlohmann::json()},
      {"run_config", run_config}};
  for (const Parameter* p : parameters()) archive.add(p->name(), p->value());
  if (mimick_) mimick_->write_to(archive, "mimick.");
  save_archive(path, archive);
}

TaggerModel TaggerModel::load(const std::filesystem::path& path) {
  const ModelArchive archive = load_archive(path, "tagger");
  const nlohmann::json& meta = archive.meta;
  TaggerModel m;
  std::vector<std::string> forms;
  try {
    const Variant variant = parse_variant(meta.at("variant").get<std::string>());
    TaggerArchitecture arch;
    const auto& a = meta.at("architecture");
    arch.word_lstm_layers = a.at("word_lstm_layers").get<std::size_t>();
    arch.word_lstm_hidden = a.at("word_lstm_hidden").get<std::size_t>();
    arch.char_dim = a.at("char_dim").get<std::size_t>();
    arch.char_hidden = a.at("char_hidden").get<std::size_t>();
    std::optional<CharVocabulary> chars;
    if (!meta.at("char_inventory").is_null()) {
      chars = chars_from_json(meta.at("char_inventory"));
    }
    m = allocate(variant, schema_from_json(meta.at("schema")), arch,
                 meta.at("vocabulary").get<std::vector<std::string>>(),
                 meta.at("word_dim").get<std::size_t>(), std::move(chars));
    m.pos_only_ = meta.at("pos_only").get<bool>();
    forms = meta.at("training_forms").get<std::vector<std::string>>();
    if (!meta.at("mimick").is_null()) {
      m.mimick_ = std::make_shared<const MimickModel>(
          MimickModel::read_from(archive, meta.at("mimick"), "mimick."));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ArchiveError(ArchiveError::Kind::kCorruptManifest,
                       std::string("tagger manifest: ") + e.what());
  } catch (const ArchiveError&) {
    throw;
  } catch (const Error& e) {
    throw ArchiveError(ArchiveError::Kind::kCorruptManifest,
                       std::string("tagger manifest: ") + e.what());
  }
  if (uses_mimick(m.variant_) && !m.mimick_) {
    throw ArchiveError(ArchiveError::Kind::kCorruptManifest,
                       "mimick variant archive without a mimick model");
  }
  m.training_forms_.insert(forms.begin(), forms.end());
  for (Parameter* p : m.parameters()) {
    p->value() = archive.tensor(p->name(), p->shape());
  }
  return m;
}

Var word_representation(Tape& tape, const TaggerModel& model,
                        std::string_view form, const ForwardOptions& options) {
  Var word;
  if (auto r = model.row(form)) {
    word = lookup_row(tape, model.embeddings(), *r);
  } else if (uses_mimick(model.variant())) {
    word = input(tape, model.mimick()->embed(form));
  } else {
    const auto lower = model.row(utf8::to_lower(form));
    word = lookup_row(tape, model.embeddings(), lower ? *lower : 0);
  }
  if (const auto& c2t = model.char_to_tag()) {
    std::vector<std::size_t> ids = c2t->chars.encode(form);
    if (options.train && options.unk_char_rate > 0) {
      for (std::size_t& id : ids) {
        if (options.rng->bernoulli(options.unk_char_rate)) id = CharVocabulary::kUnk;
      }
    }
    word = concat(tape, {word, c2t->encode(tape, ids)});
  }
  return word;
}

std::vector<Var> sentence_forward(Tape& tape, const TaggerModel& model,
                                  const Sentence& sentence,
                                  const ForwardOptions& options) {
  if (sentence.tokens.empty()) {
    throw ContractError("sentence_forward: empty sentence");
  }
  if (options.train && !options.rng) {
    throw ContractError("sentence_forward: train mode needs a random stream");
  }
  const bool drop = options.train && options.dropout > 0;
  std::vector<Var> xs;
  xs.reserve(sentence.tokens.size());
  for (const Token& t : sentence.tokens) {
    Var x = word_representation(tape, model, t.form, options);
    if (drop) {
      x = multiply_constant(
          tape, x, dropout_mask(model.input_dim(), options.dropout, *options.rng));
    }
    xs.push_back(x);
  }
  const std::size_t layers = model.forward_layers().size();
  for (std::size_t l = 0; l < layers; ++l) {
    const auto f = lstm_sweep(tape, model.forward_layers()[l], xs, false);
    const auto b = lstm_sweep(tape, model.backward_layers()[l], xs, true);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      xs[i] = concat(tape, {f[i], b[i]});
      if (drop && l + 1 < layers) {
        xs[i] = multiply_constant(
            tape, xs[i],
            dropout_mask(model.state_dim(), options.dropout, *options.rng));
      }
    }
  }
  return xs;
}

Var head_logits(Tape& tape, const TaggerModel& model, Var state,
                std::size_t head) {
  if (head >= model.head_count()) {
    throw SchemaError("head index " + std::to_string(head) + " out of range");
  }
  const TaggerHead& h = model.head(head);
  const Var hidden = tanh(tape, affine(tape, state, h.hidden_weight, h.hidden_bias));
  return affine(tape, hidden, h.output_weight, h.output_bias);
}

std::vector<double> head_logits(const TaggerModel& model,
                                std::span<const double> state,
                                std::size_t head) {
  if (state.size() != model.state_dim()) {
    throw DimensionError("state of width " + std::to_string(state.size()) +
                         ", model expects " + std::to_string(model.state_dim()));
  }
  Tape tape(false);
  const auto v = tape.value(head_logits(tape, model, input(tape, state), head));
  return {v.begin(), v.end()};
}

std::vector<double> attribute_distribution(const TaggerModel& model,
                                           std::span<const double> state,
                                           std::size_t head) {
  return softmax(head_logits(model, state, head));
}

std::vector<double> attribute_distribution(const TaggerModel& model,
                                           std::span<const double> state,
                                           std::string_view head_name) {
  return attribute_distribution(model, state, model.head_index(head_name));
}

std::vector<std::vector<std::size_t>> gold_classes(const TaggerModel& model,
                                                   const Sentence& sentence) {
  const AttributeSchema& schema = model.schema();
  std::vector<std::vector<std::size_t>> out;
  out.reserve(sentence.tokens.size());
  for (const Token& t : sentence.tokens) {
    std::vector<std::size_t> classes(model.head_count(), 0);
    const auto pos = schema.pos_index(t.upos);
    if (!pos) throw SchemaError("POS tag '" + t.upos + "' not in the schema");
    classes[TaggerModel::kPosHead] = *pos;
    if (!model.pos_only()) {
      for (const auto& [name, value] : t.attributes) {
        const auto a = schema.attribute_index(name);
        if (!a) throw SchemaError("attribute '" + name + "' not in the schema");
        const auto cls = schema.value_class(*a, value);
        if (!cls) {
          throw SchemaError("value '" + value + "' of attribute '" + name +
                            "' not in the schema");
        }
        classes[1 + *a] = *cls;
      }
    }
    out.push_back(std::move(classes));
  }
  return out;
}

Var joint_loss(Tape& tape, const TaggerModel& model,
               std::span<const Var> states, const Sentence& sentence,
               LossMode mode) {
  if (states.size() != sentence.tokens.size()) {
    throw ContractError("joint_loss: " + std::to_string(states.size()) +
                        " states for " + std::to_string(sentence.tokens.size()) +
                        " tokens");
  }
  const auto gold = gold_classes(model, sentence);
  std::vector<Var> terms;
  std::vector<double> weights;
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t h = 0; h < model.head_count(); ++h) {
      terms.push_back(
          neg_log_softmax(tape, head_logits(tape, model, states[i], h), gold[i][h]));
      weights.push_back(mode == LossMode::kWeighted && h != TaggerModel::kPosHead
                            ? model.schema().attributes[h - 1].proportion
                            : 1.0);
    }
  }
  return weighted_sum(tape, terms, weights);
}

double joint_loss(const TaggerModel& model, const Sentence& sentence,
                  LossMode mode) {
  Tape tape(false);
  const auto states = sentence_forward(tape, model, sentence);
  return tape.scalar(joint_loss(tape, model, states, sentence, mode));
}

Sentence decode_states(const TaggerModel& model, const Sentence& sentence,
                       const std::vector<std::vector<double>>& states) {
  if (states.size() != sentence.tokens.size()) {
    throw ContractError("decode_states: state count does not match tokens");
  }
  const AttributeSchema& schema = model.schema();
  Sentence out;
  out.id = sentence.id;
  for (std::size_t i = 0; i < states.size(); ++i) {
    Token t;
    t.form = sentence.tokens[i].form;
    t.upos = schema.pos_tags[argmax(head_logits(model, states[i], TaggerModel::kPosHead))];
    for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
      const std::size_t cls = argmax(head_logits(model, states[i], 1 + a));
      if (cls > 0) {
        t.attributes.emplace(schema.attributes[a].name,
                             schema.attributes[a].values[cls - 1]);
      }
    }
    out.tokens.push_back(std::move(t));
  }
  return out;
}

Sentence tag(const TaggerModel& model, const Sentence& sentence) {
  if (sentence.tokens.empty()) return sentence;
  Tape tape(false);
  const auto vars = sentence_forward(tape, model, sentence);
  std::vector<std::vector<double>> states;
  states.reserve(vars.size());
  for (Var v : vars) {
    const auto s = tape.value(v);
    states.emplace_back(s.begin(), s.end());
  }
  return decode_states(model, sentence, states);
}

Corpus tag_corpus_serial(const TaggerModel& model, const Corpus& corpus) {
  Corpus out;
  out.reserve(corpus.size());
  for (const Sentence& s : corpus) out.push_back(tag(model, s));
  return out;
}

Corpus tag_corpus(const TaggerModel& model, const Corpus& corpus) {
  Corpus out(corpus.size());
  const auto n = static_cast<std::ptrdiff_t>(corpus.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = tag(model, corpus[i]);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

int TaggerTrainConfig::effective_epochs(std::size_t train_tokens) const {
  return auto_double_epochs && train_tokens <= low_resource_tokens ? 2 * epochs
                                                                   : epochs;
}

nlohmann::json to_json(const TaggerTrainConfig& cfg) {
  return {{"loss", to_string(cfg.loss)},
          {"epochs", cfg.epochs},
          {"low_resource_tokens", cfg.low_resource_tokens},
          {"auto_double_epochs", cfg.auto_double_epochs},
          {"dropout", cfg.dropout},
          {"learning_rate", cfg.learning_rate},
          {"momentum", cfg.momentum},
          {"clip_norm", cfg.clip_norm},
          {"unk_char_rate", cfg.unk_char_rate},
          {"pos_only", cfg.pos_only},
          {"word_lstm_layers", cfg.architecture.word_lstm_layers},
          {"word_lstm_hidden", cfg.architecture.word_lstm_hidden},
          {"char_dim", cfg.architecture.char_dim},
          {"char_hidden", cfg.architecture.char_hidden},
          {"seed", cfg.seed}};
}

TaggerTrainResult train_tagger(const CorpusSplit& corpus, WordRepSpec spec,
                               const TaggerTrainConfig& cfg) {
  if (corpus.train.empty()) throw ContractError("empty training split");
  if (cfg.epochs < 1) throw ContractError("epochs must be >= 1");
  if (!(cfg.dropout >= 0 && cfg.dropout < 1)) {
    throw ContractError("dropout must lie in [0, 1)");
  }
  if (!(cfg.unk_char_rate >= 0 && cfg.unk_char_rate < 1)) {
    throw ContractError("UNK character rate must lie in [0, 1)");
  }

  const AttributeSchema schema = build_schema(corpus.train);
  std::set<std::string> form_set;
  for (const Sentence& s : corpus.train) {
    for (const Token& t : s.tokens) form_set.insert(t.form);
  }
  const std::vector<std::string> forms(form_set.begin(), form_set.end());

  Rng rng(cfg.seed);
  Rng init_rng = rng.fork();
  TaggerTrainResult result{
      TaggerModel::create(schema, spec, forms, cfg.architecture, init_rng,
                          cfg.pos_only),
      {},
      cfg.effective_epochs(schema.training_tokens)};
  TaggerModel& model = result.model;
  // Validate every training sentence up front rather than mid-epoch.
  for (const Sentence& s : corpus.train) gold_classes(model, s);

  MomentumSgd optimizer(model.parameters(), cfg.learning_rate, cfg.momentum,
                        cfg.clip_norm);
  std::vector<std::size_t> order(corpus.train.size());
  std::iota(order.begin(), order.end(), 0);
  const ForwardOptions train_opts{true, cfg.dropout, cfg.unk_char_rate, &rng};

  for (int epoch = 1; epoch <= result.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0;
    for (std::size_t i : order) {
      const Sentence& s = corpus.train[i];
      Tape tape;
      const auto states = sentence_forward(tape, model, s, train_opts);
      const Var loss = joint_loss(tape, model, states, s, cfg.loss);
      total += tape.scalar(loss);
      tape.backward(loss);
      optimizer.step();
    }
    TaggerEpoch e;
    e.epoch = epoch;
    e.train_loss = total / static_cast<double>(order.size());
    e.dev_pos_accuracy = e.dev_micro_f1 = std::numeric_limits<double>::quiet_NaN();
    if (token_count(corpus.dev) > 0) {
      const TaggedCorpusPair pair(corpus.dev, tag_corpus(model, corpus.dev),
                                  model.training_forms());
      e.dev_pos_accuracy = pos_accuracy(pair);
      e.dev_micro_f1 = micro_f1(pair).total.f1;
    }
    result.trace.push_back(e);
  }
  return result;
}

}  // namespace mimick
