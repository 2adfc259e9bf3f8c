#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <iostream>
#include <set>
#include <sstream>

#include "mimick/archive.hpp"
#include "mimick/conllu.hpp"
#include "mimick/embeddings.hpp"
#include "mimick/errors.hpp"
#include "mimick/eval.hpp"
#include "mimick/files.hpp"

namespace mimick::cli {

namespace {

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void log_config(std::string_view command, const nlohmann::json& config) {
  std::cerr << command << " config " << config.dump() << '\n';
}

std::vector<std::string> read_word_list(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) words.push_back(line);
  }
  return words;
}

}  // namespace

nlohmann::json to_json(const TrainMimickOptions& o) {
  const MimickTrainConfig& c = o.config;
  return {{"command", "train-mimick"},
          {"embeddings", o.embeddings},
          {"out", o.out},
          {"trace", o.trace},
          {"seed", c.seed},
          {"epochs", c.epochs},
          {"lr", c.learning_rate},
          {"lr_decay", c.lr_decay},
          {"momentum", c.momentum},
          {"clip_norm", c.clip_norm},
          {"dev_fraction", c.dev_fraction},
          {"char_dim", c.char_dim},
          {"lstm_hidden", c.lstm_hidden},
          {"mlp_hidden", c.mlp_hidden},
          {"unk_char_rate", c.unk_char_rate}};
}

nlohmann::json to_json(const TrainTaggerOptions& o) {
  nlohmann::json j = {{"command", "train-tagger"},
                      {"train", o.train},
                      {"dev", o.dev},
                      {"embeddings", o.embeddings},
                      {"mimick", o.mimick},
                      {"out", o.out},
                      {"trace", o.trace},
                      {"variant", o.variant},
                      {"token_limit", o.token_limit}};
  j["hyperparameters"] = to_json(o.config);
  return j;
}

void train_mimick_command(const TrainMimickOptions& o) {
  const nlohmann::json config = to_json(o);
  log_config("train-mimick", config);
  const EmbeddingTable table = read_embeddings_file(o.embeddings);
  const MimickTrainResult result = train_mimick(table, o.config);

  std::string trace = "epoch\ttrain_loss\tdev_loss\tsgd_loss\n";
  for (const MimickEpoch& e : result.trace) {
    trace += std::to_string(e.epoch) + '\t' + number(e.train_loss) + '\t' +
             number(e.dev_loss) + '\t' + number(e.sgd_loss) + '\n';
  }
  result.model.save(o.out, config);
  if (!o.trace.empty()) write_file_atomic(o.trace, trace);
}

void infer_command(const InferOptions& o) {
  const MimickModel model = MimickModel::load(o.model);
  const EmbeddingTable table = read_embeddings_file(o.embeddings);
  const EmbeddingTable out = infer_oov(model, table, read_word_list(o.words));
  write_file_atomic(o.out, embeddings_to_string(out));
}

void nearest_command(const NearestOptions& o, std::ostream& out) {
  const EmbeddingTable table = read_embeddings_file(o.embeddings);
  std::vector<double> query;
  if (auto i = table.find(o.word)) {
    const auto v = table.vector(*i);
    query.assign(v.begin(), v.end());
  } else if (!o.model.empty()) {
    const MimickModel model = MimickModel::load(o.model);
    if (model.output_dim() != table.dim()) {
      throw DimensionError("mimick model outputs dimension " +
                           std::to_string(model.output_dim()) + ", table has " +
                           std::to_string(table.dim()));
    }
    query = model.embed(o.word);
  } else {
    throw LookupError("'" + o.word + "' is not in the table and no model was given");
  }
  std::string text;
  for (const Neighbor& n : nearest_neighbors(table, query, o.k)) {
    text += n.word + '\t' + number(n.similarity) + '\n';
  }
  out << text;
}

void train_tagger_command(const TrainTaggerOptions& o) {
  TrainTaggerOptions resolved = o;
  resolved.config.loss = parse_loss_mode(o.loss);
  const Variant variant = parse_variant(o.variant);
  const nlohmann::json config = to_json(resolved);
  log_config("train-tagger", config);

  CorpusSplit split;
  split.train = read_conllu_file(o.train);
  if (!o.dev.empty()) split.dev = read_conllu_file(o.dev);
  if (o.token_limit > 0) {
    split.train = subsample(split.train, o.token_limit, o.config.seed);
  }
  WordRepSpec spec;
  spec.variant = variant;
  spec.table = read_embeddings_file(o.embeddings);
  if (!o.mimick.empty()) {
    spec.mimick = std::make_shared<const MimickModel>(MimickModel::load(o.mimick));
  } else if (uses_mimick(variant)) {
    throw ContractError("variant " + o.variant + " needs --mimick");
  }
  std::cerr << "train-tagger: " << token_count(split.train)
            << " training tokens, "
            << resolved.config.effective_epochs(token_count(split.train))
            << " epochs\n";

  const TaggerTrainResult result = train_tagger(split, spec, resolved.config);
  std::string trace = "epoch\ttrain_loss\tdev_pos_accuracy\tdev_micro_f1\n";
  for (const TaggerEpoch& e : result.trace) {
    trace += std::to_string(e.epoch) + '\t' + number(e.train_loss) + '\t' +
             number(e.dev_pos_accuracy) + '\t' + number(e.dev_micro_f1) + '\n';
  }
  nlohmann::json stored = config;
  stored["effective_epochs"] = result.epochs;
  result.model.save(o.out, stored);
  if (!o.trace.empty()) write_file_atomic(o.trace, trace);
}

void tag_command(const TagOptions& o) {
  const TaggerModel model = TaggerModel::load(o.model);
  const Corpus input = read_conllu_file(o.input);
  write_file_atomic(o.out, serialize_conllu(tag_corpus(model, input)));
}

void eval_command(const EvalOptions& o, std::ostream& out) {
  if (o.pred.empty() == o.model.empty()) {
    throw ContractError("eval needs exactly one of --pred and --model");
  }
  const Corpus gold = read_conllu_file(o.gold);
  std::optional<TaggerModel> model;
  Corpus predicted;
  if (!o.model.empty()) {
    model = TaggerModel::load(o.model);
    predicted = tag_corpus(*model, gold);
  } else {
    predicted = read_conllu_file(o.pred);
  }

  std::unordered_set<std::string> forms;
  bool have_forms = true;
  if (!o.train.empty()) {
    for (const Sentence& s : read_conllu_file(o.train)) {
      for (const Token& t : s.tokens) forms.insert(t.form);
    }
  } else if (model) {
    forms = model->training_forms();
  } else {
    have_forms = false;
  }
  auto make_pair = [&](Corpus pred) {
    if (have_forms) return TaggedCorpusPair(gold, std::move(pred), forms);
    std::vector<std::vector<bool>> none;
    for (const Sentence& s : gold) none.emplace_back(s.tokens.size(), false);
    return TaggedCorpusPair(gold, std::move(pred), std::move(none));
  };

  const TaggedCorpusPair pair = make_pair(predicted);
  EvalReport report = evaluate(pair);
  if (!o.compare.empty()) {
    const TaggedCorpusPair other = make_pair(read_conllu_file(o.compare));
    report.mcnemar =
        mcnemar(pos_correctness(pair), pos_correctness(other), o.alpha);
  }
  const std::string text = format_report(report);
  if (o.out.empty()) {
    out << text;
  } else {
    write_file_atomic(o.out, text);
  }
}

}  // namespace mimick::cli
