// Command-line front end: one binary with a subcommand per pipeline step.
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "mimick/errors.hpp"

namespace {

using namespace mimick;
using namespace mimick::cli;

void add_sgd_flags(CLI::App* cmd, std::uint64_t& seed, int& epochs, double& lr,
                   double& momentum) {
  cmd->add_option("--seed", seed, "Run seed")->capture_default_str();
  cmd->add_option("--epochs", epochs, "Training epochs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--lr", lr, "Learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--momentum", momentum, "Momentum coefficient")
      ->check(CLI::Range(0.0, 0.999999))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Character-level embedding inference and morphosyntactic tagging"};
  app.set_config("--config", "", "TOML/INI file of option values; flags win");
  app.allow_config_extras(false);
  app.require_subcommand(1);

  TrainMimickOptions tm;
  auto* train_mimick = app.add_subcommand(
      "train-mimick", "Train a spelling-to-embedding model on an embedding table");
  train_mimick->add_option("--embeddings", tm.embeddings, "Embedding text file")
      ->required()
      ->check(CLI::ExistingFile);
  train_mimick->add_option("--out", tm.out, "Output model archive")->required();
  train_mimick->add_option("--trace", tm.trace, "Per-epoch loss trace (TSV)");
  add_sgd_flags(train_mimick, tm.config.seed, tm.config.epochs,
                tm.config.learning_rate, tm.config.momentum);
  train_mimick->add_option("--lr-decay", tm.config.lr_decay,
                           "Per-epoch inverse-time learning-rate decay")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  train_mimick->add_option("--dev-fraction", tm.config.dev_fraction)
      ->capture_default_str();
  train_mimick->add_option("--char-dim", tm.config.char_dim)->capture_default_str();
  train_mimick->add_option("--lstm-hidden", tm.config.lstm_hidden)
      ->capture_default_str();
  train_mimick->add_option("--mlp-hidden", tm.config.mlp_hidden)
      ->capture_default_str();
  train_mimick->add_option("--unk-char-rate", tm.config.unk_char_rate)
      ->capture_default_str();

  InferOptions inf;
  auto* infer = app.add_subcommand("infer", "Write mimicked vectors for a word list");
  infer->add_option("--model", inf.model, "Mimick model archive")
      ->required()
      ->check(CLI::ExistingFile);
  infer->add_option("--embeddings", inf.embeddings, "Table the model was trained on")
      ->required()
      ->check(CLI::ExistingFile);
  infer->add_option("--words", inf.words, "One word per line")
      ->required()
      ->check(CLI::ExistingFile);
  infer->add_option("--out", inf.out, "Output embedding text file")->required();

  NearestOptions nn;
  auto* nearest = app.add_subcommand("nn", "Nearest table words to a word");
  nearest->add_option("--embeddings", nn.embeddings)->required()->check(CLI::ExistingFile);
  nearest->add_option("--model", nn.model, "Mimick archive for OOV queries")
      ->check(CLI::ExistingFile);
  nearest->add_option("--word", nn.word)->required();
  nearest->add_option("--k", nn.k, "Neighbors to print")->capture_default_str();

  TrainTaggerOptions tt;
  auto* train_tagger = app.add_subcommand("train-tagger", "Train the BiLSTM tagger");
  train_tagger->add_option("--train", tt.train, "Training CoNLL-U")
      ->required()
      ->check(CLI::ExistingFile);
  train_tagger->add_option("--dev", tt.dev, "Development CoNLL-U")
      ->check(CLI::ExistingFile);
  train_tagger->add_option("--embeddings", tt.embeddings)
      ->required()
      ->check(CLI::ExistingFile);
  train_tagger->add_option("--mimick", tt.mimick, "Mimick archive (mimick, both)")
      ->check(CLI::ExistingFile);
  train_tagger->add_option("--out", tt.out, "Output model archive")->required();
  train_tagger->add_option("--trace", tt.trace, "Per-epoch metric trace (TSV)");
  train_tagger->add_option("--variant", tt.variant)
      ->check(CLI::IsMember({"no-char", "mimick", "char2tag", "both"}))
      ->capture_default_str();
  train_tagger->add_option("--loss", tt.loss)
      ->check(CLI::IsMember({"sum", "weighted"}))
      ->capture_default_str();
  train_tagger->add_option("--token-limit", tt.token_limit,
                           "Subsample the training split to this many tokens");
  add_sgd_flags(train_tagger, tt.config.seed, tt.config.epochs,
                tt.config.learning_rate, tt.config.momentum);
  train_tagger->add_option("--dropout", tt.config.dropout)
      ->check(CLI::Range(0.0, 0.999999))
      ->capture_default_str();
  train_tagger->add_flag("!--no-auto-double", tt.config.auto_double_epochs,
                         "Keep --epochs on small training sets");
  train_tagger->add_flag("--pos-only", tt.config.pos_only, "Train the POS head alone");
  train_tagger->add_option("--layers", tt.config.architecture.word_lstm_layers)
      ->capture_default_str();
  train_tagger->add_option("--hidden", tt.config.architecture.word_lstm_hidden)
      ->capture_default_str();
  train_tagger->add_option("--char-dim", tt.config.architecture.char_dim)
      ->capture_default_str();
  train_tagger->add_option("--char-hidden", tt.config.architecture.char_hidden)
      ->capture_default_str();
  train_tagger->add_option("--unk-char-rate", tt.config.unk_char_rate)
      ->capture_default_str();

  TagOptions tg;
  auto* tag = app.add_subcommand("tag", "Tag a CoNLL-U file");
  tag->add_option("--model", tg.model)->required()->check(CLI::ExistingFile);
  tag->add_option("--input", tg.input)->required()->check(CLI::ExistingFile);
  tag->add_option("--out", tg.out)->required();

  EvalOptions ev;
  auto* eval = app.add_subcommand("eval", "Score predictions against gold CoNLL-U");
  eval->add_option("--gold", ev.gold)->required()->check(CLI::ExistingFile);
  auto* pred = eval->add_option("--pred", ev.pred)->check(CLI::ExistingFile);
  auto* model = eval->add_option("--model", ev.model, "Tag --gold with this model")
                    ->check(CLI::ExistingFile);
  pred->excludes(model);
  eval->add_option("--compare", ev.compare, "Second prediction file for McNemar")
      ->check(CLI::ExistingFile);
  eval->add_option("--train", ev.train, "Training CoNLL-U defining OOV tokens")
      ->check(CLI::ExistingFile);
  eval->add_option("--out", ev.out, "Report file (default stdout)");
  eval->add_option("--alpha", ev.alpha, "Significance level")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*train_mimick) train_mimick_command(tm);
    if (*infer) infer_command(inf);
    if (*nearest) nearest_command(nn, std::cout);
    if (*train_tagger) train_tagger_command(tt);
    if (*tag) tag_command(tg);
    if (*eval) eval_command(ev, std::cout);
  } catch (const mimick::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
