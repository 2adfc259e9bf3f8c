#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "mimick/mimick_model.hpp"
#include "mimick/tagger.hpp"

namespace mimick::cli {

struct TrainMimickOptions {
  std::string embeddings;
  std::string out;
  std::string trace;
  MimickTrainConfig config;
};

struct InferOptions {
  std::string model;
  std::string embeddings;
  std::string words;
  std::string out;
};

struct NearestOptions {
  std::string embeddings;
  std::string model;  // optional; resolves OOV queries
  std::string word;
  std::size_t k = 10;
};

struct TrainTaggerOptions {
  std::string train;
  std::string dev;
  std::string embeddings;
  std::string mimick;
  std::string out;
  std::string trace;
  std::string variant = "no-char";
  std::string loss = "sum";
  std::size_t token_limit = 0;  // 0 keeps the whole training split
  TaggerTrainConfig config;
};

struct TagOptions {
  std::string model;
  std::string input;
  std::string out;
};

struct EvalOptions {
  std::string gold;
  std::string pred;
  std::string model;    // tags gold itself when no prediction file is given
  std::string compare;  // second prediction file for McNemar
  std::string train;    // UD training file defining OOV tokens
  std::string out;      // report path; stdout when empty
  double alpha = 0.01;
};

// Resolved configuration, logged to stderr and stored with the outputs.
nlohmann::json to_json(const TrainMimickOptions& o);
nlohmann::json to_json(const TrainTaggerOptions& o);

void train_mimick_command(const TrainMimickOptions& o);
void infer_command(const InferOptions& o);
void nearest_command(const NearestOptions& o, std::ostream& out);
void train_tagger_command(const TrainTaggerOptions& o);
void tag_command(const TagOptions& o);
void eval_command(const EvalOptions& o, std::ostream& out);

}  // namespace mimick::cli
