#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mimick {

// Attribute name -> value. An absent key means NONE.
using AttributeMap = std::map<std::string, std::string>;

struct Token {
  std::string form;
  std::string upos;
  AttributeMap attributes;
  friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
  std::vector<Token> tokens;
  std::string id;  // from "# sent_id = ...", may be empty
  friend bool operator==(const Sentence&, const Sentence&) = default;
};

using Corpus = std::vector<Sentence>;

struct CorpusSplit {
  Corpus train;
  Corpus dev;
  Corpus test;
};

// Reads FORM, UPOS and FEATS; other columns are checked for presence only.
// Multiword ranges ("4-5") and empty nodes ("5.1") are skipped.
Corpus parse_conllu(std::istream& in);
Corpus parse_conllu(std::string_view text);
Corpus read_conllu_file(const std::string& path);

// "A=x|B=y" or "_". `line` is used for error messages.
AttributeMap parse_feats(std::string_view feats, std::size_t line = 0);
std::string format_feats(const AttributeMap& attributes);

// Parseable CoNLL-U with '_' for every column this library does not model.
std::string serialize_conllu(const Corpus& corpus);

std::size_t token_count(const Corpus& corpus);

struct AttributeInventory {
  std::string name;
  std::vector<std::string> values;  // sorted; NONE is implicit
  std::size_t annotated_tokens = 0;
  double proportion = 0.0;  // annotated_tokens / training tokens
};

// Tag inventories computed from a training set. Heads index their classes
// as: POS -> pos_tags[i]; attribute a -> 0 = NONE, 1 + k = values[k].
struct AttributeSchema {
  std::vector<std::string> pos_tags;
  std::vector<AttributeInventory> attributes;
  std::size_t training_tokens = 0;

  std::optional<std::size_t> pos_index(std::string_view tag) const;
  std::optional<std::size_t> attribute_index(std::string_view name) const;
  // Class index of `value` in attribute `attr`'s head; nullopt when unseen.
  std::optional<std::size_t> value_class(std::size_t attr,
                                         std::string_view value) const;
  std::size_t head_size(std::size_t attr) const {
    return attributes[attr].values.size() + 1;
  }
  friend bool operator==(const AttributeSchema&, const AttributeSchema&);
};

AttributeSchema build_schema(const Corpus& train);

// Seeded sentence sampling without replacement: sentences are drawn in a
// Fisher-Yates order and kept while the running token total is below
// `token_limit` (the last one may overshoot). A corpus with at most
// `token_limit` tokens is returned whole, in its original order.
Corpus subsample(const Corpus& train, std::size_t token_limit,
                 std::uint64_t seed);

}  // namespace mimick
