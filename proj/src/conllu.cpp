#include "mimick/conllu.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <set>
#include <sstream>

#include "mimick/errors.hpp"
#include "mimick/random.hpp"

namespace mimick {

namespace {

constexpr std::size_t kColumns = 10;

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool is_uint(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

enum class IdKind { kWord, kRange, kEmpty };

IdKind classify_id(std::string_view id, std::size_t line) {
  if (is_uint(id)) {
    if (id == "0" || id.front() == '0') {
      throw ParseError(line, "malformed ID '" + std::string(id) + "'");
    }
    return IdKind::kWord;
  }
  for (char sep : {'-', '.'}) {
    const auto pos = id.find(sep);
    if (pos != std::string_view::npos && is_uint(id.substr(0, pos)) &&
        is_uint(id.substr(pos + 1))) {
      return sep == '-' ? IdKind::kRange : IdKind::kEmpty;
    }
  }
  throw ParseError(line, "malformed ID '" + std::string(id) + "'");
}

}  // namespace

AttributeMap parse_feats(std::string_view feats, std::size_t line) {
  AttributeMap out;
  if (feats == "_") return out;
  if (feats.empty()) throw ParseError(line, "empty FEATS column");
  for (std::string_view pair : split(feats, '|')) {
    const auto eq = pair.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == pair.size()) {
      throw ParseError(line,
                       "malformed FEATS pair '" + std::string(pair) + "'");
    }
    std::string name(pair.substr(0, eq));
    std::string value(pair.substr(eq + 1));
    if (value.find('=') != std::string::npos) {
      throw ParseError(line,
                       "malformed FEATS pair '" + std::string(pair) + "'");
    }
    if (!out.emplace(name, std::move(value)).second) {
      throw ParseError(line, "attribute '" + name + "' repeated in FEATS");
    }
  }
  return out;
}

std::string format_feats(const AttributeMap& attributes) {
  if (attributes.empty()) return "_";
  std::string s;
  for (const auto& [name, value] : attributes) {
    if (!s.empty()) s += '|';
    s += name;
    s += '=';
    s += value;
  }
  return s;
}

Corpus parse_conllu(std::istream& in) {
  Corpus corpus;
  Sentence current;
  std::string line;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (!current.tokens.empty()) corpus.push_back(std::move(current));
    current = Sentence{};
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') {
      constexpr std::string_view kSentId = "# sent_id = ";
      if (std::string_view(line).substr(0, kSentId.size()) == kSentId) {
        current.id = line.substr(kSentId.size());
      }
      continue;
    }
    const auto cols = split(line, '\t');
    if (cols.size() != kColumns) {
      throw ParseError(line_no, "expected 10 tab-separated columns, found " +
                                    std::to_string(cols.size()));
    }
    if (classify_id(cols[0], line_no) != IdKind::kWord) continue;
    if (cols[1].empty()) throw ParseError(line_no, "empty FORM");
    if (cols[3].empty()) throw ParseError(line_no, "empty UPOS");
    Token token;
    token.form = std::string(cols[1]);
    token.upos = std::string(cols[3]);
    token.attributes = parse_feats(cols[5], line_no);
    current.tokens.push_back(std::move(token));
  }
  flush();
  return corpus;
}

Corpus parse_conllu(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_conllu(in);
}

Corpus read_conllu_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parse_conllu(in);
}

std::string serialize_conllu(const Corpus& corpus) {
  std::string out;
  for (const Sentence& s : corpus) {
    if (!s.id.empty()) out += "# sent_id = " + s.id + "\n";
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      const Token& t = s.tokens[i];
      out += std::to_string(i + 1);
      out += '\t';
      out += t.form;
      out += "\t_\t";
      out += t.upos;
      out += "\t_\t";
      out += format_feats(t.attributes);
      out += "\t_\t_\t_\t_\n";
    }
    out += '\n';
  }
  return out;
}

std::size_t token_count(const Corpus& corpus) {
  std::size_t n = 0;
  for (const Sentence& s : corpus) n += s.tokens.size();
  return n;
}

std::optional<std::size_t> AttributeSchema::pos_index(
    std::string_view tag) const {
  auto it = std::lower_bound(pos_tags.begin(), pos_tags.end(), tag);
  if (it == pos_tags.end() || *it != tag) return std::nullopt;
  return static_cast<std::size_t>(it - pos_tags.begin());
}

std::optional<std::size_t> AttributeSchema::attribute_index(
    std::string_view name) const {
  auto it = std::lower_bound(
      attributes.begin(), attributes.end(), name,
      [](const AttributeInventory& a, std::string_view n) { return a.name < n; });
  if (it == attributes.end() || it->name != name) return std::nullopt;
  return static_cast<std::size_t>(it - attributes.begin());
}

std::optional<std::size_t> AttributeSchema::value_class(
    std::size_t attr, std::string_view value) const {
  const auto& values = attributes[attr].values;
  auto it = std::lower_bound(values.begin(), values.end(), value);
  if (it == values.end() || *it != value) return std::nullopt;
  return 1 + static_cast<std::size_t>(it - values.begin());
}

bool operator==(const AttributeSchema& a, const AttributeSchema& b) {
  if (a.pos_tags != b.pos_tags || a.training_tokens != b.training_tokens ||
      a.attributes.size() != b.attributes.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.attributes.size(); ++i) {
    const auto& x = a.attributes[i];
    const auto& y = b.attributes[i];
    if (x.name != y.name || x.values != y.values ||
        x.annotated_tokens != y.annotated_tokens || x.proportion != y.proportion) {
      return false;
    }
  }
  return true;
}

AttributeSchema build_schema(const Corpus& train) {
  std::set<std::string> pos;
  std::map<std::string, std::pair<std::set<std::string>, std::size_t>> attrs;
  std::size_t tokens = 0;
  for (const Sentence& s : train) {
    for (const Token& t : s.tokens) {
      ++tokens;
      pos.insert(t.upos);
      for (const auto& [name, value] : t.attributes) {
        auto& entry = attrs[name];
        entry.first.insert(value);
        ++entry.second;
      }
    }
  }
  if (tokens == 0) throw ContractError("build_schema: empty training corpus");

  AttributeSchema schema;
  schema.training_tokens = tokens;
  schema.pos_tags.assign(pos.begin(), pos.end());
  for (auto& [name, entry] : attrs) {
    AttributeInventory inv;
    inv.name = name;
    inv.values.assign(entry.first.begin(), entry.first.end());
    inv.annotated_tokens = entry.second;
    inv.proportion =
        static_cast<double>(entry.second) / static_cast<double>(tokens);
    schema.attributes.push_back(std::move(inv));
  }
  return schema;
}

Corpus subsample(const Corpus& train, std::size_t token_limit,
                 std::uint64_t seed) {
  if (token_limit == 0) throw ContractError("token limit must be positive");
  if (token_count(train) <= token_limit) return train;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  Corpus out;
  std::size_t total = 0;
  // Lazy forward Fisher-Yates: position i receives a uniform pick from the
  // not-yet-drawn suffix.
  for (std::size_t i = 0; i < order.size() && total < token_limit; ++i) {
    const std::size_t j = i + rng.uniform_index(order.size() - i);
    std::swap(order[i], order[j]);
    out.push_back(train[order[i]]);
    total += train[order[i]].tokens.size();
  }
  return out;
}

}  // namespace mimick
