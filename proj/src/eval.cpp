#include "mimick/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "mimick/errors.hpp"

namespace mimick {

namespace {

void check_alignment(const Corpus& gold, const Corpus& predicted) {
  if (gold.size() != predicted.size()) {
    throw ContractError("corpora differ in sentence count: gold has " +
                        std::to_string(gold.size()) + ", predicted has " +
                        std::to_string(predicted.size()));
  }
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const auto& g = gold[s].tokens;
    const auto& p = predicted[s].tokens;
    if (g.size() != p.size()) {
      throw ContractError("sentence " + std::to_string(s + 1) +
                          " differs in token count: gold has " +
                          std::to_string(g.size()) + ", predicted has " +
                          std::to_string(p.size()));
    }
    for (std::size_t t = 0; t < g.size(); ++t) {
      if (g[t].form != p[t].form) {
        throw ContractError("sentence " + std::to_string(s + 1) + " token " +
                            std::to_string(t + 1) + " differs: gold '" +
                            g[t].form + "', predicted '" + p[t].form + "'");
      }
    }
  }
}

bool in_subset(bool oov, TokenSubset subset) {
  switch (subset) {
    case TokenSubset::kAll: return true;
    case TokenSubset::kOovOnly: return oov;
    case TokenSubset::kInVocabOnly: return !oov;
  }
  return false;
}

void count_slots(const AttributeMap& gold, const AttributeMap& predicted,
                 MicroF1Report& report) {
  std::set<std::string> keys;
  for (const auto& [k, v] : gold) keys.insert(k);
  for (const auto& [k, v] : predicted) keys.insert(k);
  for (const std::string& key : keys) {
    auto g = gold.find(key);
    auto p = predicted.find(key);
    const bool has_g = g != gold.end();
    const bool has_p = p != predicted.end();
    F1Counts& attr = report.per_attribute[key];
    if (has_g && has_p && g->second == p->second) {
      ++report.total.tp;
      ++attr.tp;
      continue;
    }
    if (has_p) {
      ++report.total.fp;
      ++attr.fp;
    }
    if (has_g) {
      ++report.total.fn;
      ++attr.fn;
    }
  }
}

void append_number(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

TaggedCorpusPair::TaggedCorpusPair(
    Corpus gold, Corpus predicted,
    const std::unordered_set<std::string>& training_forms)
    : gold_(std::move(gold)), predicted_(std::move(predicted)) {
  check_alignment(gold_, predicted_);
  oov_.resize(gold_.size());
  for (std::size_t s = 0; s < gold_.size(); ++s) {
    for (const Token& t : gold_[s].tokens) {
      oov_[s].push_back(!training_forms.contains(t.form));
    }
  }
}

TaggedCorpusPair::TaggedCorpusPair(Corpus gold, Corpus predicted,
                                   std::vector<std::vector<bool>> oov)
    : gold_(std::move(gold)), predicted_(std::move(predicted)),
      oov_(std::move(oov)) {
  check_alignment(gold_, predicted_);
  bool ok = oov_.size() == gold_.size();
  for (std::size_t s = 0; ok && s < gold_.size(); ++s) {
    ok = oov_[s].size() == gold_[s].tokens.size();
  }
  if (!ok) throw ContractError("OOV flags do not match the corpus shape");
}

std::size_t TaggedCorpusPair::token_count() const {
  return mimick::token_count(gold_);
}

std::size_t TaggedCorpusPair::oov_count() const {
  std::size_t n = 0;
  for (const auto& s : oov_) n += std::count(s.begin(), s.end(), true);
  return n;
}

std::vector<bool> pos_correctness(const TaggedCorpusPair& pair,
                                  TokenSubset subset) {
  std::vector<bool> out;
  for (std::size_t s = 0; s < pair.gold().size(); ++s) {
    const auto& g = pair.gold()[s].tokens;
    const auto& p = pair.predicted()[s].tokens;
    for (std::size_t t = 0; t < g.size(); ++t) {
      if (in_subset(pair.oov(s, t), subset)) out.push_back(g[t].upos == p[t].upos);
    }
  }
  return out;
}

double pos_accuracy(const TaggedCorpusPair& pair, TokenSubset subset) {
  const auto correct = pos_correctness(pair, subset);
  if (correct.empty()) {
    throw ContractError("pos_accuracy: no tokens in the requested subset");
  }
  const auto hits = std::count(correct.begin(), correct.end(), true);
  return static_cast<double>(hits) / static_cast<double>(correct.size());
}

void finalize_f1(F1Counts& c) {
  const std::uint64_t predicted = c.tp + c.fp;
  const std::uint64_t gold = c.tp + c.fn;
  if (predicted == 0 && gold == 0) {
    c.precision = c.recall = c.f1 = 1.0;
    return;
  }
  c.precision = predicted ? static_cast<double>(c.tp) / predicted : 0.0;
  c.recall = gold ? static_cast<double>(c.tp) / gold : 0.0;
  c.f1 = c.precision + c.recall > 0
             ? 2 * c.precision * c.recall / (c.precision + c.recall)
             : 0.0;
}

MicroF1Report micro_f1(const TaggedCorpusPair& pair) {
  MicroF1Report report;
  for (std::size_t s = 0; s < pair.gold().size(); ++s) {
    const auto& g = pair.gold()[s].tokens;
    const auto& p = pair.predicted()[s].tokens;
    for (std::size_t t = 0; t < g.size(); ++t) {
      count_slots(g[t].attributes, p[t].attributes, report);
    }
  }
  finalize_f1(report.total);
  for (auto& [name, counts] : report.per_attribute) finalize_f1(counts);
  return report;
}

SimilarityDataset parse_similarity_dataset(std::string_view text) {
  SimilarityDataset out;
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> cols;
    std::size_t c = 0;
    while (true) {
      const std::size_t tab = line.find('\t', c);
      cols.push_back(line.substr(c, tab - c));
      if (tab == std::string_view::npos) break;
      c = tab + 1;
    }
    if (cols.size() < 3 || cols[0].empty() || cols[1].empty()) {
      throw ParseError(line_no, "expected 'word1<TAB>word2<TAB>score'");
    }
    SimilarityPair pair{std::string(cols[0]), std::string(cols[1]), 0.0};
    const char* e = cols[2].data() + cols[2].size();
    auto [ptr, ec] = std::from_chars(cols[2].data(), e, pair.score);
    if (cols[2].empty() || ec != std::errc() || ptr != e ||
        !std::isfinite(pair.score)) {
      throw ParseError(line_no,
                       "unparseable score '" + std::string(cols[2]) + "'");
    }
    if (!seen.emplace(pair.first, pair.second).second) {
      throw ParseError(line_no, "duplicate pair '" + pair.first + "' '" +
                                    pair.second + "'");
    }
    out.push_back(std::move(pair));
    if (end == text.size()) break;
  }
  return out;
}

SimilarityDataset read_similarity_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_similarity_dataset(ss.str());
}

std::vector<double> average_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && values[idx[j + 1]] == values[idx[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw ContractError("pearson: inputs differ in length");
  }
  if (x.size() < 2) throw ContractError("pearson: needs at least 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) {
    throw ContractError("pearson: correlation undefined for constant input");
  }
  return sxy / std::sqrt(sxx * syy);
}

double spearman_rho(const std::vector<double>& x,
                    const std::vector<double>& y) {
  return pearson(average_ranks(x), average_ranks(y));
}

SpearmanResult spearman(const SimilarityDataset& dataset,
                        const VectorResolver& resolve) {
  if (dataset.empty()) throw ContractError("spearman: empty dataset");
  std::vector<double> model, human;
  for (const SimilarityPair& pair : dataset) {
    const auto a = resolve(pair.first);
    const auto b = resolve(pair.second);
    if (!a || !b || a->size() != b->size()) continue;
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a->size(); ++i) {
      dot += (*a)[i] * (*b)[i];
      na += (*a)[i] * (*a)[i];
      nb += (*b)[i] * (*b)[i];
    }
    if (na == 0 || nb == 0) continue;
    model.push_back(dot / std::sqrt(na * nb));
    human.push_back(pair.score);
  }
  if (model.size() < 2) {
    throw ContractError("spearman: fewer than 2 resolvable pairs (" +
                        std::to_string(model.size()) + " of " +
                        std::to_string(dataset.size()) + ")");
  }
  return {spearman_rho(model, human), model.size(), dataset.size()};
}

SpearmanResult spearman(const SimilarityDataset& dataset,
                        const EmbeddingTable& table, BackoffPolicy policy,
                        const OovEmbedder* mimick) {
  return spearman(dataset,
                  [&](const std::string& w) -> std::optional<std::vector<double>> {
                    try {
                      return lookup(table, policy, mimick, w).vector;
                    } catch (const LookupError&) {
                      return std::nullopt;
                    }
                  });
}

double mcnemar_exact_p(std::uint64_t b, std::uint64_t c) {
  const std::uint64_t n = b + c;
  if (n == 0) return 1.0;
  const std::uint64_t k = std::min(b, c);
  double p;
  if (n <= 62) {
    unsigned __int128 coef = 1, tail = 0;
    for (std::uint64_t i = 0; i <= k; ++i) {
      tail += coef;
      coef = coef * (n - i) / (i + 1);
    }
    p = std::ldexp(static_cast<double>(tail), 1 - static_cast<int>(n));
  } else {
    const long double log_n_fact = std::lgamma(static_cast<long double>(n) + 1);
    const long double log_half = -static_cast<long double>(n) * std::log(2.0L);
    std::vector<long double> logs;
    for (std::uint64_t i = 0; i <= k; ++i) {
      logs.push_back(log_n_fact - std::lgamma(static_cast<long double>(i) + 1) -
                     std::lgamma(static_cast<long double>(n - i) + 1) + log_half);
    }
    const long double mx = *std::max_element(logs.begin(), logs.end());
    long double s = 0;
    for (long double l : logs) s += std::exp(l - mx);
    p = static_cast<double>(2.0L * std::exp(mx) * s);
  }
  return std::min(1.0, p);
}

double mcnemar_chi2_p(std::uint64_t b, std::uint64_t c) {
  const std::uint64_t n = b + c;
  if (n == 0) return 1.0;
  const double diff =
      std::max(0.0, std::abs(static_cast<double>(b) - static_cast<double>(c)) - 1.0);
  const double stat = diff * diff / static_cast<double>(n);
  return std::erfc(std::sqrt(stat / 2.0));
}

McNemarResult mcnemar_from_counts(std::uint64_t b, std::uint64_t c,
                                  double alpha) {
  McNemarResult r;
  r.b = b;
  r.c = c;
  r.exact = b + c <= kMcNemarExactLimit;
  r.p_value = r.exact ? mcnemar_exact_p(b, c) : mcnemar_chi2_p(b, c);
  r.significant = r.p_value < alpha;
  return r;
}

McNemarResult mcnemar(const std::vector<bool>& correct_a,
                      const std::vector<bool>& correct_b, double alpha) {
  if (correct_a.size() != correct_b.size()) {
    throw ContractError("mcnemar: sequences differ in length (" +
                        std::to_string(correct_a.size()) + " vs " +
                        std::to_string(correct_b.size()) + ")");
  }
  std::uint64_t b = 0, c = 0;
  for (std::size_t i = 0; i < correct_a.size(); ++i) {
    if (correct_a[i] && !correct_b[i]) ++b;
    if (!correct_a[i] && correct_b[i]) ++c;
  }
  return mcnemar_from_counts(b, c, alpha);
}

EvalReport evaluate(const TaggedCorpusPair& pair) {
  EvalReport r;
  r.tokens = pair.token_count();
  r.oov_tokens = pair.oov_count();
  r.pos_accuracy = pos_accuracy(pair);
  if (r.oov_tokens > 0) {
    r.pos_accuracy_oov = pos_accuracy(pair, TokenSubset::kOovOnly);
  }
  r.f1 = micro_f1(pair);
  return r;
}

std::string format_report(const EvalReport& report) {
  std::string out;
  auto kv = [&](std::string_view key, double v) {
    out += key;
    out += '\t';
    append_number(out, v);
    out += '\n';
  };
  auto kv_int = [&](std::string_view key, std::uint64_t v) {
    out += key;
    out += '\t';
    out += std::to_string(v);
    out += '\n';
  };
  auto counts = [&](const F1Counts& c) {
    kv_int("tp", c.tp);
    kv_int("fp", c.fp);
    kv_int("fn", c.fn);
    kv("precision", c.precision);
    kv("recall", c.recall);
    kv("f1", c.f1);
  };
  kv_int("tokens", report.tokens);
  kv_int("oov_tokens", report.oov_tokens);
  kv("pos_accuracy", report.pos_accuracy);
  if (report.pos_accuracy_oov) kv("pos_accuracy_oov", *report.pos_accuracy_oov);
  out += "[micro_f1]\n";
  counts(report.f1.total);
  for (const auto& [name, c] : report.f1.per_attribute) {
    out += "[attribute " + name + "]\n";
    counts(c);
  }
  if (report.mcnemar) {
    const McNemarResult& m = *report.mcnemar;
    out += "[mcnemar]\n";
    kv_int("b", m.b);
    kv_int("c", m.c);
    kv("p_value", m.p_value);
    out += std::string("method\t") + (m.exact ? "exact" : "chi2") + "\n";
    out += std::string("significant\t") + (m.significant ? "true" : "false") +
           "\n";
  }
  return out;
}

}  // namespace mimick
