// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <sys/wait.h>

#include "mimick/conllu.hpp"
#include "mimick/embeddings.hpp"
#include "mimick/errors.hpp"
#include "mimick/eval.hpp"
#include "mimick/files.hpp"
#include "mimick/gradient_check.hpp"
#include "mimick/mimick_model.hpp"
#include "mimick/random.hpp"
#include "mimick/tagger.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace mimick;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::vector<std::string> forms_of(const Corpus& c) {
  std::set<std::string> s;
  for (const Sentence& x : c) {
    for (const Token& t : x.tokens) s.insert(t.form);
  }
  return {s.begin(), s.end()};
}

std::vector<std::string> spellings(const std::vector<std::string>& forms) {
  std::string all;
  for (const std::string& f : forms) all += f;
  return {all};
}

void randomize(const ParameterList& params, Rng& rng, double scale) {
  for (Parameter* p : params) {
    for (double& v : p->value().values()) v = rng.uniform(-scale, scale);
  }
}

// Gradient fidelity of the mimick loss and the joint tagger loss.
Outcome gradients() {
  double worst = 0;
  std::string where;
  std::size_t checks = 0;
  auto record = [&](const GradientCheckReport& r, const std::string& label) {
    ++checks;
    if (r.max_relative_error > worst || !r.passed) {
      worst = std::max(worst, r.max_relative_error);
      where = label + " " + r.worst_parameter;
    }
  };

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const Corpus corpus = synthetic::random_corpus(2, 3, 2, 3, 500 + seed);
    const std::vector<std::string> forms = forms_of(corpus);
    const std::size_t d = 4;

    MimickModel mm = MimickModel::create(CharVocabulary::build(spellings(forms)), d,
                                         {3, 4, 5}, rng);
    randomize(mm.parameters(), rng, 0.8);
    std::vector<double> target(d);
    for (double& t : target) t = rng.uniform(-1, 1);
    const auto ids = mm.chars().encode(forms[rng.uniform_index(forms.size())]);
    record(gradient_check([&](Tape& t) { return mm.loss(t, ids, target); },
                          mm.parameters()),
           "mimick seed " + std::to_string(seed));

    // Roughly half the forms are in the table so both lookup paths run.
    EmbeddingTable table(d);
    for (const std::string& f : forms) {
      if (!rng.bernoulli(0.5)) continue;
      std::vector<double> v(d);
      for (double& x : v) x = rng.uniform(-1, 1);
      table.add(f, v);
    }
    table.set_unk(std::vector<double>{0.1, -0.2, 0.3, -0.4});
    auto frozen = std::make_shared<const MimickModel>(mm);

    for (Variant v : {Variant::kNoChar, Variant::kMimick, Variant::kCharToTag, Variant::kBoth}) {
      WordRepSpec spec;
      spec.variant = v;
      spec.table = table;
      if (uses_mimick(v)) spec.mimick = frozen;
      TaggerModel m = TaggerModel::create(build_schema(corpus), spec, forms,
                                          TaggerArchitecture{2, 3, 3, 2}, rng);
      randomize(m.parameters(), rng, 0.5);
      for (LossMode mode : {LossMode::kSum, LossMode::kWeighted}) {
        const Sentence& s = corpus[seed % corpus.size()];
        const auto report = gradient_check(
            [&](Tape& t) {
              const auto states = sentence_forward(t, m, s);
              return joint_loss(t, m, states, s, mode);
            },
            m.parameters());
        record(report, "tagger " + std::string(to_string(v)) +
                           (mode == LossMode::kSum ? " sum" : " weighted") + " seed " +
                           std::to_string(seed));
      }
    }
  }
  Outcome o;
  o.pass = worst < 1e-4;
  o.detail = std::to_string(checks) + " checks, max relative error " + fmt("%.2e", worst);
  if (!o.pass) o.detail += " at " + where;
  return o;
}

// Mimick training on a bigram-linear embedding language, then typo retrieval.
Outcome learnability() {
  const auto lang = synthetic::bigram_language(200, 16, 20, 1);
  const MimickTrainResult r = train_mimick(lang.table, MimickTrainConfig{});
  const double ratio = r.trace.back().train_loss / r.trace.front().train_loss;
  int hits = 0;
  for (std::size_t i = 0; i < lang.typos.size(); ++i) {
    for (const Neighbor& n : nearest_neighbors(lang.table, r.model.embed(lang.typos[i]), 5)) {
      if (n.word == lang.originals[i]) {
        ++hits;
        break;
      }
    }
  }
  Outcome o;
  o.pass = ratio < 0.1 && hits >= 16;
  o.detail = "loss ratio " + fmt("%.4f", ratio) + ", typo top-5 hits " + std::to_string(hits) +
             "/" + std::to_string(lang.typos.size());
  return o;
}

// Mimick-initialized rows against no-char rows on unseen stems.
Outcome oov_gain() {
  const auto lang = synthetic::suffix_language(100, 60, 1);
  const auto mimick =
      std::make_shared<const MimickModel>(train_mimick(lang.table, MimickTrainConfig{}).model);
  const CorpusSplit split{lang.train, lang.dev, lang.test};
  double acc[2];
  std::vector<bool> correct[2];
  int i = 0;
  for (Variant v : {Variant::kNoChar, Variant::kMimick}) {
    WordRepSpec spec;
    spec.variant = v;
    spec.table = lang.table;
    spec.mimick = mimick;
    const TaggerTrainResult r = train_tagger(split, spec, TaggerTrainConfig{});
    const TaggedCorpusPair pair(lang.test, tag_corpus(r.model, lang.test),
                                r.model.training_forms());
    acc[i] = pos_accuracy(pair, TokenSubset::kOovOnly);
    correct[i] = pos_correctness(pair, TokenSubset::kOovOnly);
    ++i;
  }
  const McNemarResult m = mcnemar(correct[1], correct[0]);
  const double gain = 100 * (acc[1] - acc[0]);
  Outcome o;
  o.pass = gain >= 10 && m.p_value < 0.01;
  o.detail = "oov pos accuracy no-char " + fmt("%.3f", acc[0]) + ", mimick " +
             fmt("%.3f", acc[1]) + ", gain " + fmt("%.1f", gain) + " points, mcnemar p " +
             fmt("%.2e", m.p_value);
  return o;
}

Outcome metric_oracles() {
  Rng rng(41);
  int f1_bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t attributes = 1 + rng.uniform_index(3), values = 1 + rng.uniform_index(3);
    const Corpus gold = synthetic::random_corpus(1 + rng.uniform_index(4), 5, attributes,
                                                 values, 1000 + trial);
    const Corpus pred = oracles::perturb(gold, attributes, values, rng);
    std::vector<std::vector<bool>> in_vocab;
    for (const Sentence& s : gold) in_vocab.emplace_back(s.tokens.size(), false);
    const MicroF1Report r = micro_f1(TaggedCorpusPair(gold, pred, in_vocab));
    const oracles::SlotCounts n = oracles::count_slots(gold, pred, attributes);
    f1_bad += r.total.tp != n.tp || r.total.fp != n.fp || r.total.fn != n.fn;
  }

  int rho_bad = 0, datasets = 0;
  while (datasets < 100) {
    const std::size_t n = 3 + rng.uniform_index(30);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.uniform_index(5));
      y[i] = static_cast<double>(rng.uniform_index(4));
    }
    if (std::set<double>(x.begin(), x.end()).size() < 2 ||
        std::set<double>(y.begin(), y.end()).size() < 2) {
      continue;
    }
    ++datasets;
    const double expected =
        oracles::naive_pearson(oracles::naive_ranks(x), oracles::naive_ranks(y));
    rho_bad += !(std::abs(spearman_rho(x, y) - expected) < 1e-12);
  }

  int p_bad = 0, tables = 0;
  for (std::uint64_t n = 0; n <= 30; ++n) {
    for (std::uint64_t b = 0; b <= n; ++b, ++tables) {
      p_bad += mcnemar_exact_p(b, n - b) != oracles::binomial_two_sided_p(b, n - b);
    }
  }
  Outcome o;
  o.pass = f1_bad == 0 && rho_bad == 0 && p_bad == 0;
  o.detail = "micro-f1 mismatches " + std::to_string(f1_bad) + "/1000, spearman " +
             std::to_string(rho_bad) + "/100, exact mcnemar " + std::to_string(p_bad) + "/" +
             std::to_string(tables);
  return o;
}

bool same_bits(const std::vector<const Parameter*>& a, const std::vector<const Parameter*>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i]->name() != b[i]->name() || a[i]->shape() != b[i]->shape()) return false;
    const auto u = a[i]->value().values(), v = b[i]->value().values();
    for (std::size_t k = 0; k < u.size(); ++k) {
      if (std::bit_cast<std::uint64_t>(u[k]) != std::bit_cast<std::uint64_t>(v[k])) return false;
    }
  }
  return true;
}

Outcome round_trips(const fs::path& dir) {
  Rng rng(61);
  int emb_bad = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t d = 1 + rng.uniform_index(8);
    EmbeddingTable t(d);
    for (int i = 0; i < 60; ++i) {
      std::vector<double> v(d);
      for (double& x : v) x = rng.uniform(-1, 1) * std::pow(10.0, rng.uniform(-300, 300));
      if (i == 0) v[0] = -0.0;
      t.add("w" + std::to_string(i) + (i % 3 ? "é中" : ""), v);
    }
    if (trial % 2) {
      std::vector<double> unk(d, std::numeric_limits<double>::denorm_min());
      t.set_unk(unk);
    }
    const std::string text = embeddings_to_string(t);
    std::istringstream in(text);
    const EmbeddingTable back = read_embeddings(in);
    bool ok = back.words() == t.words() && back.has_unk() == t.has_unk() &&
              embeddings_to_string(back) == text;
    for (std::size_t i = 0; ok && i < t.size(); ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        ok &= std::bit_cast<std::uint64_t>(back.vector(i)[k]) ==
              std::bit_cast<std::uint64_t>(t.vector(i)[k]);
      }
    }
    emb_bad += !ok;
  }

  int conllu_bad = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Corpus c = synthetic::random_corpus(15, 12, 4, 3, seed, seed % 2 == 0);
    const std::string text = serialize_conllu(c);
    const Corpus back = parse_conllu(text);
    conllu_bad += !(back == c) || serialize_conllu(back) != text;
  }

  int archive_bad = 0;
  const auto lang = synthetic::suffix_language(8, 2, 5);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Rng r(seed);
    MimickModel mm = MimickModel::create(CharVocabulary::build(lang.table.words()),
                                         lang.table.dim(), {3, 4, 5}, r);
    const fs::path mpath = dir / "m.mmk";
    mm.save(mpath);
    const MimickModel mback = MimickModel::load(mpath);
    const std::string mbytes = read_file(mpath.string());
    mback.save(mpath);
    archive_bad += !same_bits(std::as_const(mm).parameters(), mback.parameters()) ||
                   read_file(mpath.string()) != mbytes;

    WordRepSpec spec;
    spec.variant = Variant::kBoth;
    spec.table = lang.table;
    spec.mimick = std::make_shared<const MimickModel>(mm);
    const TaggerModel tm = TaggerModel::create(build_schema(lang.train), spec,
                                               forms_of(lang.train), {1, 3, 3, 2}, r);
    const fs::path tpath = dir / "t.mmk";
    tm.save(tpath);
    const TaggerModel tback = TaggerModel::load(tpath);
    const std::string tbytes = read_file(tpath.string());
    tback.save(tpath);
    archive_bad += !same_bits(tm.parameters(), tback.parameters()) ||
                   read_file(tpath.string()) != tbytes ||
                   serialize_conllu(tag_corpus(tm, lang.test)) !=
                       serialize_conllu(tag_corpus(tback, lang.test));
  }
  Outcome o;
  o.pass = emb_bad == 0 && conllu_bad == 0 && archive_bad == 0;
  o.detail = "embedding tables failing " + std::to_string(emb_bad) + "/10, conllu corpora " +
             std::to_string(conllu_bad) + "/20, model archives " +
             std::to_string(archive_bad) + "/6";
  return o;
}

Outcome defaults() {
  const MimickTrainConfig m;
  const TaggerTrainConfig t;
  std::vector<std::string> wrong;
  auto expect = [&](bool ok, const char* what) {
    if (!ok) wrong.emplace_back(what);
  };
  expect(m.char_dim == 20, "mimick char dim");
  expect(m.lstm_hidden == 50, "mimick hidden");
  expect(m.epochs == 60, "mimick epochs");
  expect(t.architecture.word_lstm_layers == 2, "tagger layers");
  expect(t.architecture.word_lstm_hidden == 128, "tagger hidden");
  expect(t.learning_rate == 0.01, "tagger lr");
  expect(t.dropout == 0.5, "tagger dropout");
  expect(t.effective_epochs(5001) == 40, "tagger epochs");
  expect(t.effective_epochs(5000) == 80, "tagger low-resource epochs");
  expect(t.architecture.char_dim == 20, "char-to-tag dim");
  expect(t.architecture.char_hidden == 128, "char-to-tag hidden");
  Outcome o;
  o.pass = wrong.empty();
  o.detail = o.pass ? "11 defaults match" : "wrong:";
  for (const std::string& w : wrong) o.detail += " " + w + ";";
  return o;
}

// Runs the CLI and returns its exit status; stdout goes to `out`.
int cli(const std::string& args, const fs::path& out) {
  const std::string cmd = std::string(MIMICK_CLI_PATH) + " " + args + " >" + out.string() +
                          " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism(const fs::path& dir) {
  const auto lang = synthetic::suffix_language(12, 6, 3);
  auto p = [&](const std::string& name) { return (dir / name).string(); };
  write_file_atomic(p("emb.txt"), embeddings_to_string(lang.table));
  write_file_atomic(p("train.conllu"), serialize_conllu(lang.train));
  write_file_atomic(p("dev.conllu"), serialize_conllu(lang.dev));
  write_file_atomic(p("test.conllu"), serialize_conllu(lang.test));
  write_file_atomic(p("words.txt"), "zzkak\nqqa\n" + lang.table.word(0) + "\n");

  struct Command {
    std::string name, args;
    std::vector<std::string> outputs;
  };
  const std::string small = " --char-dim 3 --lstm-hidden 4 --mlp-hidden 5";
  const std::string tagger = " --layers 1 --hidden 4 --char-dim 3 --char-hidden 3";
  const std::vector<Command> commands{
      {"train-mimick",
       "train-mimick --embeddings " + p("emb.txt") + " --out " + p("m.mmk") + " --trace " +
           p("m.tsv") + " --epochs 3 --seed 7" + small,
       {"m.mmk", "m.tsv"}},
      {"infer",
       "infer --model " + p("m.mmk") + " --embeddings " + p("emb.txt") + " --words " +
           p("words.txt") + " --out " + p("inferred.txt"),
       {"inferred.txt"}},
      {"nn", "nn --embeddings " + p("emb.txt") + " --model " + p("m.mmk") + " --word qqa --k 4",
       {}},
      {"train-tagger no-char",
       "train-tagger --train " + p("train.conllu") + " --dev " + p("dev.conllu") +
           " --embeddings " + p("emb.txt") + " --out " + p("a.mmk") + " --trace " +
           p("a.tsv") + " --epochs 2" + tagger,
       {"a.mmk", "a.tsv"}},
      {"train-tagger both",
       "train-tagger --train " + p("train.conllu") + " --dev " + p("dev.conllu") +
           " --embeddings " + p("emb.txt") + " --mimick " + p("m.mmk") + " --variant both" +
           " --loss weighted --out " + p("b.mmk") + " --trace " + p("b.tsv") + " --epochs 2" +
           tagger,
       {"b.mmk", "b.tsv"}},
      {"tag", "tag --model " + p("a.mmk") + " --input " + p("test.conllu") + " --out " +
                  p("a.conllu"),
       {"a.conllu"}},
      {"tag both", "tag --model " + p("b.mmk") + " --input " + p("test.conllu") + " --out " +
                       p("b.conllu"),
       {"b.conllu"}},
      {"eval", "eval --gold " + p("test.conllu") + " --pred " + p("a.conllu") + " --compare " +
                   p("b.conllu") + " --train " + p("train.conllu"),
       {}},
      {"eval model", "eval --gold " + p("test.conllu") + " --model " + p("b.mmk") +
                         " --out " + p("report.txt"),
       {"report.txt"}},
  };

  std::vector<std::string> failed;
  for (const Command& c : commands) {
    std::vector<std::string> runs[2];
    for (int run = 0; run < 2; ++run) {
      const fs::path out = dir / ("stdout" + std::to_string(run));
      if (cli(c.args, out) != 0) {
        runs[run].push_back("exit failure " + std::to_string(run));
        continue;
      }
      runs[run].push_back(read_file(out.string()));
      for (const std::string& f : c.outputs) runs[run].push_back(read_file(p(f)));
    }
    if (runs[0] != runs[1] || runs[0].size() != c.outputs.size() + 1 ||
        runs[0][0].rfind("exit failure", 0) == 0) {
      failed.push_back(c.name);
    }
  }
  Outcome o;
  o.pass = failed.empty();
  o.detail = std::to_string(commands.size() - failed.size()) + "/" +
             std::to_string(commands.size()) + " commands byte-identical across reruns";
  for (const std::string& f : failed) o.detail += "; differs: " + f;
  return o;
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "mimick_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  struct Criterion {
    std::string name;
    std::function<Outcome()> run;
    double budget_seconds;  // 0 for no limit
  };
  const std::vector<Criterion> criteria{
      {"gradient fidelity", gradients, 60},
      {"mimick learnability", learnability, 120},
      {"oov tagging gain", oov_gain, 300},
      {"metric oracles", metric_oracles, 0},
      {"format round trips", [&] { return round_trips(dir); }, 0},
      {"default hyperparameters", defaults, 0},
      {"cli determinism", [&] { return determinism(dir); }, 0},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (criteria[i].budget_seconds > 0 && seconds >= criteria[i].budget_seconds) {
      o.pass = false;
      o.detail += ", over the " + fmt("%.0f", criteria[i].budget_seconds) + "s budget";
    }
    failures += !o.pass;
    std::printf("%s %zu %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].name.c_str(), o.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  fs::remove_all(dir);
  return failures == 0 ? 0 : 1;
}
