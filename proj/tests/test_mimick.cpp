#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "mimick/errors.hpp"
#include "mimick/gradient_check.hpp"
#include "mimick/mimick_model.hpp"
#include "mimick/ops.hpp"
#include "mimick/utf8.hpp"
#include "synthetic.hpp"

using namespace mimick;

namespace {

const MimickArchitecture kSmall{3, 4, 5};

MimickModel random_model(std::size_t d, std::uint64_t seed,
                         const MimickArchitecture& arch = kSmall) {
  Rng rng(seed);
  MimickModel m = MimickModel::create(CharVocabulary::build({"abcdef", "xyz"}), d, arch, rng);
  for (Parameter* p : m.parameters()) {
    for (double& v : p->value().values()) v = rng.uniform(-0.8, 0.8);
  }
  return m;
}

std::string random_word(Rng& rng, std::size_t max_len) {
  static const std::string letters = "abcdefxyzq";
  std::string w;
  const std::size_t n = 1 + rng.uniform_index(max_len);
  for (std::size_t i = 0; i < n; ++i) w += letters[rng.uniform_index(letters.size())];
  return w;
}

double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// One LSTM step from the zero state, written out by hand.
std::vector<double> first_step(const LstmCell& cell, std::span<const double> x) {
  const std::size_t h = cell.hidden_size;
  std::vector<double> out(h);
  for (std::size_t j = 0; j < h; ++j) {
    double z[4];
    for (std::size_t g = 0; g < 4; ++g) {
      z[g] = cell.bias.value()[g * h + j];
      for (std::size_t k = 0; k < x.size(); ++k) {
        z[g] += cell.weight.value().at(g * h + j, k) * x[k];
      }
    }
    const double c = sig(z[0]) * std::tanh(z[3]);
    out[j] = sig(z[2]) * std::tanh(c);
  }
  return out;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("character vocabulary") {
  const CharVocabulary v = CharVocabulary::build({"bca", "éa"});
  CHECK(v.size() == 5);
  CHECK(v.index('a') == 1);
  CHECK(v.index('b') == 2);
  CHECK(v.index(U'é') == 4);
  CHECK(v.index('z') == CharVocabulary::kUnk);
  CHECK(v.encode("aéz") == std::vector<std::size_t>{1, 4, 0});
  CHECK_THROWS_AS(CharVocabulary::from_characters({'b', 'a'}), ContractError);
}

TEST_CASE("zero model outputs zeros of the right length") {
  const MimickModel m = MimickModel::zeros(CharVocabulary::build({"ab"}), 7, kSmall);
  for (std::size_t len : {1u, 2u, 40u}) {
    const auto out = mimick_forward(m, std::string(len, 'a'));
    CHECK(out.size() == 7);
    CHECK(std::all_of(out.begin(), out.end(), [](double v) { return v == 0.0; }));
  }
  CHECK_THROWS_AS(mimick_forward(m, ""), ContractError);
}

TEST_CASE("default architecture shapes") {
  Rng rng(1);
  MimickModel m = MimickModel::create(CharVocabulary::build({"ab"}), 64, {}, rng);
  CHECK(m.char_embeddings().shape() == Shape{3, 20});
  CHECK(m.forward_lstm().weight.shape() == Shape{200, 70});
  CHECK(m.hidden_weight().shape() == Shape{50, 100});
  CHECK(m.output_weight().shape() == Shape{64, 50});
  for (std::size_t len : {1u, 2u, 40u}) CHECK(mimick_forward(m, std::string(len, 'b')).size() == 64);
}

TEST_CASE("single-character word matches a straight-line evaluation") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    MimickModel m = random_model(3, seed);
    const std::size_t id = m.chars().index('c');
    const auto x = m.char_embeddings().value().row(id);
    std::vector<double> both = first_step(m.forward_lstm(), x);
    const auto hb = first_step(m.backward_lstm(), x);
    both.insert(both.end(), hb.begin(), hb.end());
    std::vector<double> expected(3);
    const Tensor& th = m.hidden_weight().value();
    const Tensor& ot = m.output_weight().value();
    std::vector<double> hidden(th.rows());
    for (std::size_t i = 0; i < th.rows(); ++i) {
      double z = m.hidden_bias().value()[i];
      for (std::size_t k = 0; k < both.size(); ++k) z += th.at(i, k) * both[k];
      hidden[i] = std::tanh(z);
    }
    for (std::size_t i = 0; i < 3; ++i) {
      double z = m.output_bias().value()[i];
      for (std::size_t k = 0; k < hidden.size(); ++k) z += ot.at(i, k) * hidden[k];
      expected[i] = z;
    }
    CHECK(max_abs_diff(mimick_forward(m, "c"), expected) < 1e-12);
  }
}

TEST_CASE("loss examples") {
  MimickModel m = MimickModel::zeros(CharVocabulary::build({"ab"}), 2, kSmall);
  m.output_bias().value()[0] = 1;
  m.output_bias().value()[1] = 2;
  CHECK(mimick_loss(m, "ab", std::vector<double>{0, 0}) == 5.0);
  CHECK(mimick_loss(m, "ab", std::vector<double>{1, 2}) == 0.0);
  CHECK_THROWS_AS(mimick_loss(m, "ab", std::vector<double>{1, 2, 3}), DimensionError);

  const MimickModel r = random_model(4, 3);
  const auto out = mimick_forward(r, "abc");
  CHECK(mimick_loss(r, "abc", out) == 0.0);
}

TEST_CASE("loss gradient matches finite differences") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    MimickModel m = random_model(3, seed);
    Rng rng(seed * 7);
    const std::string word = random_word(rng, 6);
    std::vector<double> target(3);
    for (double& t : target) t = rng.uniform(-1, 1);
    const auto ids = m.chars().encode(word);
    const auto report = gradient_check(
        [&](Tape& t) { return m.loss(t, ids, target); }, m.parameters());
    CAPTURE(word);
    CAPTURE(report.worst_parameter);
    CHECK(report.max_relative_error < 1e-4);
  }
}

TEST_CASE("reversed spelling under a direction-swapped model") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const MimickModel m = random_model(4, seed);
    MimickModel swapped = m;
    std::swap(swapped.forward_lstm().weight.value(), swapped.backward_lstm().weight.value());
    std::swap(swapped.forward_lstm().bias.value(), swapped.backward_lstm().bias.value());
    Tensor& th = swapped.hidden_weight().value();
    const std::size_t h = kSmall.lstm_hidden;
    for (std::size_t i = 0; i < th.rows(); ++i) {
      for (std::size_t k = 0; k < h; ++k) std::swap(th.at(i, k), th.at(i, h + k));
    }
    Rng rng(seed);
    for (int trial = 0; trial < 5; ++trial) {
      std::string w = random_word(rng, 8);
      std::string r(w.rbegin(), w.rend());
      CHECK(max_abs_diff(mimick_forward(swapped, r), mimick_forward(m, w)) < 1e-12);
    }
  }
}

TEST_CASE("unseen characters collapse to the UNK character") {
  const MimickModel m = random_model(4, 9);
  CHECK(mimick_forward(m, "aqb") == mimick_forward(m, "awb"));
  CHECK(mimick_forward(m, "aжb") == mimick_forward(m, "a☃b"));
  CHECK_FALSE(mimick_forward(m, "aab") == mimick_forward(m, "aqb"));
}

TEST_CASE("embed is pure and counts calls") {
  const MimickModel m = random_model(4, 2);
  CHECK(m.inference_count() == 0);
  CHECK(m.embed("abc") == m.embed("abc"));
  CHECK(m.inference_count() == 2);
  const MimickModel copy = m;
  CHECK(copy.inference_count() == 0);
}

TEST_CASE("train split, determinism and trace") {
  const auto lang = synthetic::bigram_language(150, 8, 0, 4);
  MimickTrainConfig cfg;
  cfg.epochs = 3;
  cfg.char_dim = 5;
  cfg.lstm_hidden = 6;
  cfg.mlp_hidden = 7;
  cfg.dev_fraction = 0.1;
  const MimickTrainResult a = train_mimick(lang.table, cfg);
  CHECK(a.dev_words.size() == mimick_dev_size(150, 0.1));
  CHECK(a.dev_words.size() == 15);
  CHECK(a.train_words.size() == 135);
  for (const auto& w : a.dev_words) {
    CHECK(std::find(a.train_words.begin(), a.train_words.end(), w) == a.train_words.end());
  }
  REQUIRE(a.trace.size() == 3);
  CHECK(std::isfinite(a.trace[0].dev_loss));

  const MimickTrainResult b = train_mimick(lang.table, cfg);
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(a.trace[e].train_loss == b.trace[e].train_loss);
    CHECK(a.trace[e].dev_loss == b.trace[e].dev_loss);
    CHECK(a.trace[e].sgd_loss == b.trace[e].sgd_loss);
  }
  CHECK(a.model.output_weight().value() == b.model.output_weight().value());

  cfg.dev_fraction = 0.0;
  CHECK(std::isnan(train_mimick(lang.table, cfg).trace[0].dev_loss));
  CHECK(mimick_dev_size(200, 0.01) == 2);
  CHECK(mimick_dev_size(100000, 0.01) == 1000);
}

TEST_CASE("UNK entries are not training targets") {
  auto lang = synthetic::bigram_language(20, 4, 0, 5);
  lang.table.set_unk(std::vector<double>{1, 1, 1, 1});
  MimickTrainConfig cfg;
  cfg.epochs = 1;
  cfg.dev_fraction = 0;
  const MimickTrainResult r = train_mimick(lang.table, cfg);
  CHECK(r.train_words.size() == 20);
  CHECK(std::find(r.train_words.begin(), r.train_words.end(), "<UNK>") == r.train_words.end());
}

TEST_CASE("training contract errors") {
  EmbeddingTable one(2);
  one.add("a", std::vector<double>{1, 2});
  CHECK_THROWS_AS(train_mimick(one, {}), ContractError);
  const auto lang = synthetic::bigram_language(10, 4, 0, 5);
  MimickTrainConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS_AS(train_mimick(lang.table, cfg), ContractError);
  cfg.epochs = 1;
  cfg.dev_fraction = 0.5;
  CHECK_THROWS_AS(train_mimick(lang.table, cfg), ContractError);
}

TEST_CASE("training converges on a learnable target") {
  const auto lang = synthetic::bigram_language(200, 16, 0, 3);
  MimickTrainConfig cfg;
  const MimickTrainResult r = train_mimick(lang.table, cfg);
  REQUIRE(r.trace.size() == 60);
  CHECK(r.trace.back().train_loss < 0.1 * r.trace.front().train_loss);
  for (std::size_t e = r.trace.size() - 10; e < r.trace.size(); ++e) {
    CHECK(r.trace[e].train_loss <= 1.05 * r.trace[e - 1].train_loss);
  }
}

TEST_CASE("infer_oov") {
  const MimickModel m = random_model(4, 11);
  EmbeddingTable table(4);
  table.add("abc", std::vector<double>{1, 2, 3, 4});
  CHECK(infer_oov(m, table, {}).empty());
  const EmbeddingTable out = infer_oov(m, table, {"xyz", "abc", "xyz"});
  CHECK(out.size() == 2);
  REQUIRE(out.find("abc"));
  const auto v = out.vector(*out.find("abc"));
  CHECK(std::vector<double>(v.begin(), v.end()) == mimick_forward(m, "abc"));
  CHECK(embeddings_to_string(infer_oov(m, table, {"xyz"})) ==
        embeddings_to_string(infer_oov(m, table, {"xyz"})));
  EmbeddingTable wrong(3);
  CHECK_THROWS_AS(infer_oov(m, wrong, {"a"}), DimensionError);
}

TEST_CASE("nearest neighbours") {
  EmbeddingTable t(2);
  t.add("east", std::vector<double>{1, 0});
  t.add("north", std::vector<double>{0, 3});
  t.add("zero", std::vector<double>{0, 0});
  t.add("west", std::vector<double>{-2, 0});
  const auto nn = nearest_neighbors(t, std::vector<double>{1, 0}, 4);
  REQUIRE(nn.size() == 4);
  CHECK(nn[0].word == "east");
  CHECK(std::abs(nn[0].similarity - 1.0) < 1e-12);
  CHECK(nn[1].word == "north");
  CHECK(nn[1].similarity == 0.0);
  CHECK(nn[2].word == "west");
  CHECK(nn[3].word == "zero");
  CHECK(std::isinf(nn[3].similarity));
  CHECK_THROWS_AS(nearest_neighbors(t, std::vector<double>{0, 0}, 1), ContractError);
  CHECK_THROWS_AS(nearest_neighbors(t, std::vector<double>{1, 0}, 5), ContractError);
  CHECK_THROWS_AS(nearest_neighbors(t, std::vector<double>{1, 0}, 0), ContractError);
}

TEST_CASE("nearest neighbours match an exhaustive scan") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    EmbeddingTable t(6);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 100; ++i) {
      std::vector<double> v(6);
      // Coarse values create exact ties.
      for (double& x : v) x = static_cast<double>(rng.uniform_index(3)) - 1.0;
      rows.push_back(v);
      t.add("w" + std::to_string(i), v);
    }
    std::vector<double> q(6);
    for (double& x : q) x = rng.uniform(-1, 1);
    std::vector<std::pair<double, int>> scored;
    for (int i = 0; i < 100; ++i) {
      double dot = 0, nv = 0, nq = 0;
      for (int k = 0; k < 6; ++k) {
        dot += rows[i][k] * q[k];
        nv += rows[i][k] * rows[i][k];
        nq += q[k] * q[k];
      }
      const double s = nv == 0 ? -INFINITY : dot / std::sqrt(nv * nq);
      scored.push_back({s, i});
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    const auto nn = nearest_neighbors(t, q, 5);
    CHECK(nn == nearest_neighbors_serial(t, q, 5));
    for (int r = 0; r < 5; ++r) {
      CHECK(nn[r].word == "w" + std::to_string(scored[r].second));
      CHECK(std::abs(nn[r].similarity - scored[r].first) < 1e-12);
    }
  }
}

TEST_CASE("mimick archive round trip") {
  const MimickModel m = random_model(4, 13);
  const auto path = std::filesystem::temp_directory_path() / "mimick_model_test.mmk";
  m.save(path, {{"seed", 13}});
  const MimickModel back = MimickModel::load(path);
  CHECK(back.chars() == m.chars());
  for (const std::string w : {"a", "fedcba", "zzq"}) CHECK(mimick_forward(back, w) == mimick_forward(m, w));
  std::filesystem::remove(path);
}
