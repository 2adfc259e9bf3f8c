#include <doctest.h>

#include <sstream>

#include "mimick/embeddings.hpp"
#include "mimick/errors.hpp"
#include "mimick/random.hpp"

using namespace mimick;

namespace {

EmbeddingTable parse(const std::string& text) {
  std::istringstream in(text);
  return read_embeddings(in);
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  FAIL("no ParseError for: " << text);
  return 0;
}

class ConstantEmbedder : public OovEmbedder {
 public:
  explicit ConstantEmbedder(std::size_t dim) : dim_(dim) {}
  std::size_t output_dim() const override { return dim_; }
  std::vector<double> embed(std::string_view) const override {
    ++calls;
    return std::vector<double>(dim_, 7.0);
  }
  mutable int calls = 0;

 private:
  std::size_t dim_;
};

}  // namespace

TEST_CASE("reading a table") {
  const EmbeddingTable t = parse("3 2\ndog 1 2\ncat -0.5 1e-3\n<UNK> 0 0\n");
  CHECK(t.size() == 2);
  CHECK(t.dim() == 2);
  CHECK(t.has_unk());
  REQUIRE(t.find("cat"));
  CHECK(t.vector(*t.find("cat"))[1] == 1e-3);
  CHECK_FALSE(t.find("Dog"));
}

TEST_CASE("malformed tables report the offending line") {
  CHECK(error_line("") == 1);
  CHECK(error_line("2\n") == 1);
  CHECK(error_line("2 0\n") == 1);
  CHECK(error_line("2 2\ndog 1 2\ncat 1\n") == 3);
  CHECK(error_line("2 2\ndog 1 x\ncat 1 2\n") == 2);
  CHECK(error_line("2 2\ndog 1 2\ndog 3 4\n") == 3);
  CHECK(error_line("1 2\ndog 1 nan\n") == 2);
  CHECK(error_line("2 2\ndog 1 2\n") == 3);
  CHECK(error_line("1 2\ndog 1 2\ncat 1 2\n") == 3);
}

TEST_CASE("write and read round trip exactly") {
  Rng rng(21);
  EmbeddingTable t(5);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> v(5);
    for (double& x : v) x = rng.uniform(-1e3, 1e3) * std::pow(10.0, rng.uniform(-10, 5));
    t.add("w" + std::to_string(i) + (i % 3 ? "é" : ""), v);
  }
  t.set_unk(std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5});
  const std::string text = embeddings_to_string(t);
  const EmbeddingTable back = parse(text);
  REQUIRE(back.size() == t.size());
  CHECK(back.words() == t.words());
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t k = 0; k < 5; ++k) CHECK(back.vector(i)[k] == t.vector(i)[k]);
  }
  CHECK(std::vector<double>(back.unk().begin(), back.unk().end()) ==
        std::vector<double>(t.unk().begin(), t.unk().end()));
  CHECK(embeddings_to_string(back) == text);
}

TEST_CASE("table contract errors") {
  EmbeddingTable t(2);
  t.add("a", std::vector<double>{1, 2});
  CHECK_THROWS_AS(t.add("a", std::vector<double>{1, 2}), ContractError);
  CHECK_THROWS_AS(t.add("<UNK>", std::vector<double>{1, 2}), ContractError);
  CHECK_THROWS_AS(t.add("b", std::vector<double>{1}), DimensionError);
}

TEST_CASE("lookup policies") {
  EmbeddingTable t = parse("3 2\ndog 1 2\nParis 3 4\n<UNK> 9 9\n");
  ConstantEmbedder mimick(2);

  for (BackoffPolicy p : {BackoffPolicy::kUnkWithLowercase, BackoffPolicy::kMimickDirect,
                          BackoffPolicy::kTableOnly}) {
    const LookupResult r = lookup(t, p, &mimick, "dog");
    CHECK(r.provenance == Provenance::kInVocab);
    CHECK(r.vector == std::vector<double>{1, 2});
  }
  CHECK(mimick.calls == 0);

  const LookupResult lower = lookup(t, BackoffPolicy::kUnkWithLowercase, nullptr, "Dog");
  CHECK(lower.provenance == Provenance::kLowercase);
  CHECK(lower.vector == std::vector<double>{1, 2});

  const LookupResult unk = lookup(t, BackoffPolicy::kUnkWithLowercase, nullptr, "paris");
  CHECK(unk.provenance == Provenance::kUnk);
  CHECK(unk.vector == std::vector<double>{9, 9});

  const LookupResult direct = lookup(t, BackoffPolicy::kMimickDirect, &mimick, "Dog");
  CHECK(direct.provenance == Provenance::kMimicked);
  CHECK(direct.vector == std::vector<double>{7, 7});
  CHECK(mimick.calls == 1);

  CHECK_THROWS_AS(lookup(t, BackoffPolicy::kTableOnly, nullptr, "Dog"), LookupError);
  CHECK_THROWS(lookup(t, BackoffPolicy::kMimickDirect, nullptr, "Dog"));

  EmbeddingTable no_unk = parse("1 2\ndog 1 2\n");
  CHECK_THROWS(lookup(no_unk, BackoffPolicy::kUnkWithLowercase, nullptr, "cat"));
}
