#include <cmath>

#include "doctest.h"
#include "kbc/base/errors.h"
#include "kbc/base/rng.h"
#include "kbc/repr/sentence_repr.h"
#include "kbc/text/segmenter.h"
#include "kbc/base/strings.h"
#include "../test_util.h"

using namespace kbc;
using namespace kbc::repr;

namespace {

text::Document Doc(const std::string &pmid, const std::string &body) {
  text::Document d;
  d.pmid = pmid;
  d.sections.push_back({"Results", body, false});
  return d;
}

EmbeddingTable TwoDimTable() {
  EmbeddingTable t(2, OovPolicy::kZeros);
  t.Set("a", {1, 0});
  t.Set("b", {0, 1});
  return t;
}

}  // namespace

TEST_CASE("idf over a four-document corpus") {
  text::Corpus corpus;
  corpus.Add(Doc("1", "The carriers were BRCA2 positive."));
  corpus.Add(Doc("2", "The cohort was large."));
  corpus.Add(Doc("3", "The study ended."));
  corpus.Add(Doc("4", "The end."));
  VocabStats stats = VocabStats::Fit(corpus);
  CHECK(stats.n_docs() == 4);
  CHECK(stats.DocFreq("brca2") == 1);
  CHECK(stats.DocFreq("the") == 4);
  CHECK(stats.Idf("BRCA2") == doctest::Approx(1.3862943611198906).epsilon(1e-12));
  CHECK(stats.Idf("the") == doctest::Approx(0.0));
  CHECK(stats.Idf("unseen") == doctest::Approx(1.6094379124341003).epsilon(1e-12));
  CHECK_THROWS_AS(VocabStats::Fit(text::Corpus()), ConfigError);
}

TEST_CASE("bow and tfidf weighting on a two-token vocabulary") {
  EmbeddingTable table = TwoDimTable();
  text::TokenizedSentence s = text::MakeSentence("x", 0, "a b");
  ReprResult bow = Represent(s.tokens, ReprMode::kBow, table, nullptr, nullptr, "a b");
  CHECK_FALSE(bow.zero_vector);
  CHECK(bow.vector.values[0] == doctest::Approx(0.5));
  CHECK(bow.vector.values[1] == doctest::Approx(0.5));

  // df(a)=1, df(b)=9 over n=27 gives idf(a)=3 ln3, idf(b)=ln3: weights 3:1.
  VocabStats stats = VocabStats::FromCounts({{"a", 1}, {"b", 9}}, 27);
  CHECK(stats.Idf("a") == doctest::Approx(3.2958368660043291).epsilon(1e-12));
  ReprResult tfidf = Represent(s.tokens, ReprMode::kTfidf, table, &stats, nullptr, "a b");
  CHECK(tfidf.vector.values[0] == doctest::Approx(0.75));
  CHECK(tfidf.vector.values[1] == doctest::Approx(0.25));

  CHECK_THROWS_AS(Represent(s.tokens, ReprMode::kTfidf, table, nullptr, nullptr, "a b"),
                  ConfigError);
  CHECK_THROWS_AS(Represent(s.tokens, ReprMode::kCls, table, nullptr, nullptr, "a b"),
                  ConfigError);
  CHECK_THROWS(VocabStats::FromCounts({{"a", 5}}, 3));
}

TEST_CASE("all-OOV sentence under the zeros policy is a zero vector") {
  EmbeddingTable table = TwoDimTable();
  text::TokenizedSentence s = text::MakeSentence("x", 0, "zz yy");
  ReprResult r = Represent(s.tokens, ReprMode::kBow, table, nullptr, nullptr, s.sentence.text);
  CHECK(r.zero_vector);
  CHECK(r.vector.values == std::vector<double>{0, 0});
  ReprResult empty = Represent({}, ReprMode::kBow, table, nullptr, nullptr, "");
  CHECK(empty.zero_vector);
}

TEST_CASE("hashed table is deterministic and case-folds on lookup") {
  EmbeddingTable a = EmbeddingTable::Hashed(16, 4);
  EmbeddingTable b = EmbeddingTable::Hashed(16, 4);
  CHECK(*a.Lookup("BRCA2") == *b.Lookup("BRCA2"));
  CHECK(*a.Lookup("brca2") != *EmbeddingTable::Hashed(16, 5).Lookup("brca2"));
  EmbeddingTable t = TwoDimTable();
  CHECK(t.Lookup("A").has_value());
  CHECK_FALSE(t.Lookup("c").has_value());

  kbc::testing::TempDir dir;
  std::string path = dir.File("vec.txt");
  WriteFile(path, "2 3\ncarrier 1 2 3\nrisk 0 0 1\n");
  EmbeddingTable loaded = EmbeddingTable::LoadText(path, OovPolicy::kZeros);
  CHECK(loaded.dim() == 3);
  CHECK(loaded.size() == 2);
  CHECK(*loaded.Lookup("Carrier") == std::vector<double>{1, 2, 3});
}

TEST_CASE("cls representation has the encoder width") {
  text::TokenizedSentence s =
      text::MakeSentence("x", 0, "BRCA2 carriers had an OR of 6.20 for breast cancer.");
  std::vector<std::vector<std::string>> words(1);
  for (const auto &t : s.tokens) words[0].push_back(t.token);
  nn::SubwordVocab vocab = nn::SubwordVocab::Build(words);
  nn::TransformerConfig cfg;
  cfg.vocab_size = vocab.size();
  cfg.hidden = 768;
  cfg.heads = 12;
  cfg.layers = 1;
  cfg.ffn = 32;
  cfg.max_length = 8;  // forces truncation
  nn::TransformerEncoder encoder(cfg);
  ClsEncoder cls{&vocab, &encoder};
  EmbeddingTable table = EmbeddingTable::Hashed(8);
  ReprResult r = Represent(s.tokens, ReprMode::kCls, table, nullptr, &cls, s.sentence.text);
  CHECK(r.vector.dim() == 768);
  CHECK(r.vector.mode == ReprMode::kCls);
  CHECK_FALSE(r.zero_vector);
}

TEST_CASE("tfidf is invariant to scaling all idf weights") {
  Rng rng(8);
  EmbeddingTable table = EmbeddingTable::Hashed(6, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> pool = {"gene", "risk", "or", "cohort", "the", "cases"};
    std::string text;
    int n = static_cast<int>(rng.UniformInt(1, 8));
    for (int i = 0; i < n; ++i) text += (i ? " " : "") + rng.Pick(pool);
    text::TokenizedSentence s = text::MakeSentence("x", 0, text);

    // With n2 = n1^2 and df2 = df1^2 every idf doubles exactly.
    std::map<std::string, int> df1, df2;
    for (size_t i = 0; i < pool.size(); ++i) df1[pool[i]] = 1 + static_cast<int>(i % 3);
    for (auto &[k, d] : df1) df2[k] = d * d;
    VocabStats s1 = VocabStats::FromCounts(df1, 64);
    VocabStats s2 = VocabStats::FromCounts(df2, 64 * 64);
    ReprResult r1 = Represent(s.tokens, ReprMode::kTfidf, table, &s1, nullptr, text);
    ReprResult r2 = Represent(s.tokens, ReprMode::kTfidf, table, &s2, nullptr, text);
    for (int i = 0; i < 6; ++i) {
      CHECK(r1.vector.values[i] == doctest::Approx(r2.vector.values[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("tfidf with uniform idf equals bow") {
  Rng rng(12);
  EmbeddingTable table = EmbeddingTable::Hashed(6, 2);
  std::vector<std::string> pool = {"gene", "risk", "or", "cohort", "the", "cases"};
  std::map<std::string, int> df;
  for (const auto &w : pool) df[w] = 1;
  VocabStats uniform = VocabStats::FromCounts(df, 10);
  for (int trial = 0; trial < 100; ++trial) {
    std::string text;
    int n = static_cast<int>(rng.UniformInt(1, 8));
    for (int i = 0; i < n; ++i) text += (i ? " " : "") + rng.Pick(pool);
    text::TokenizedSentence s = text::MakeSentence("x", 0, text);
    ReprResult bow = Represent(s.tokens, ReprMode::kBow, table, nullptr, nullptr, text);
    ReprResult tf = Represent(s.tokens, ReprMode::kTfidf, table, &uniform, nullptr, text);
    for (int i = 0; i < 6; ++i) {
      CHECK(tf.vector.values[i] == doctest::Approx(bow.vector.values[i]).epsilon(1e-9));
    }
  }
}
