#include <cmath>

#include "doctest.h"
#include "kbc/base/errors.h"
#include "kbc/base/rng.h"
#include "kbc/nn/encoder.h"
#include "kbc/nn/kernels.h"
#include "kbc/nn/param.h"
#include "kbc/nn/wordpiece.h"
#include "../test_util.h"

using namespace kbc;
using namespace kbc::nn;

namespace {

Matrix RandomMatrix(Rng &rng, int r, int c) {
  Matrix m(r, c);
  for (double &x : m.values()) x = rng.Uniform(-1, 1);
  return m;
}

double MaxAbsDiff(const Matrix &a, const Matrix &b) {
  double d = 0;
  for (size_t i = 0; i < a.values().size(); ++i) {
    d = std::max(d, std::fabs(a.values()[i] - b.values()[i]));
  }
  return d;
}

// Scalar objective sum(hidden * weights) and its gradient wrt hidden.
double Objective(const TransformerEncoder &enc, const std::vector<int> &ids,
                 const Matrix &weights) {
  Encoding e = enc.Forward(ids, false);
  double s = 0;
  for (size_t i = 0; i < weights.values().size(); ++i) {
    s += e.hidden.values()[i] * weights.values()[i];
  }
  return s;
}

}  // namespace

TEST_CASE("parallel gemm matches the serial reference") {
  Rng rng(1);
  for (bool ta : {false, true}) {
    for (bool tb : {false, true}) {
      for (auto [m, k, n] : {std::tuple{3, 5, 4}, std::tuple{70, 64, 96}}) {
        Matrix a = ta ? RandomMatrix(rng, k, m) : RandomMatrix(rng, m, k);
        Matrix b = tb ? RandomMatrix(rng, n, k) : RandomMatrix(rng, k, n);
        Matrix c0 = RandomMatrix(rng, m, n);
        Matrix c1 = c0;
        Gemm(a, ta, b, tb, 0.5, &c0);
        serial::Gemm(a, ta, b, tb, 0.5, &c1);
        CHECK(MaxAbsDiff(c0, c1) < 1e-12);
      }
    }
  }
}

TEST_CASE("gemm computes a known product") {
  Matrix a(2, 2), b(2, 2), c(2, 2);
  a(0, 0) = 1; a(0, 1) = 2; a(1, 0) = 3; a(1, 1) = 4;
  b(0, 0) = 5; b(0, 1) = 6; b(1, 0) = 7; b(1, 1) = 8;
  Gemm(a, false, b, false, 0.0, &c);
  CHECK(c(0, 0) == 19);
  CHECK(c(0, 1) == 22);
  CHECK(c(1, 0) == 43);
  CHECK(c(1, 1) == 50);
}

TEST_CASE("wordpiece decomposes numerics into digits") {
  SubwordVocab vocab = SubwordVocab::Build({{"BRCA2", "carriers", "had", "OR", "12.33"}});
  std::vector<int> ids = vocab.EncodeWord("12.33");
  REQUIRE(ids.size() == 5);
  CHECK(vocab.piece(ids[0]) == "1");
  CHECK(vocab.piece(ids[2]) == "##.");
  CHECK(vocab.EncodeWord("brca2") == vocab.EncodeWord("BRCA2"));
  CHECK(vocab.EncodeWord("carriers").size() == 1);
  for (int id : vocab.EncodeWord("zzz€")) CHECK(id >= 0);

  EncodedWords enc = EncodeWords(vocab, {"OR", "12.33"});
  CHECK(enc.ids.front() == SubwordVocab::kCls);
  CHECK(enc.ids.back() == SubwordVocab::kSep);
  CHECK(enc.word_first == std::vector<int>{1, 2});
  CHECK(enc.word_last == std::vector<int>{1, 6});

  kbc::testing::TempDir dir;
  vocab.Save(dir.File("vocab.txt"));
  SubwordVocab back = SubwordVocab::Load(dir.File("vocab.txt"));
  CHECK(back.size() == vocab.size());
  CHECK(back.EncodeWord("12.33") == ids);
}

TEST_CASE("encoder forward is deterministic and rejects long inputs") {
  TransformerConfig cfg;
  cfg.vocab_size = 20;
  cfg.hidden = 8;
  cfg.heads = 2;
  cfg.ffn = 12;
  cfg.max_length = 6;
  TransformerEncoder enc(cfg);
  std::vector<int> ids = {2, 5, 7, 3};
  Encoding a = enc.Forward(ids, false);
  Encoding b = enc.Forward(ids, false);
  CHECK(a.hidden.rows() == 4);
  CHECK(a.hidden.cols() == 8);
  CHECK(MaxAbsDiff(a.hidden, b.hidden) == 0.0);
  std::vector<int> too_long(7, 4);
  CHECK_THROWS_AS(enc.Forward(too_long, false), ConfigError);

  TransformerConfig round = TransformerConfig::FromJson(cfg.ToJson());
  CHECK(round.hidden == cfg.hidden);
  CHECK(round.max_length == cfg.max_length);
}

TEST_CASE("encoder backward matches finite differences") {
  TransformerConfig cfg;
  cfg.vocab_size = 12;
  cfg.hidden = 8;
  cfg.heads = 2;
  cfg.layers = 2;
  cfg.ffn = 16;
  cfg.max_length = 8;
  cfg.init_std = 0.3;
  cfg.seed = 5;
  TransformerEncoder enc(cfg);
  std::vector<int> ids = {2, 4, 9, 11, 3};
  Rng rng(17);
  Matrix weights = RandomMatrix(rng, 5, 8);

  ParamList params = enc.Params();
  ZeroGrads(params);
  Encoding e = enc.Forward(ids, true);
  enc.Backward(e, weights);

  const double h = 1e-5;
  double worst = 0;
  for (Param *p : params) {
    for (int trial = 0; trial < 6; ++trial) {
      size_t i = rng.UniformInt(0, static_cast<long>(p->value.values().size()) - 1);
      // Unused embedding rows have a zero gradient; probe used rows too.
      if (p->name == "emb.token") i = ids[trial % ids.size()] * 8 + trial;
      double &x = p->value.values()[i];
      double saved = x;
      x = saved + h;
      double up = Objective(enc, ids, weights);
      x = saved - h;
      double down = Objective(enc, ids, weights);
      x = saved;
      double numeric = (up - down) / (2 * h);
      double analytic = p->grad.values()[i];
      // Attention key biases have an exactly-zero gradient (softmax is
      // shift invariant); there the difference is pure rounding noise.
      double diff = std::fabs(numeric - analytic);
      double rel = diff < 1e-8 ? 0.0 : diff / (std::fabs(numeric) + std::fabs(analytic));
      INFO(p->name << "[" << i << "] numeric=" << numeric << " analytic=" << analytic);
      CHECK(rel < 1e-4);
      worst = std::max(worst, rel);
    }
  }
  MESSAGE("worst relative error " << worst);
}

TEST_CASE("adam moves parameters against the gradient") {
  Param p("w", 1, 2);
  p.value(0, 0) = 1.0;
  p.value(0, 1) = -1.0;
  Adam adam;
  for (int step = 0; step < 200; ++step) {
    // d/dw of 0.5 * |w|^2
    p.grad = p.value;
    adam.Step({&p}, 0.05);
  }
  CHECK(std::fabs(p.value(0, 0)) < 0.1);
  CHECK(std::fabs(p.value(0, 1)) < 0.1);
  CHECK(adam.steps() == 200);
}

TEST_CASE("params save and load by name") {
  Rng rng(3);
  Param a("a", 2, 3), b("b", 1, 4);
  a.InitNormal(rng, 1.0);
  b.InitNormal(rng, 1.0);
  kbc::testing::TempDir dir;
  SaveParams({&a, &b}, dir.File("p.bin"));
  Param a2("a", 2, 3), b2("b", 1, 4);
  LoadParams({&b2, &a2}, dir.File("p.bin"));
  CHECK(MaxAbsDiff(a.value, a2.value) == 0.0);
  CHECK(MaxAbsDiff(b.value, b2.value) == 0.0);
  Param wrong("a", 3, 3);
  CHECK_THROWS(LoadParams({&wrong}, dir.File("p.bin")));

  Snapshot snap = TakeSnapshot({&a});
  a.value(0, 0) += 1;
  RestoreSnapshot(snap, {&a});
  CHECK(a.value(0, 0) == a2.value(0, 0));
  CHECK(AllFinite({&a, &b}));
  a.value(1, 1) = std::nan("");
  CHECK_FALSE(AllFinite({&a}));
}
