#include <cmath>
#include <filesystem>
#include <limits>

#include "doctest.h"
#include "kbc/asc/classifier.h"
#include "kbc/base/errors.h"
#include "kbc/base/rng.h"
#include "kbc/base/strings.h"
#include "../gradcheck.h"
#include "../test_util.h"

using namespace kbc;
using namespace kbc::asc;

namespace {

void Toy(uint64_t seed, int n, std::vector<AscInput> *x, std::vector<int> *y) {
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    int label = i % 2;
    double cx = label ? 2.0 : -2.0;
    x->push_back({{cx + rng.Uniform(-1, 1), rng.Uniform(-1, 1)}, {}});
    y->push_back(label);
  }
}

AscTrainConfig LinearConfig(ClassifierKind kind) {
  AscTrainConfig c;
  c.kind = kind;
  c.lr = 0.1;
  c.epochs = 30;
  c.batch_size = 8;
  return c;
}

}  // namespace

TEST_CASE("logistic fits a separable toy set") {
  std::vector<AscInput> x;
  std::vector<int> y;
  Toy(1, 60, &x, &y);
  TrainResult r = Train(x, y, {}, {}, LinearConfig(ClassifierKind::kLogistic), "bow");
  CHECK(EvaluateClassifier(*r.model, x, y).accuracy == 1.0);
  CHECK(r.log.size() == 30);
  for (double p : PredictScores(*r.model, x)) {
    CHECK(p >= 0);
    CHECK(p <= 1);
  }
}

TEST_CASE("hinge svm fits and is calibrated into [0, 1]") {
  std::vector<AscInput> x, vx;
  std::vector<int> y, vy;
  Toy(2, 60, &x, &y);
  Toy(3, 20, &vx, &vy);
  TrainResult r = Train(x, y, vx, vy, LinearConfig(ClassifierKind::kSvmHinge), "tfidf");
  CHECK(EvaluateClassifier(*r.model, x, y).accuracy == 1.0);
  auto scores = PredictScores(*r.model, vx);
  for (size_t i = 0; i < scores.size(); ++i) {
    CHECK(scores[i] > 0);
    CHECK(scores[i] < 1);
    CHECK((scores[i] >= 0.5) == (vy[i] == 1));
  }
}

TEST_CASE("zero logistic model predicts one half") {
  LinearModel m(ClassifierKind::kLogistic, 3, "bow");
  CHECK(m.Probability({{1, -2, 5}, {}}) == 0.5);
  CHECK_THROWS_AS(m.Probability({{1, 2}, {}}), ConfigError);
}

TEST_CASE("linear training is bit-reproducible and label-flip symmetric") {
  std::vector<AscInput> x;
  std::vector<int> y;
  Toy(5, 40, &x, &y);
  AscTrainConfig c = LinearConfig(ClassifierKind::kLogistic);
  TrainResult a = Train(x, y, {}, {}, c, "bow");
  TrainResult b = Train(x, y, {}, {}, c, "bow");
  auto *la = dynamic_cast<LinearModel *>(a.model.get());
  auto *lb = dynamic_cast<LinearModel *>(b.model.get());
  CHECK(la->weights() == lb->weights());
  CHECK(la->bias() == lb->bias());

  std::vector<int> flipped;
  for (int v : y) flipped.push_back(1 - v);
  TrainResult f = Train(x, flipped, {}, {}, c, "bow");
  auto pa = PredictScores(*a.model, x), pf = PredictScores(*f.model, x);
  for (size_t i = 0; i < x.size(); ++i) CHECK((pa[i] >= 0.5) != (pf[i] >= 0.5));
}

TEST_CASE("non-finite inputs abort training") {
  std::vector<AscInput> x = {{{std::numeric_limits<double>::quiet_NaN(), 1}, {}}, {{1, 1}, {}}};
  std::vector<int> y = {1, 0};
  CHECK_THROWS_AS(Train(x, y, {}, {}, LinearConfig(ClassifierKind::kLogistic), "bow"), Divergence);
}

TEST_CASE("encoder classifier gradients and probabilities") {
  std::vector<std::string> words = {"Cases", "were", "recruited", "from", "clinics", "."};
  nn::TransformerConfig cfg;
  cfg.hidden = 8;
  cfg.ffn = 16;
  cfg.init_std = 0.3;
  EncoderClassifier clf(nn::SubwordVocab::Build({words}), cfg);
  auto d = clf.Distribution(words);
  CHECK(d[0] + d[1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(clf.Probability({{}, words}) == clf.Probability({{}, words}));

  nn::ParamList params = clf.Params();
  nn::ZeroGrads(params);
  clf.Loss(words, true, 1.0, true);
  Rng rng(2);
  auto r = kbc::testing::CheckGradients(params, [&] { return clf.Loss(words, true, 1.0, false); },
                                        rng, 4);
  INFO(r.worst);
  CHECK(r.max_relative_error <= 1e-4);

  // Long inputs are truncated rather than rejected.
  std::vector<std::string> many(200, "cases");
  double p = clf.Probability({{}, many});
  CHECK(p > 0);
  CHECK(p < 1);
}

TEST_CASE("encoder classifier learns and checkpoints") {
  std::vector<AscInput> x;
  std::vector<int> y;
  std::vector<std::string> pos = {"Cases", "were", "recruited", "from", "registries", "."};
  std::vector<std::string> neg = {"BRCA2", "carriers", "had", "higher", "risk", "."};
  for (int i = 0; i < 16; ++i) {
    x.push_back({{}, i % 2 ? pos : neg});
    y.push_back(i % 2);
  }
  AscTrainConfig c;
  c.kind = ClassifierKind::kEncoder;
  c.lr = 3e-3;
  c.epochs = 15;
  c.batch_size = 4;
  c.encoder.hidden = 16;
  c.encoder.ffn = 32;
  TrainResult r = Train(x, y, {}, {}, c, "cls");
  CHECK(EvaluateClassifier(*r.model, x, y).f1 == 1.0);

  kbc::testing::TempDir dir;
  std::string path = SaveCheckpoint(r, c, dir.path(), "run-1", "abc", Json{{"test", 1}});
  CHECK(path == dir.path() + "/asc_encoder/run-1");
  CHECK(std::filesystem::exists(path + "/metadata.json"));
  CHECK(std::filesystem::exists(path + "/training_log.jsonl"));
  Json meta = Json::parse(ReadFile(path + "/metadata.json"));
  CHECK(meta["data_hash"] == "abc");
  CHECK(meta["metrics"]["test"] == 1);
  auto loaded = LoadClassifier(path);
  CHECK(PredictScores(*loaded, x) == PredictScores(*r.model, x));

  AscTrainConfig back = AscTrainConfig::FromJson(c.ToJson());
  CHECK(back.ToJson() == c.ToJson());
  CHECK(AscTrainConfig::FromJson(Json{{"kind", "logistic"}}).lr == 0.05);
}
