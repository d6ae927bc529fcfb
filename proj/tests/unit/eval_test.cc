#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "kbc/base/errors.h"
#include "kbc/base/rng.h"
#include "kbc/eval/metrics.h"
#include "kbc/eval/perturb.h"
#include "kbc/eval/split.h"
#include "../fixtures.h"

using namespace kbc;
using namespace kbc::eval;

TEST_CASE("perfect predictions score 1 everywhere") {
  std::vector<int> y = {1, 0, 1, 1, 0};
  Metrics m = ComputeMetrics(y, y);
  CHECK(m.f1 == 1.0);
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.accuracy == 1.0);
  CHECK(m.mcc == 1.0);
  CHECK(m.flags.empty());
}

TEST_CASE("balanced confusion table has zero mcc") {
  Metrics m = ComputeMetrics(ConfusionCounts{1, 1, 1, 1});
  CHECK(m.mcc == 0.0);
  CHECK(m.f1 == doctest::Approx(0.5));
  CHECK(m.accuracy == doctest::Approx(0.5));
}

TEST_CASE("harmonic mean of the reported precision and recall") {
  CHECK(F1FromPrecisionRecall(0.92, 0.86) ==
        doctest::Approx(0.8889887640449438).epsilon(1e-12));
  CHECK(std::round(F1FromPrecisionRecall(0.92, 0.86) * 100) / 100 == doctest::Approx(0.89));
}

TEST_CASE("undefined metrics are NaN and flagged") {
  Metrics none = ComputeMetrics(ConfusionCounts{0, 0, 0, 4});
  CHECK(std::isnan(none.precision));
  CHECK(std::isnan(none.recall));
  CHECK(std::isnan(none.f1));
  CHECK(std::isnan(none.mcc));
  CHECK(none.accuracy == 1.0);
  CHECK(none.flags == std::vector<std::string>{"precision_undefined", "recall_undefined",
                                               "f1_undefined", "mcc_undefined"});
  Json j = none.ToJson();
  CHECK(j["f1"].is_null());

  Metrics empty = ComputeMetrics(ConfusionCounts{});
  CHECK(std::isnan(empty.accuracy));

  Metrics wrong = ComputeMetrics(ConfusionCounts{0, 2, 3, 0});
  CHECK(wrong.f1 == 0.0);
  CHECK(wrong.precision == 0.0);

  std::vector<int> a = {1}, b = {1, 0};
  CHECK_THROWS_AS(ComputeMetrics(a, b), ConfigError);
}

TEST_CASE("metrics are invariant under consistent permutation") {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    int n = static_cast<int>(rng.UniformInt(1, 30));
    std::vector<int> p(n), g(n), order(n);
    for (int i = 0; i < n; ++i) {
      p[i] = rng.Bernoulli(0.4);
      g[i] = rng.Bernoulli(0.4);
      order[i] = i;
    }
    rng.Shuffle(order);
    std::vector<int> p2(n), g2(n);
    for (int i = 0; i < n; ++i) {
      p2[i] = p[order[i]];
      g2[i] = g[order[i]];
    }
    Metrics a = ComputeMetrics(p, g), b = ComputeMetrics(p2, g2);
    CHECK(a.flags == b.flags);
    CHECK(a.counts.tp == b.counts.tp);
    CHECK(a.counts.tn == b.counts.tn);
    if (!std::isnan(a.mcc)) CHECK(a.mcc == b.mcc);
  }
}

TEST_CASE("split_by_document partitions ten documents 8/1/1") {
  std::vector<std::string> pmids;
  for (int i = 0; i < 10; ++i) pmids.push_back("p" + std::to_string(i));
  DocumentSplit s = SplitByDocument(pmids, {0.8, 0.1, 0.1}, 3);
  CHECK(s.train.size() == 8);
  CHECK(s.val.size() == 1);
  CHECK(s.test.size() == 1);

  DocumentSplit again = SplitByDocument(pmids, {0.8, 0.1, 0.1}, 3);
  CHECK(again.ToJson() == s.ToJson());
  std::reverse(pmids.begin(), pmids.end());
  CHECK(SplitByDocument(pmids, {0.8, 0.1, 0.1}, 3).ToJson() == s.ToJson());

  std::set<std::string> all;
  for (const auto *v : {&s.train, &s.val, &s.test}) all.insert(v->begin(), v->end());
  CHECK(all.size() == 10);
  CHECK(s.Of(s.val[0]) == SplitName::kVal);
  CHECK_THROWS_AS(s.Of("nope"), ConfigError);

  CHECK_THROWS_AS(SplitByDocument(pmids, {0.8, 0.3, 0.1}, 3), ConfigError);
  DocumentSplit bad;
  bad.train = {"a", "b"};
  bad.test = {"b"};
  CHECK_THROWS_AS(AssertDisjoint(bad), Error);
  CHECK_THROWS(DocumentSplit::FromJson(bad.ToJson()));
}

TEST_CASE("decimal point shifts") {
  CHECK(ShiftDecimal("12.33", 3) == "12330");
  CHECK(ShiftDecimal("12.33", -3) == "0.01233");
  CHECK(ShiftDecimal("5.43", 3) == "5430");
  CHECK(ShiftDecimal("25.61", -3) == "0.02561");
  CHECK(ShiftDecimal("0.49", 3) == "490");
  CHECK(ShiftDecimal("12330", -3) == "12.33");
  CHECK(ShiftDecimal("6.20", 0) == "6.2");
  CHECK(ShiftDecimal("-2.5", 3) == "-2500");
  CHECK(ShiftDecimal("0", 3) == "0");
  CHECK_THROWS_AS(ShiftDecimal("0.30%", 3), ConfigError);
}

TEST_CASE("task A and B rewrite the Table-2 sentence") {
  er::ERExample ex = kbc::testing::Table2Example();
  er::ERExample a = Perturb(ex, {PerturbationKind::kScaleUp});
  CHECK(a.text.find("(OR, 12330; 95% CI, 5430-25610)") != std::string::npos);
  CHECK(a.text.find("0.30% of cases") != std::string::npos);
  CHECK(a.tokens.size() == ex.tokens.size());
  CHECK(a.Surface(a.entities[4]) == "12330");
  CHECK(a.Surface(a.entities[0]) == "CDKN2A");

  er::ERExample b = Perturb(ex, {PerturbationKind::kScaleDown});
  CHECK(b.text.find("(OR, 0.01233; 95% CI, 0.00543-0.02561)") != std::string::npos);
  CHECK(b.Surface(b.entities[4]) == "0.01233");

  er::ERExample ab = Perturb(a, {PerturbationKind::kScaleDown});
  REQUIRE(ab.tokens.size() == ex.tokens.size());
  for (size_t i = 0; i < ex.tokens.size(); ++i) {
    if (ex.tokens[i].is_numeric) {
      CHECK(std::stod(ab.tokens[i].token) == std::stod(ex.tokens[i].token));
      CHECK(ab.tokens[i].token == ShiftDecimal(ex.tokens[i].token, 0));
    } else {
      CHECK(ab.tokens[i].token == ex.tokens[i].token);
    }
  }
}

TEST_CASE("task C replaces only gold estimates with letters") {
  er::ERExample ex = kbc::testing::Table2Example();
  er::ERExample c = Perturb(ex, {PerturbationKind::kReplaceNonNumeric, 9});
  REQUIRE(c.entities.size() == ex.entities.size());
  CHECK(c.relations.size() == ex.relations.size());
  CHECK(c.tokens.size() == ex.tokens.size());
  for (const auto &e : c.entities) {
    std::string s = c.Surface(e);
    if (e.type == er::EntityType::kRiskEstimate) {
      CHECK(s.size() == 3);
      CHECK(std::all_of(s.begin(), s.end(), [](char ch) { return ch >= 'A' && ch <= 'Z'; }));
    }
  }
  CHECK(c.text.find("5.43-25.61") != std::string::npos);
  CHECK(Perturb(ex, {PerturbationKind::kReplaceNonNumeric, 9}).text == c.text);

  // A multi-token estimate collapses to one replacement token.
  er::ERExample multi = kbc::testing::MakeExample("BRCA2 had OR 6.20 overall.", {"BRCA2"}, {}, {});
  multi.entities.push_back({3, 5, er::EntityType::kRiskEstimate});
  er::ERExample mc = Perturb(multi, {PerturbationKind::kReplaceNonNumeric, 1});
  CHECK(mc.tokens.size() == multi.tokens.size() - 1);
  CHECK(mc.entities[1].end_tok - mc.entities[1].start_tok == 1);
  CHECK(mc.tokens[mc.entities[1].start_tok + 1].token == ".");
}
