#include "kbc/eval/split.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "kbc/base/errors.h"
#include "kbc/base/rng.h"

namespace kbc::eval {

const char *SplitNameString(SplitName s) {
  switch (s) {
    case SplitName::kTrain: return "train";
    case SplitName::kVal: return "val";
    case SplitName::kTest: return "test";
  }
  return "?";
}

SplitName DocumentSplit::Of(const std::string &pmid) const {
  auto in = [&](const std::vector<std::string> &v) {
    return std::find(v.begin(), v.end(), pmid) != v.end();
  };
  if (in(train)) return SplitName::kTrain;
  if (in(val)) return SplitName::kVal;
  if (in(test)) return SplitName::kTest;
  throw ConfigError("pmid " + pmid + " is in no split");
}

bool DocumentSplit::Contains(const std::string &pmid) const {
  for (const auto *v : {&train, &val, &test}) {
    if (std::find(v->begin(), v->end(), pmid) != v->end()) return true;
  }
  return false;
}

Json DocumentSplit::ToJson() const {
  return Json{{"train", train}, {"val", val}, {"test", test}};
}

DocumentSplit DocumentSplit::FromJson(const Json &j) {
  DocumentSplit s;
  s.train = j.at("train").get<std::vector<std::string>>();
  s.val = j.at("val").get<std::vector<std::string>>();
  s.test = j.at("test").get<std::vector<std::string>>();
  AssertDisjoint(s);
  return s;
}

DocumentSplit SplitByDocument(std::vector<std::string> pmids, const SplitRatios &ratios,
                              uint64_t seed) {
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
      std::fabs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be non-negative and sum to 1");
  }
  std::sort(pmids.begin(), pmids.end());
  pmids.erase(std::unique(pmids.begin(), pmids.end()), pmids.end());
  Rng rng(seed);
  rng.Shuffle(pmids);

  const size_t n = pmids.size();
  size_t n_val = static_cast<size_t>(std::llround(n * ratios.val));
  size_t n_test = static_cast<size_t>(std::llround(n * ratios.test));
  if (n_val + n_test > n) n_test = n - std::min(n, n_val);

  DocumentSplit split;
  split.val.assign(pmids.begin(), pmids.begin() + n_val);
  split.test.assign(pmids.begin() + n_val, pmids.begin() + n_val + n_test);
  split.train.assign(pmids.begin() + n_val + n_test, pmids.end());
  for (auto *v : {&split.train, &split.val, &split.test}) std::sort(v->begin(), v->end());
  AssertDisjoint(split);
  return split;
}

void AssertDisjoint(const DocumentSplit &split) {
  std::set<std::string> seen;
  for (const auto *v : {&split.train, &split.val, &split.test}) {
    for (const std::string &pmid : *v) {
      if (!seen.insert(pmid).second) {
        throw Error("pmid " + pmid + " appears in more than one split");
      }
    }
  }
}

}  // namespace kbc::eval
