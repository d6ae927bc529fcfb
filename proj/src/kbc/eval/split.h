#ifndef KBC_EVAL_SPLIT_H_
#define KBC_EVAL_SPLIT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "kbc/base/jsonl.h"

namespace kbc::eval {

enum class SplitName { kTrain, kVal, kTest };

const char *SplitNameString(SplitName s);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct DocumentSplit {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;

  // Throws ConfigError for a pmid in no split.
  SplitName Of(const std::string &pmid) const;
  bool Contains(const std::string &pmid) const;

  Json ToJson() const;
  static DocumentSplit FromJson(const Json &j);
};

// Partitions distinct pmids: val and test get round(n * ratio) documents,
// train the rest. The result depends only on the set of pmids and the seed,
// not on input order. Ratios must be non-negative and sum to 1.
DocumentSplit SplitByDocument(std::vector<std::string> pmids, const SplitRatios &ratios,
                              uint64_t seed);

// Throws Error naming the first pmid found in two splits.
void AssertDisjoint(const DocumentSplit &split);

}  // namespace kbc::eval

#endif  // KBC_EVAL_SPLIT_H_
