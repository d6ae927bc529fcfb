#ifndef KBC_LABEL_LABELER_H_
#define KBC_LABEL_LABELER_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kbc/base/jsonl.h"
#include "kbc/eval/split.h"
#include "kbc/repr/sentence_repr.h"
#include "kbc/rod/risk_record.h"
#include "kbc/text/document.h"

namespace kbc::label {

enum class Provenance { kDistant, kDirect };

struct LabeledSentence {
  std::string pmid;
  int sent_id = 0;
  std::string text;
  bool positive = false;
  // Max cosine over the document's snippets; absent for direct labels and
  // for sentences whose vector is zero.
  std::optional<double> score;
  std::optional<int> matched_snippet_idx;
  Provenance provenance = Provenance::kDistant;
  std::string repr_mode;
  std::string split;
};

Json ToJson(const LabeledSentence &s);
LabeledSentence LabeledFromJson(const Json &j);
std::vector<LabeledSentence> ReadLabeled(const std::string &path);

// u.v / (|u| |v|), clamped to [-1, 1]. Throws Undefined when either vector
// is all zeros and ConfigError when the dimensions differ.
double Cosine(std::span<const double> u, std::span<const double> v);

struct SentenceLabel {
  bool positive = false;
  std::optional<double> score;
  std::optional<int> matched_snippet_idx;
};

struct DocumentLabeling {
  std::vector<SentenceLabel> labels;
  std::vector<std::string> warnings;
};

// Scores every sentence by its best cosine over the snippets and marks the
// k best positive; ties at the cut go to the earlier sentence. With fewer
// than k sentences all are positive (and a warning is recorded). Zero
// vectors cannot be scored: such sentences get no score, are never
// positive, and zero snippets are skipped, each with a warning.
DocumentLabeling LabelDocument(const std::vector<std::vector<double>> &sentence_vecs,
                               const std::vector<std::vector<double>> &snippet_vecs,
                               int k = 3);

struct DatasetConfig {
  int k = 3;
  eval::SplitRatios ratios;
  uint64_t split_seed = 13;
};

struct AscertainmentDataset {
  std::vector<LabeledSentence> train;
  std::vector<LabeledSentence> val;
  std::vector<LabeledSentence> test;
  repr::ReprMode repr_mode = repr::ReprMode::kTfidf;
  eval::DocumentSplit split;
  std::vector<std::string> missing_pmids;  // in the ROD, not in the corpus
  std::vector<std::string> warnings;

  // train, val, test concatenated in that order.
  std::vector<LabeledSentence> All() const;
};

// Splits the corpus by document; train/val documents with ROD snippets
// are distant-labeled, test documents take their labels from `direct`
// (sentences without a direct label are left out).
AscertainmentDataset BuildAscertainmentDataset(const text::Corpus &corpus,
                                               const std::vector<rod::RiskRecord> &rod,
                                               const std::vector<LabeledSentence> &direct,
                                               const repr::Representer &representer,
                                               const DatasetConfig &config);

}  // namespace kbc::label

#endif  // KBC_LABEL_LABELER_H_
