#ifndef KBC_ROD_SYNTHETIC_H_
#define KBC_ROD_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include "kbc/er/example.h"
#include "kbc/rod/risk_record.h"
#include "kbc/text/document.h"

namespace kbc::rod {

struct SyntheticSpec {
  uint64_t seed = 7;
  int n_docs = 10;
  int min_genes_per_doc = 1;
  int max_genes_per_doc = 3;
  // Includes protective estimates below 1 (e.g. HR 0.49).
  double min_estimate = 0.20;
  double max_estimate = 15.0;
  // Probability that two consecutive genes share one sentence, which
  // yields cross-pair negative relations.
  double negative_pair_rate = 0.3;
  int filler_sentences = 4;
};

// Sentence-level ascertainment ground truth, usable as direct annotations.
struct DirectLabel {
  std::string pmid;
  int sent_id = 0;
  std::string text;
  bool positive = false;
};

struct SyntheticCorpus {
  text::Corpus corpus;
  std::vector<RiskRecord> rod;
  std::vector<er::ERExample> er_examples;
  std::vector<DirectLabel> ascertainment_labels;
};

// Fixed vocabulary of real gene symbols used by the generator.
const std::vector<std::string> &SyntheticGenes();

// Pure function of the spec. Every document has an abstract (excluded),
// a methods section with 2-3 planted ascertainment sentences whose text is
// copied verbatim into the ROD snippets, and a results section of
// "GENE ... (OR, 6.20; 95% CI, 4.62-8.17)" style risk sentences whose gene
// and estimate tokens are the gold entities.
SyntheticCorpus GenerateSyntheticCorpus(const SyntheticSpec &spec);

// Writes manifest.jsonl, docs/<pmid>.xml, rod.csv, er.jsonl and
// ascertainment_direct.jsonl under `dir`.
void WriteSyntheticCorpus(const SyntheticCorpus &corpus, const std::string &dir);

// Deterministic text form of everything generated, for equality checks.
std::string SerializeSynthetic(const SyntheticCorpus &corpus);

}  // namespace kbc::rod

#endif  // KBC_ROD_SYNTHETIC_H_
