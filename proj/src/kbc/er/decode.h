#ifndef KBC_ER_DECODE_H_
#define KBC_ER_DECODE_H_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kbc/base/jsonl.h"
#include "kbc/er/example.h"
#include "kbc/er/window.h"

namespace kbc::er {

// Which gene x estimate pairs are candidates: those sharing a window
// (the model's training regime) or any pair in the sentence.
enum class PairScope { kWindow, kSentence };

struct DecodeOptions {
  double threshold = 0.5;
  PairScope scope = PairScope::kWindow;
  WindowConfig window;
};

struct Triple {
  std::string pmid;
  int sent_id = 0;
  std::string gene;
  std::string estimate;
  std::string metric;  // "OR", "RR", "HR" or "" when no marker is nearby
  Polarity polarity = Polarity::kNegative;
  double confidence = 0;  // relation probability r in [0, 1]
  SpanWindow window;      // window that produced the confidence
  EntitySpan gene_span;
  EntitySpan estimate_span;

  Json ToJson() const;
  static Triple FromJson(const Json &j);
};

// Scores a candidate pair (sentence-level token spans) inside `window`;
// nullopt abstains and the pair yields no triple.
using PairScorer = std::function<std::optional<double>(
    const SpanWindow &window, const EntitySpan &gene, const EntitySpan &estimate)>;

// Contiguous runs of one non-none type become entity spans.
std::vector<EntitySpan> MergeTags(const std::vector<EntityType> &tags);

// The comparative-risk marker closest before the estimate (within four
// tokens), e.g. "OR" in "(OR, 12.33".
std::string InferMetric(const ERExample &sentence, const EntitySpan &estimate);

// Scores every candidate pair in every window that contains both spans
// and keeps the highest confidence per pair. Pairs with r >= threshold are
// positive. Output is ordered by gene span, then estimate span.
std::vector<Triple> DecodeTriples(const ERExample &sentence,
                                  const std::vector<EntityType> &tags,
                                  const PairScorer &scorer, const DecodeOptions &options);

std::vector<Json> TriplesToJson(const std::vector<Triple> &triples);

}  // namespace kbc::er

#endif  // KBC_ER_DECODE_H_
