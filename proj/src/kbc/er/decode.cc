#include "kbc/er/decode.h"

#include <algorithm>
#include <map>

#include "kbc/base/strings.h"

namespace kbc::er {

Json Triple::ToJson() const {
  return {{"pmid", pmid},
          {"sent_id", sent_id},
          {"gene", gene},
          {"estimate", estimate},
          {"metric", metric},
          {"polarity", PolarityName(polarity)},
          {"confidence", confidence},
          {"window", {window.start_tok, window.end_tok}},
          {"gene_span", {gene_span.start_tok, gene_span.end_tok}},
          {"estimate_span", {estimate_span.start_tok, estimate_span.end_tok}}};
}

Triple Triple::FromJson(const Json &j) {
  Triple t;
  t.pmid = j.at("pmid").get<std::string>();
  t.sent_id = j.at("sent_id").get<int>();
  t.gene = j.at("gene").get<std::string>();
  t.estimate = j.at("estimate").get<std::string>();
  t.metric = j.value("metric", "");
  t.polarity = ParsePolarity(j.at("polarity").get<std::string>());
  t.confidence = j.at("confidence").get<double>();
  if (j.contains("window")) t.window = {j["window"][0].get<int>(), j["window"][1].get<int>()};
  if (j.contains("gene_span")) {
    t.gene_span = {j["gene_span"][0].get<int>(), j["gene_span"][1].get<int>(),
                   EntityType::kGermlineMutation};
  }
  if (j.contains("estimate_span")) {
    t.estimate_span = {j["estimate_span"][0].get<int>(), j["estimate_span"][1].get<int>(),
                       EntityType::kRiskEstimate};
  }
  return t;
}

std::vector<EntitySpan> MergeTags(const std::vector<EntityType> &tags) {
  std::vector<EntitySpan> out;
  const int n = static_cast<int>(tags.size());
  for (int i = 0; i < n;) {
    if (tags[i] == EntityType::kNone) {
      ++i;
      continue;
    }
    int j = i + 1;
    while (j < n && tags[j] == tags[i]) ++j;
    out.push_back({i, j, tags[i]});
    i = j;
  }
  return out;
}

std::string InferMetric(const ERExample &sentence, const EntitySpan &estimate) {
  for (int k = estimate.start_tok - 1; k >= std::max(0, estimate.start_tok - 4); --k) {
    std::string t = ToLower(sentence.tokens[k].token);
    if (t == "or") return "OR";
    if (t == "rr") return "RR";
    if (t == "hr") return "HR";
  }
  return "";
}

std::vector<Triple> DecodeTriples(const ERExample &sentence,
                                  const std::vector<EntityType> &tags,
                                  const PairScorer &scorer, const DecodeOptions &options) {
  std::vector<EntitySpan> spans = MergeTags(tags);
  std::vector<EntitySpan> genes, estimates;
  for (const auto &s : spans) {
    (s.type == EntityType::kGermlineMutation ? genes : estimates).push_back(s);
  }
  if (genes.empty() || estimates.empty()) return {};

  const int n = static_cast<int>(sentence.tokens.size());
  std::vector<SpanWindow> windows;
  if (options.scope == PairScope::kSentence) {
    windows.push_back({0, n});
  } else {
    windows = EnumerateSpans(n, options.window);
  }

  std::vector<Triple> out;
  for (const EntitySpan &g : genes) {
    for (const EntitySpan &e : estimates) {
      std::optional<Triple> best;
      for (const SpanWindow &w : windows) {
        if (!w.Contains(g.start_tok, g.end_tok) || !w.Contains(e.start_tok, e.end_tok)) continue;
        std::optional<double> r = scorer(w, g, e);
        if (!r) continue;
        if (best && *r <= best->confidence) continue;
        Triple t;
        t.pmid = sentence.pmid;
        t.sent_id = sentence.sent_id;
        t.gene = sentence.Surface(g);
        t.estimate = sentence.Surface(e);
        t.metric = InferMetric(sentence, e);
        t.confidence = *r;
        t.polarity = *r >= options.threshold ? Polarity::kPositive : Polarity::kNegative;
        t.window = w;
        t.gene_span = g;
        t.estimate_span = e;
        best = std::move(t);
      }
      if (best) out.push_back(std::move(*best));
    }
  }
  return out;
}

std::vector<Json> TriplesToJson(const std::vector<Triple> &triples) {
  std::vector<Json> out;
  for (const auto &t : triples) out.push_back(t.ToJson());
  return out;
}

}  // namespace kbc::er
