#include "kbc/label/labeler.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "kbc/base/errors.h"
#include "kbc/text/segmenter.h"

namespace kbc::label {

Json ToJson(const LabeledSentence &s) {
  Json j{{"pmid", s.pmid},
         {"sent_id", s.sent_id},
         {"text", s.text},
         {"label", s.positive ? "positive" : "negative"},
         {"score", s.score ? Json(*s.score) : Json(nullptr)},
         {"provenance", s.provenance == Provenance::kDirect ? "direct" : "distant"},
         {"repr_mode", s.repr_mode.empty() ? Json(nullptr) : Json(s.repr_mode)}};
  if (s.matched_snippet_idx) j["matched_snippet_idx"] = *s.matched_snippet_idx;
  if (!s.split.empty()) j["split"] = s.split;
  return j;
}

LabeledSentence LabeledFromJson(const Json &j) {
  LabeledSentence s;
  s.pmid = j.at("pmid").get<std::string>();
  s.sent_id = j.at("sent_id").get<int>();
  s.text = j.value("text", "");
  std::string label = j.at("label").get<std::string>();
  if (label != "positive" && label != "negative") {
    throw ConfigError("bad label '" + label + "' for " + s.pmid);
  }
  s.positive = label == "positive";
  if (j.contains("score") && !j["score"].is_null()) s.score = j["score"].get<double>();
  if (j.contains("matched_snippet_idx")) {
    s.matched_snippet_idx = j["matched_snippet_idx"].get<int>();
  }
  s.provenance = j.value("provenance", "distant") == "direct" ? Provenance::kDirect
                                                              : Provenance::kDistant;
  if (j.contains("repr_mode") && !j["repr_mode"].is_null()) {
    s.repr_mode = j["repr_mode"].get<std::string>();
  }
  s.split = j.value("split", "");
  return s;
}

std::vector<LabeledSentence> ReadLabeled(const std::string &path) {
  std::vector<LabeledSentence> out;
  for (const Json &j : ReadJsonl(path)) out.push_back(LabeledFromJson(j));
  return out;
}

double Cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ConfigError("cosine of vectors with dims " + std::to_string(u.size()) + " and " +
                      std::to_string(v.size()));
  }
  double dot = 0, uu = 0, vv = 0;
  for (size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0 || vv == 0) throw Undefined("cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

namespace {

bool IsZero(const std::vector<double> &v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0; });
}

}  // namespace

DocumentLabeling LabelDocument(const std::vector<std::vector<double>> &sentence_vecs,
                               const std::vector<std::vector<double>> &snippet_vecs,
                               int k) {
  if (k < 1) throw ConfigError("k must be positive");
  if (sentence_vecs.empty() || snippet_vecs.empty()) {
    throw ConfigError("label_document needs sentences and snippets");
  }
  DocumentLabeling out;
  const size_t n = sentence_vecs.size();
  out.labels.resize(n);

  std::vector<size_t> usable;
  for (size_t j = 0; j < snippet_vecs.size(); ++j) {
    if (IsZero(snippet_vecs[j])) {
      out.warnings.push_back("snippet " + std::to_string(j) + " has a zero vector");
    } else {
      usable.push_back(j);
    }
  }

  std::vector<size_t> scored;
  for (size_t i = 0; i < n; ++i) {
    if (IsZero(sentence_vecs[i])) {
      out.warnings.push_back("sentence " + std::to_string(i) + " has a zero vector");
      continue;
    }
    SentenceLabel &l = out.labels[i];
    for (size_t j : usable) {
      double c = Cosine(sentence_vecs[i], snippet_vecs[j]);
      if (!l.score || c > *l.score) {
        l.score = c;
        l.matched_snippet_idx = static_cast<int>(j);
      }
    }
    if (l.score) scored.push_back(i);
  }

  if (n < static_cast<size_t>(k)) {
    out.warnings.push_back("document has " + std::to_string(n) + " sentences, fewer than k=" +
                           std::to_string(k));
  }
  std::stable_sort(scored.begin(), scored.end(), [&](size_t a, size_t b) {
    return *out.labels[a].score > *out.labels[b].score;
  });
  size_t take = std::min(scored.size(), static_cast<size_t>(k));
  for (size_t r = 0; r < take; ++r) out.labels[scored[r]].positive = true;
  return out;
}

std::vector<LabeledSentence> AscertainmentDataset::All() const {
  std::vector<LabeledSentence> all = train;
  all.insert(all.end(), val.begin(), val.end());
  all.insert(all.end(), test.begin(), test.end());
  return all;
}

AscertainmentDataset BuildAscertainmentDataset(const text::Corpus &corpus,
                                               const std::vector<rod::RiskRecord> &rod,
                                               const std::vector<LabeledSentence> &direct,
                                               const repr::Representer &representer,
                                               const DatasetConfig &config) {
  AscertainmentDataset ds;
  ds.repr_mode = representer.mode();
  const std::string mode_name = repr::ReprModeName(representer.mode());

  std::map<std::string, std::vector<std::string>> snippets = rod::SnippetsByPmid(rod);
  std::set<std::string> missing;
  for (const auto &r : rod) {
    if (!corpus.Find(r.pmid) && missing.insert(r.pmid).second) ds.missing_pmids.push_back(r.pmid);
  }

  std::vector<std::string> pmids;
  for (const auto &doc : corpus.documents()) pmids.push_back(doc.pmid);
  ds.split = eval::SplitByDocument(pmids, config.ratios, config.split_seed);

  std::map<std::pair<std::string, int>, const LabeledSentence *> direct_index;
  for (const auto &d : direct) direct_index[{d.pmid, d.sent_id}] = &d;

  for (const auto &doc : corpus.documents()) {
    const eval::SplitName which = ds.split.Of(doc.pmid);
    const char *split_name = eval::SplitNameString(which);
    std::vector<text::TokenizedSentence> sentences = text::SegmentAndTokenize(doc);
    if (sentences.empty()) continue;

    if (which == eval::SplitName::kTest) {
      int found = 0;
      for (const auto &s : sentences) {
        auto it = direct_index.find({doc.pmid, s.sentence.sent_id});
        if (it == direct_index.end()) continue;
        LabeledSentence l = *it->second;
        l.text = s.sentence.text;
        l.provenance = Provenance::kDirect;
        l.score.reset();
        l.matched_snippet_idx.reset();
        l.repr_mode = mode_name;
        l.split = split_name;
        ds.test.push_back(std::move(l));
        ++found;
      }
      if (found == 0) {
        ds.warnings.push_back(doc.pmid + ": test document without direct annotations");
      }
      continue;
    }

    auto it = snippets.find(doc.pmid);
    if (it == snippets.end() || it->second.empty()) {
      ds.warnings.push_back(doc.pmid + ": no ascertainment snippets; document skipped");
      continue;
    }
    std::vector<std::vector<double>> sent_vecs, snip_vecs;
    for (const auto &s : sentences) sent_vecs.push_back(representer(s).vector.values);
    for (size_t j = 0; j < it->second.size(); ++j) {
      snip_vecs.push_back(
          representer(text::MakeSentence(doc.pmid, static_cast<int>(j), it->second[j]))
              .vector.values);
    }
    DocumentLabeling labeling = LabelDocument(sent_vecs, snip_vecs, config.k);
    for (const auto &w : labeling.warnings) ds.warnings.push_back(doc.pmid + ": " + w);

    auto &dest = which == eval::SplitName::kTrain ? ds.train : ds.val;
    for (size_t i = 0; i < sentences.size(); ++i) {
      LabeledSentence l;
      l.pmid = doc.pmid;
      l.sent_id = sentences[i].sentence.sent_id;
      l.text = sentences[i].sentence.text;
      l.positive = labeling.labels[i].positive;
      l.score = labeling.labels[i].score;
      l.matched_snippet_idx = labeling.labels[i].matched_snippet_idx;
      l.provenance = Provenance::kDistant;
      l.repr_mode = mode_name;
      l.split = split_name;
      dest.push_back(std::move(l));
    }
  }

  std::set<std::string> train_p, val_p, test_p;
  for (const auto &l : ds.train) train_p.insert(l.pmid);
  for (const auto &l : ds.val) val_p.insert(l.pmid);
  for (const auto &l : ds.test) test_p.insert(l.pmid);
  for (const auto &p : train_p) {
    if (val_p.count(p) || test_p.count(p)) throw Error("pmid " + p + " leaks across splits");
  }
  for (const auto &p : val_p) {
    if (test_p.count(p)) throw Error("pmid " + p + " leaks across splits");
  }
  return ds;
}

}  // namespace kbc::label
