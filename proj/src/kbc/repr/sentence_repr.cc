#include "kbc/repr/sentence_repr.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "kbc/base/errors.h"
#include "kbc/base/rng.h"
#include "kbc/base/strings.h"
#include "kbc/text/segmenter.h"
#include "kbc/text/tokenizer.h"

namespace kbc::repr {

const char *ReprModeName(ReprMode mode) {
  switch (mode) {
    case ReprMode::kTfidf: return "tfidf";
    case ReprMode::kCls: return "cls";
    default: return "bow";
  }
}

ReprMode ParseReprMode(const std::string &name) {
  if (name == "bow") return ReprMode::kBow;
  if (name == "tfidf") return ReprMode::kTfidf;
  if (name == "cls") return ReprMode::kCls;
  throw ConfigError("unknown representation mode '" + name + "'");
}

OovPolicy ParseOovPolicy(const std::string &name) {
  if (name == "zeros") return OovPolicy::kZeros;
  if (name == "hashed") return OovPolicy::kHashed;
  throw ConfigError("unknown OOV policy '" + name + "'");
}

EmbeddingTable::EmbeddingTable(int dim, OovPolicy policy, uint64_t seed)
    : dim_(dim), policy_(policy), seed_(seed) {
  if (dim <= 0) throw ConfigError("embedding dimension must be positive");
}

EmbeddingTable EmbeddingTable::Hashed(int dim, uint64_t seed) {
  return EmbeddingTable(dim, OovPolicy::kHashed, seed);
}

EmbeddingTable EmbeddingTable::LoadText(const std::string &path, OovPolicy policy,
                                        uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open word vectors " + path);
  std::string line;
  int dim = -1;
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  bool first = true;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string token;
    if (!(ss >> token)) continue;
    std::vector<double> vec;
    double x;
    while (ss >> x) vec.push_back(x);
    if (first && vec.size() == 1) {
      first = false;
      continue;  // "<count> <dim>" header
    }
    first = false;
    if (dim < 0) dim = static_cast<int>(vec.size());
    if (static_cast<int>(vec.size()) != dim || dim == 0) {
      throw ParseError("word vector for '" + token + "' has the wrong length", 0);
    }
    rows.emplace_back(token, std::move(vec));
  }
  if (dim <= 0) throw ParseError("no word vectors in " + path, 0);
  EmbeddingTable table(dim, policy, seed);
  for (auto &[token, vec] : rows) table.Set(token, std::move(vec));
  return table;
}

void EmbeddingTable::Set(const std::string &token, std::vector<double> vec) {
  if (static_cast<int>(vec.size()) != dim_) {
    throw ConfigError("vector length does not match table dimension");
  }
  table_[token] = std::move(vec);
}

std::vector<double> EmbeddingTable::HashedVector(const std::string &token) const {
  uint64_t state = Fingerprint(ToLower(token), seed_);
  std::vector<double> v(dim_);
  for (double &x : v) {
    x = (static_cast<double>(SplitMix64(state) >> 11) * 0x1.0p-53) * 2.0 - 1.0;
  }
  return v;
}

std::optional<std::vector<double>> EmbeddingTable::Lookup(
    const std::string &token) const {
  auto it = table_.find(token);
  if (it == table_.end()) it = table_.find(ToLower(token));
  if (it != table_.end()) return it->second;
  if (policy_ == OovPolicy::kHashed) return HashedVector(token);
  return std::nullopt;
}

VocabStats VocabStats::Fit(const text::Corpus &corpus) {
  if (corpus.empty()) throw ConfigError("cannot fit vocabulary statistics on an empty corpus");
  std::map<std::string, int> df;
  for (const text::Document &doc : corpus.documents()) {
    std::set<std::string> seen;
    for (const auto &sentence : text::SegmentAndTokenize(doc)) {
      for (const auto &tok : sentence.tokens) seen.insert(ToLower(tok.token));
    }
    for (const std::string &t : seen) ++df[t];
  }
  return FromCounts(std::move(df), static_cast<int>(corpus.size()));
}

VocabStats VocabStats::FromCounts(std::map<std::string, int> doc_freq, int n_docs) {
  if (n_docs <= 0) throw ConfigError("vocabulary statistics need at least one document");
  for (const auto &[token, count] : doc_freq) {
    if (count < 1 || count > n_docs) {
      throw ConfigError("document frequency of '" + token + "' out of range");
    }
  }
  VocabStats stats;
  stats.doc_freq_ = std::move(doc_freq);
  stats.n_docs_ = n_docs;
  return stats;
}

int VocabStats::DocFreq(const std::string &token) const {
  auto it = doc_freq_.find(ToLower(token));
  return it == doc_freq_.end() ? 0 : it->second;
}

double VocabStats::Idf(const std::string &token) const {
  int df = DocFreq(token);
  if (df == 0) return std::log(static_cast<double>(n_docs_) + 1.0);
  return std::log(static_cast<double>(n_docs_) / df);
}

ReprResult Represent(std::span<const text::TokenSpan> tokens, ReprMode mode,
                     const EmbeddingTable &table, const VocabStats *stats,
                     const ClsEncoder *encoder, const std::string &raw_text) {
  ReprResult result;
  result.vector.mode = mode;
  if (mode == ReprMode::kCls) {
    if (!encoder || !encoder->encoder || !encoder->vocab) {
      throw ConfigError("cls representation needs an encoder");
    }
    std::vector<std::string> words;
    for (const auto &t : text::Tokenize(raw_text)) words.push_back(t.token);
    nn::EncodedWords enc = nn::EncodeWords(*encoder->vocab, words);
    const size_t limit = static_cast<size_t>(encoder->encoder->max_length());
    if (enc.ids.size() > limit) {
      enc.ids.resize(limit);
      enc.ids.back() = nn::SubwordVocab::kSep;
    }
    nn::Encoding out = encoder->encoder->Forward(enc.ids, false);
    auto row = out.hidden.row(0);
    result.vector.values.assign(row.begin(), row.end());
    return result;
  }
  if (mode == ReprMode::kTfidf && !stats) {
    throw ConfigError("tfidf representation needs vocabulary statistics");
  }

  // Summing per occurrence equals count(t) * idf(t) per distinct token.
  std::vector<double> acc(table.dim(), 0.0);
  double total_weight = 0.0;
  for (const auto &tok : tokens) {
    auto vec = table.Lookup(tok.token);
    if (!vec) continue;
    double w = mode == ReprMode::kTfidf ? stats->Idf(tok.token) : 1.0;
    if (w == 0.0) continue;
    for (int i = 0; i < table.dim(); ++i) acc[i] += w * (*vec)[i];
    total_weight += w;
  }
  if (total_weight == 0.0) {
    result.zero_vector = true;
    result.vector.values.assign(table.dim(), 0.0);
    return result;
  }
  for (double &x : acc) x /= total_weight;
  result.vector.values = std::move(acc);
  return result;
}

}  // namespace kbc::repr
