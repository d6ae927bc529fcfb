#ifndef KBC_REPR_SENTENCE_REPR_H_
#define KBC_REPR_SENTENCE_REPR_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "kbc/nn/encoder.h"
#include "kbc/nn/wordpiece.h"
#include "kbc/text/document.h"

namespace kbc::repr {

enum class ReprMode { kBow, kTfidf, kCls };

const char *ReprModeName(ReprMode mode);
ReprMode ParseReprMode(const std::string &name);

enum class OovPolicy { kZeros, kHashed };

OovPolicy ParseOovPolicy(const std::string &name);

// Token -> dense vector. Lookups try the token verbatim, then lowercased.
// Out-of-vocabulary tokens either contribute nothing (kZeros) or receive a
// deterministic pseudo-random vector derived from the token and seed.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(int dim = 300, OovPolicy policy = OovPolicy::kZeros,
                          uint64_t seed = 0);

  // Every token hashed; what the tests and the synthetic pipeline use.
  static EmbeddingTable Hashed(int dim = 300, uint64_t seed = 0);

  // Word-vector text file: "token v1 ... vdim" per line; an optional
  // leading "<count> <dim>" header is skipped.
  static EmbeddingTable LoadText(const std::string &path, OovPolicy policy,
                                 uint64_t seed = 0);

  int dim() const { return dim_; }
  OovPolicy oov_policy() const { return policy_; }
  size_t size() const { return table_.size(); }

  void Set(const std::string &token, std::vector<double> vec);

  // nullopt for an OOV token under kZeros.
  std::optional<std::vector<double>> Lookup(const std::string &token) const;

 private:
  std::vector<double> HashedVector(const std::string &token) const;

  int dim_;
  OovPolicy policy_;
  uint64_t seed_;
  std::unordered_map<std::string, std::vector<double>> table_;
};

// Document frequencies over lowercased tokens of non-excluded sections.
class VocabStats {
 public:
  // Throws ConfigError for an empty corpus.
  static VocabStats Fit(const text::Corpus &corpus);
  static VocabStats FromCounts(std::map<std::string, int> doc_freq, int n_docs);

  int n_docs() const { return n_docs_; }
  int DocFreq(const std::string &token) const;

  // ln(n_docs / df); unseen tokens get ln(n_docs + 1).
  double Idf(const std::string &token) const;

 private:
  std::map<std::string, int> doc_freq_;
  int n_docs_ = 0;
};

struct SentenceVector {
  std::vector<double> values;
  ReprMode mode = ReprMode::kBow;

  int dim() const { return static_cast<int>(values.size()); }
};

// A frozen contextual encoder plus the vocabulary that feeds it.
struct ClsEncoder {
  const nn::SubwordVocab *vocab = nullptr;
  const nn::Encoder *encoder = nullptr;
};

struct ReprResult {
  SentenceVector vector;
  // No token contributed (all OOV, or all weights zero); vector is zero.
  bool zero_vector = false;
};

// bow:   unweighted mean of in-vocabulary token vectors;
// tfidf: sum_t w_t v_t / sum_t w_t with w_t = count(t) * idf(t);
// cls:   the encoder's position-0 output on raw_text (truncated to the
//        encoder's length limit).
// Throws ConfigError when stats (tfidf) or encoder (cls) is missing.
ReprResult Represent(std::span<const text::TokenSpan> tokens, ReprMode mode,
                     const EmbeddingTable &table, const VocabStats *stats,
                     const ClsEncoder *encoder, const std::string &raw_text);

// Binds a mode to the resources it needs so callers can vectorize
// sentences without threading four arguments around.
class Representer {
 public:
  Representer(ReprMode mode, const EmbeddingTable *table, const VocabStats *stats,
              const ClsEncoder *cls)
      : mode_(mode), table_(table), stats_(stats), cls_(cls) {}

  ReprMode mode() const { return mode_; }
  ReprResult operator()(const text::TokenizedSentence &s) const {
    return Represent(s.tokens, mode_, *table_, stats_, cls_, s.sentence.text);
  }

 private:
  ReprMode mode_;
  const EmbeddingTable *table_;
  const VocabStats *stats_;
  const ClsEncoder *cls_;
};

}  // namespace kbc::repr

#endif  // KBC_REPR_SENTENCE_REPR_H_
