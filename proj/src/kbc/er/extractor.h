#ifndef KBC_ER_EXTRACTOR_H_
#define KBC_ER_EXTRACTOR_H_

#include <string>
#include <vector>

#include "kbc/er/decode.h"
#include "kbc/er/example.h"
#include "kbc/er/window.h"

namespace kbc::er {

// A trained entity tagger plus relation scorer. Implementations are
// read-only after training and safe to share across threads.
class Extractor {
 public:
  virtual ~Extractor() = default;

  virtual std::string kind() const = 0;

  // One tag per sentence token.
  virtual std::vector<EntityType> Tag(const ERExample &sentence,
                                      const WindowConfig &window) const = 0;

  // Relation probability for two sentence-level spans inside `window`.
  virtual double ScorePair(const ERExample &sentence, const SpanWindow &window,
                           const EntitySpan &gene, const EntitySpan &estimate) const = 0;

  virtual void Save(const std::string &dir) const = 0;

  // Tag, then decode every candidate pair with ScorePair.
  std::vector<Triple> Extract(const ERExample &sentence, const DecodeOptions &options) const {
    return DecodeTriples(
        sentence, Tag(sentence, options.window),
        [&](const SpanWindow &w, const EntitySpan &g, const EntitySpan &e) {
          return std::optional<double>(ScorePair(sentence, w, g, e));
        },
        options);
  }
};

}  // namespace kbc::er

#endif  // KBC_ER_EXTRACTOR_H_
