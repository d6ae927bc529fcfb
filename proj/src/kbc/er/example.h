#ifndef KBC_ER_EXAMPLE_H_
#define KBC_ER_EXAMPLE_H_

#include <string>
#include <vector>

#include "kbc/base/jsonl.h"
#include "kbc/text/document.h"

namespace kbc::er {

enum class EntityType { kNone = 0, kGermlineMutation = 1, kRiskEstimate = 2 };
inline constexpr int kNumEntityTypes = 3;

enum class Polarity { kPositive, kNegative };

const char *EntityTypeName(EntityType t);
EntityType ParseEntityType(const std::string &name);
const char *PolarityName(Polarity p);
Polarity ParsePolarity(const std::string &name);

// Token range [start_tok, end_tok).
struct EntitySpan {
  int start_tok = 0;
  int end_tok = 0;
  EntityType type = EntityType::kNone;

  bool operator==(const EntitySpan &) const = default;
};

struct RelationLabel {
  int gene_entity = 0;      // index into ERExample::entities
  int estimate_entity = 0;  // index into ERExample::entities
  Polarity polarity = Polarity::kPositive;
};

struct ERExample {
  std::string pmid;
  int sent_id = 0;
  std::string text;
  std::vector<text::TokenSpan> tokens;
  std::vector<EntitySpan> entities;
  std::vector<RelationLabel> relations;

  // Surface string of an entity as it appears in `text`.
  std::string Surface(const EntitySpan &e) const;
  std::string Surface(int entity_idx) const { return Surface(entities[entity_idx]); }
};

// Throws ConfigError when an invariant is violated: overlapping or
// out-of-range entities, relations not linking a gene to an estimate.
void Validate(const ERExample &ex);

// One tag per token; tokens outside gold entities are kNone.
std::vector<EntityType> TokenTags(const ERExample &ex);

Json ToJson(const ERExample &ex);
ERExample ExampleFromJson(const Json &j);

std::vector<ERExample> ReadExamples(const std::string &path);
void WriteExamples(const std::string &path, const std::vector<ERExample> &examples);

}  // namespace kbc::er

#endif  // KBC_ER_EXAMPLE_H_
