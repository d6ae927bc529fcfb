#include "kbc/er/example.h"

#include "kbc/base/errors.h"
#include "kbc/base/strings.h"
#include "kbc/text/tokenizer.h"

namespace kbc::er {

const char *EntityTypeName(EntityType t) {
  switch (t) {
    case EntityType::kGermlineMutation: return "germline_mutation";
    case EntityType::kRiskEstimate: return "risk_estimate";
    default: return "none";
  }
}

EntityType ParseEntityType(const std::string &name) {
  if (name == "germline_mutation") return EntityType::kGermlineMutation;
  if (name == "risk_estimate") return EntityType::kRiskEstimate;
  if (name == "none") return EntityType::kNone;
  throw ConfigError("unknown entity type '" + name + "'");
}

const char *PolarityName(Polarity p) {
  return p == Polarity::kPositive ? "positive" : "negative";
}

Polarity ParsePolarity(const std::string &name) {
  if (name == "positive") return Polarity::kPositive;
  if (name == "negative") return Polarity::kNegative;
  throw ConfigError("unknown polarity '" + name + "'");
}

std::string ERExample::Surface(const EntitySpan &e) const {
  size_t b = tokens[e.start_tok].start;
  size_t en = tokens[e.end_tok - 1].end;
  return text.substr(b, en - b);
}

void Validate(const ERExample &ex) {
  const int n = static_cast<int>(ex.tokens.size());
  std::vector<bool> used(n, false);
  for (const EntitySpan &e : ex.entities) {
    if (e.start_tok < 0 || e.end_tok > n || e.start_tok >= e.end_tok) {
      throw ConfigError("entity out of range in " + ex.pmid + ":" +
                        std::to_string(ex.sent_id));
    }
    if (e.type == EntityType::kNone) throw ConfigError("entity typed none");
    for (int i = e.start_tok; i < e.end_tok; ++i) {
      if (used[i]) throw ConfigError("overlapping entities in " + ex.pmid);
      used[i] = true;
    }
  }
  const int m = static_cast<int>(ex.entities.size());
  for (const RelationLabel &r : ex.relations) {
    if (r.gene_entity < 0 || r.gene_entity >= m || r.estimate_entity < 0 ||
        r.estimate_entity >= m ||
        ex.entities[r.gene_entity].type != EntityType::kGermlineMutation ||
        ex.entities[r.estimate_entity].type != EntityType::kRiskEstimate) {
      throw ConfigError("relation must link a gene to an estimate in " + ex.pmid);
    }
  }
}

std::vector<EntityType> TokenTags(const ERExample &ex) {
  std::vector<EntityType> tags(ex.tokens.size(), EntityType::kNone);
  for (const EntitySpan &e : ex.entities) {
    for (int i = e.start_tok; i < e.end_tok; ++i) tags[i] = e.type;
  }
  return tags;
}

Json ToJson(const ERExample &ex) {
  Json tokens = Json::array();
  for (const auto &t : ex.tokens) tokens.push_back(t.token);
  Json entities = Json::array();
  for (const auto &e : ex.entities) {
    entities.push_back({{"start", e.start_tok}, {"end", e.end_tok},
                        {"type", EntityTypeName(e.type)}});
  }
  Json relations = Json::array();
  for (const auto &r : ex.relations) {
    relations.push_back({{"gene", r.gene_entity},
                         {"estimate", r.estimate_entity},
                         {"polarity", PolarityName(r.polarity)}});
  }
  return {{"pmid", ex.pmid}, {"sent_id", ex.sent_id}, {"text", ex.text},
          {"tokens", tokens}, {"entities", entities}, {"relations", relations}};
}

ERExample ExampleFromJson(const Json &j) {
  ERExample ex;
  ex.pmid = j.at("pmid").get<std::string>();
  ex.sent_id = j.at("sent_id").get<int>();
  std::vector<std::string> words = j.at("tokens").get<std::vector<std::string>>();
  ex.text = j.contains("text") ? j.at("text").get<std::string>() : Join(words, " ");
  ex.tokens = text::Tokenize(ex.text);
  if (ex.tokens.size() != words.size()) {
    throw ConfigError("token list does not match text for " + ex.pmid + ":" +
                      std::to_string(ex.sent_id));
  }
  for (size_t i = 0; i < words.size(); ++i) {
    if (ex.tokens[i].token != words[i]) {
      throw ConfigError("token '" + words[i] + "' does not match text for " +
                        ex.pmid);
    }
  }
  for (const Json &e : j.at("entities")) {
    ex.entities.push_back({e.at("start").get<int>(), e.at("end").get<int>(),
                           ParseEntityType(e.at("type").get<std::string>())});
  }
  for (const Json &r : j.value("relations", Json::array())) {
    ex.relations.push_back({r.at("gene").get<int>(), r.at("estimate").get<int>(),
                            ParsePolarity(r.at("polarity").get<std::string>())});
  }
  Validate(ex);
  return ex;
}

std::vector<ERExample> ReadExamples(const std::string &path) {
  std::vector<ERExample> out;
  for (const Json &j : ReadJsonl(path)) out.push_back(ExampleFromJson(j));
  return out;
}

void WriteExamples(const std::string &path, const std::vector<ERExample> &examples) {
  std::vector<Json> rows;
  for (const auto &ex : examples) rows.push_back(ToJson(ex));
  WriteJsonl(path, rows);
}

}  // namespace kbc::er
