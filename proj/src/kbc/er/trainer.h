#ifndef KBC_ER_TRAINER_H_
#define KBC_ER_TRAINER_H_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "kbc/base/jsonl.h"
#include "kbc/er/decode.h"
#include "kbc/er/extractor.h"
#include "kbc/eval/metrics.h"
#include "kbc/nn/encoder.h"

namespace kbc::er {

enum class TrainMode { kJoint, kDisjoint };

const char *TrainModeName(TrainMode m);
TrainMode ParseTrainMode(const std::string &name);

struct ERTrainConfig {
  TrainMode mode = TrainMode::kJoint;
  double lr = 5e-5;
  int batch_size = 16;
  int epochs = 10;
  // Epochs without a validation improvement before stopping; 0 disables.
  int patience = 3;
  bool linear_decay = true;
  uint64_t seed = 1;
  double relation_threshold = 0.5;
  WindowConfig window;
  nn::TransformerConfig encoder;  // vocab_size is filled in from the data

  Json ToJson() const;
  static ERTrainConfig FromJson(const Json &j);
};

struct ERMetrics {
  eval::Metrics entity;    // token level, any non-none type
  eval::Metrics relation;  // end to end over positive (gene, estimate) pairs

  // Sum of the defined F1 scores; used only to pick checkpoints.
  double SelectionScore() const;
  Json ToJson() const;
};

// Entity metrics compare predicted and gold tags per token (a wrong type
// counts as both a false positive and a false negative). Relation metrics
// compare predicted positive triples with gold positive relations by token
// span; gold candidate pairs predicted non-positive are true negatives.
ERMetrics Evaluate(const Extractor &model, const std::vector<ERExample> &examples,
                   const DecodeOptions &options);

// Relation classification restricted to gold-entity pairs that share a
// window, ignoring the tagger.
eval::Metrics EvaluatePairsOnGoldEntities(const Extractor &model,
                                          const std::vector<ERExample> &examples,
                                          const DecodeOptions &options);

struct ERTrainResult {
  std::unique_ptr<Extractor> model;
  std::vector<Json> log;  // one record per epoch and stage
  ERMetrics best_val;
  int best_epoch = 0;
};

// Trains with Adam and an optional linear learning-rate decay, evaluating
// on `val` after every epoch and returning the best checkpoint. An empty
// `val` selects on the training data. Disjoint mode trains the tagger
// first, then the relation classifier on gold-entity pairs.
ERTrainResult TrainER(const std::vector<ERExample> &train, const std::vector<ERExample> &val,
                      const ERTrainConfig &config,
                      const std::function<void(const Json &)> &on_epoch = nullptr);

// Reads model.json to pick the implementation.
std::unique_ptr<Extractor> LoadExtractor(const std::string &dir);

}  // namespace kbc::er

#endif  // KBC_ER_TRAINER_H_
