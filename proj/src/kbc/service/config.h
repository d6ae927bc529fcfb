#ifndef KBC_SERVICE_CONFIG_H_
#define KBC_SERVICE_CONFIG_H_

#include <cstdint>
#include <string>

#include "kbc/asc/classifier.h"
#include "kbc/base/jsonl.h"
#include "kbc/er/trainer.h"
#include "kbc/eval/split.h"
#include "kbc/repr/sentence_repr.h"

namespace kbc::service {

// Everything a run needs, loaded from one JSON file; see docs/config.md.
// Relative paths are resolved against the config file's directory.
struct PipelineConfig {
  std::string run_id;

  std::string corpus_manifest;
  std::string rod;
  std::string direct_annotations;  // optional
  std::string er_data;
  std::string registry = "registry";
  std::string runs = "runs";
  std::string embeddings;  // optional word-vector text file

  repr::ReprMode repr_mode = repr::ReprMode::kTfidf;
  int k_top = 3;
  int embedding_dim = 300;
  repr::OovPolicy oov_policy = repr::OovPolicy::kHashed;
  uint64_t embedding_seed = 0;
  // Frozen encoder for cls representations; random init from this config
  // when no checkpoint directory is given.
  std::string cls_checkpoint;
  nn::TransformerConfig cls_encoder;

  bool rod_passthrough_extra_columns = false;
  eval::SplitRatios split;
  uint64_t split_seed = 13;
  double asc_threshold = 0.5;
  asc::AscTrainConfig asc;
  er::ERTrainConfig er;  // carries the window config and relation threshold
  uint64_t ablation_seed = 5;

  // Throws ConfigError naming the offending field.
  static PipelineConfig FromJson(const Json &j, const std::string &base_dir = ".");
  static PipelineConfig Load(const std::string &path);
  // Fully resolved form, written into each run's metadata.
  Json ToJson() const;

  std::string RunDir() const { return runs + "/" + run_id; }
  std::string ErModelDir() const;
  std::string AscModelDir() const;
};

}  // namespace kbc::service

#endif  // KBC_SERVICE_CONFIG_H_
