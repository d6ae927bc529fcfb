#ifndef KBC_SERVICE_PIPELINE_H_
#define KBC_SERVICE_PIPELINE_H_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "kbc/base/errors.h"
#include "kbc/base/jsonl.h"
#include "kbc/eval/split.h"
#include "kbc/nn/encoder.h"
#include "kbc/nn/wordpiece.h"
#include "kbc/repr/sentence_repr.h"
#include "kbc/service/config.h"
#include "kbc/service/review.h"
#include "kbc/text/document.h"

namespace kbc::service {

enum class Stage { kIngest, kLabel, kTrainAsc, kTrainEr, kPredict, kAblate };

const char *StageName(Stage s);
Stage ParseStage(const std::string &name);

// A stage was run before the stage it depends on, e.g.
// "predict: train_er required".
class MissingStage : public ConfigError {
 public:
  MissingStage(Stage stage, Stage required)
      : ConfigError(std::string(StageName(stage)) + ": " + StageName(required) + " required") {}
};

using Logger = std::function<void(const std::string &)>;

// Runs one stage under {runs}/{run_id}/ and records its summary and fully
// resolved config in the run's metadata.json.
// Artifacts:
//   ingest    documents.jsonl, sentences.jsonl, load_errors.jsonl
//   label     labeled.jsonl, split.json, label_report.json
//   train_asc {registry}/asc_{kind}/{run_id}/, asc_metrics.json
//   train_er  {registry}/er_{mode}/{run_id}/, er_split.json, er_metrics.json
//   predict   predictions.jsonl, asc_scores.jsonl, review/items.jsonl
//   ablate    ablation.json
// Returns the stage summary.
Json RunStage(const PipelineConfig &config, Stage stage, const Logger &log = nullptr);

// Every stage in order.
Json RunAll(const PipelineConfig &config, const Logger &log = nullptr);

// Writes the accepted and edited review items of the run as a KB CSV;
// returns the number of rows written.
size_t EmitRunKb(const PipelineConfig &config, const std::string &path);
size_t EmitStoreKb(const PipelineConfig &config, const ReviewStore &store,
                   const std::string &path);

// Corpus as stored by ingest. Throws MissingStage(stage, kIngest).
text::Corpus LoadIngested(const PipelineConfig &config, Stage stage);

// Owns whatever a representation mode needs: the embedding table, corpus
// IDF statistics and, for cls, a frozen encoder with its vocabulary.
class ReprResources {
 public:
  ReprResources(const PipelineConfig &config, const text::Corpus &corpus);
  ReprResources(const ReprResources &) = delete;
  ReprResources &operator=(const ReprResources &) = delete;

  const repr::Representer &representer() const { return *representer_; }

 private:
  repr::EmbeddingTable table_;
  std::unique_ptr<repr::VocabStats> stats_;
  nn::SubwordVocab cls_vocab_;
  std::unique_ptr<nn::TransformerEncoder> cls_model_;
  repr::ClsEncoder cls_;
  std::unique_ptr<repr::Representer> representer_;
};

}  // namespace kbc::service

#endif  // KBC_SERVICE_PIPELINE_H_
