#ifndef KBC_ASC_CLASSIFIER_H_
#define KBC_ASC_CLASSIFIER_H_

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "kbc/base/jsonl.h"
#include "kbc/eval/metrics.h"
#include "kbc/label/labeler.h"
#include "kbc/nn/encoder.h"
#include "kbc/nn/param.h"
#include "kbc/nn/wordpiece.h"
#include "kbc/repr/sentence_repr.h"

namespace kbc::asc {

enum class ClassifierKind { kLogistic, kSvmHinge, kEncoder };

const char *ClassifierKindName(ClassifierKind k);
ClassifierKind ParseClassifierKind(const std::string &name);

struct AscTrainConfig {
  ClassifierKind kind = ClassifierKind::kEncoder;
  double lr = 2e-5;
  int batch_size = 32;
  int epochs = 4;
  uint64_t seed = 1;
  double l2 = 1e-4;  // linear kinds only
  // Weight positives by n_neg / n_pos in the loss. Off by default.
  bool balance_classes = false;
  double threshold = 0.5;
  nn::TransformerConfig encoder;  // encoder kind only; vocab_size from data

  Json ToJson() const;
  // The learning rate defaults to 2e-5 for the encoder and 0.05 for the
  // linear kinds when absent.
  static AscTrainConfig FromJson(const Json &j);
};

// What a classifier sees for one sentence: the sentence vector (linear
// kinds) and the words (encoder kind).
struct AscInput {
  std::vector<double> x;
  std::vector<std::string> words;
};

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual ClassifierKind kind() const = 0;
  virtual bool needs_vectors() const = 0;
  // P(positive); deterministic.
  virtual double Probability(const AscInput &input) const = 0;
  virtual void Save(const std::string &dir) const = 0;
};

// Decision score w.x + b. Logistic probabilities are sigmoid(score); the
// hinge SVM maps scores through a sigmoid fitted on held-out data,
// sigmoid(a * score + c).
class LinearModel : public Classifier {
 public:
  LinearModel(ClassifierKind kind, int dim, std::string repr_mode);

  ClassifierKind kind() const override { return kind_; }
  bool needs_vectors() const override { return true; }
  double Probability(const AscInput &input) const override;
  void Save(const std::string &dir) const override;
  static std::unique_ptr<LinearModel> Load(const std::string &dir);

  // Throws ConfigError on a dimension mismatch.
  double Score(const std::vector<double> &x) const;

  std::vector<double> &weights() { return w_.value.values(); }
  double &bias() { return b_.value(0, 0); }
  const std::string &repr_mode() const { return repr_mode_; }
  void SetCalibration(double a, double c) {
    platt_a_ = a;
    platt_c_ = c;
  }
  nn::ParamList Params() { return {&w_, &b_}; }

 private:
  ClassifierKind kind_;
  std::string repr_mode_;
  nn::Param w_, b_;
  double platt_a_ = 1.0, platt_c_ = 0.0;
};

// Encoder plus an affine head over the summary vector, softmax over two
// classes.
class EncoderClassifier : public Classifier {
 public:
  EncoderClassifier(nn::SubwordVocab vocab, nn::TransformerConfig config);

  ClassifierKind kind() const override { return ClassifierKind::kEncoder; }
  bool needs_vectors() const override { return false; }
  double Probability(const AscInput &input) const override;
  // Both class probabilities.
  std::array<double, 2> Distribution(const std::vector<std::string> &words) const;
  void Save(const std::string &dir) const override;
  static std::unique_ptr<EncoderClassifier> Load(const std::string &dir);

  // Cross-entropy for one sentence; accumulates gradients when asked.
  double Loss(const std::vector<std::string> &words, bool positive, double weight,
              bool accumulate_grad);
  nn::ParamList Params();

 private:
  std::vector<int> Ids(const std::vector<std::string> &words) const;

  nn::SubwordVocab vocab_;
  nn::TransformerEncoder encoder_;
  nn::Param w_, b_;
};

struct TrainResult {
  std::unique_ptr<Classifier> model;
  std::vector<Json> log;  // {"epoch", "loss", "val": metrics}
  eval::Metrics best_val;
  int best_epoch = 0;
};

// Trains on `train`, keeping the epoch with the best F1 on `val` (on
// `train` when `val` is empty). Throws Divergence on a non-finite loss.
TrainResult Train(const std::vector<AscInput> &train, const std::vector<int> &train_labels,
                  const std::vector<AscInput> &val, const std::vector<int> &val_labels,
                  const AscTrainConfig &config, const std::string &repr_mode,
                  const std::function<void(const Json &)> &on_epoch = nullptr);

// Inputs for labeled sentences; vectors are computed only when
// `representer` is given.
std::vector<AscInput> MakeInputs(const std::vector<label::LabeledSentence> &sentences,
                                 const repr::Representer *representer);
std::vector<int> Labels(const std::vector<label::LabeledSentence> &sentences);

std::vector<double> PredictScores(const Classifier &model, const std::vector<AscInput> &inputs);

eval::Metrics EvaluateClassifier(const Classifier &model, const std::vector<AscInput> &inputs,
                                 const std::vector<int> &labels, double threshold = 0.5);

// Writes {registry}/{kind}/{run_id}/ with the model files, metadata.json
// (config, data hash, metrics) and training_log.jsonl; returns the path.
std::string SaveCheckpoint(const TrainResult &result, const AscTrainConfig &config,
                           const std::string &registry, const std::string &run_id,
                           const std::string &data_hash, const Json &extra_metrics);
std::unique_ptr<Classifier> LoadClassifier(const std::string &dir);

}  // namespace kbc::asc

#endif  // KBC_ASC_CLASSIFIER_H_
