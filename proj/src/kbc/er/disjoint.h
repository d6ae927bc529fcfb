#ifndef KBC_ER_DISJOINT_H_
#define KBC_ER_DISJOINT_H_

#include <memory>
#include <string>
#include <vector>

#include "kbc/er/joint_model.h"

namespace kbc::er {

// Relation stage of the pipelined baseline. The input is
//   [CLS] span [SEP] gene [SEP] estimate [SEP]
// and the span outputs are discarded: the classifier sees the summary
// vector and the mean outputs over the gene and estimate segments,
//   r = sigmoid(w . [CLS ; mean(gene) ; mean(estimate)] + b).
class RelationClassifier {
 public:
  RelationClassifier(nn::SubwordVocab vocab, nn::TransformerConfig config);

  struct Input {
    std::vector<int> ids;
    int gene_begin = 0, gene_end = 0;  // subword positions [begin, end)
    int est_begin = 0, est_end = 0;
  };
  Input MakeInput(const std::vector<std::string> &span_words, const std::string &gene,
                  const std::string &estimate) const;

  double Probability(const Input &input) const;
  // BCE against `positive`; accumulates gradients when asked.
  double Loss(const Input &input, bool positive, bool accumulate_grad);

  nn::ParamList Params();
  const nn::SubwordVocab &vocab() const { return vocab_; }
  const nn::TransformerConfig &config() const { return encoder_.config(); }

 private:
  std::vector<double> Features(const nn::Matrix &h, const Input &in) const;

  nn::SubwordVocab vocab_;
  nn::TransformerEncoder encoder_;
  nn::Param w_, b_;
};

// Entity tagger (a JointModel trained without the relation term) followed
// by the relation classifier on every tagged gene x estimate pair.
class DisjointModel : public Extractor {
 public:
  DisjointModel(std::unique_ptr<JointModel> tagger, std::unique_ptr<RelationClassifier> relation)
      : tagger_(std::move(tagger)), relation_(std::move(relation)) {}

  std::string kind() const override { return "disjoint"; }
  std::vector<EntityType> Tag(const ERExample &sentence,
                              const WindowConfig &window) const override {
    return tagger_->Tag(sentence, window);
  }
  double ScorePair(const ERExample &sentence, const SpanWindow &window,
                   const EntitySpan &gene, const EntitySpan &estimate) const override;

  // tagger/ and relation/ subdirectories plus model.json.
  void Save(const std::string &dir) const override;
  static std::unique_ptr<DisjointModel> Load(const std::string &dir);

  JointModel &tagger() { return *tagger_; }
  RelationClassifier &relation() { return *relation_; }

 private:
  std::unique_ptr<JointModel> tagger_;
  std::unique_ptr<RelationClassifier> relation_;
};

}  // namespace kbc::er

#endif  // KBC_ER_DISJOINT_H_
