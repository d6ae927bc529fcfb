#ifndef KBC_ER_JOINT_MODEL_H_
#define KBC_ER_JOINT_MODEL_H_

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "kbc/er/example.h"
#include "kbc/er/extractor.h"
#include "kbc/er/window.h"
#include "kbc/nn/encoder.h"
#include "kbc/nn/param.h"
#include "kbc/nn/wordpiece.h"

namespace kbc::er {

// One training unit: the words of a window, their gold tags, and every
// gene x estimate pair whose entities lie wholly inside the window.
struct WindowExample {
  struct Pair {
    EntitySpan gene;      // window-local word indices
    EntitySpan estimate;  // window-local word indices
    bool positive = false;
  };
  std::string id;  // pmid:sent_id:start
  std::vector<std::string> words;
  std::vector<EntityType> tags;
  std::vector<Pair> pairs;
};

std::vector<WindowExample> MakeWindowExamples(const ERExample &ex, const WindowConfig &config);

// Words [window.start_tok, window.end_tok) of a sentence.
std::vector<std::string> WindowWords(const ERExample &ex, const SpanWindow &window);

struct LossWeights {
  double entity = 1.0;
  double relation = 1.0;
};

struct LossTerms {
  double entity = 0;
  double relation = 0;
  double total() const { return entity + relation; }
};

using EntityDistribution = std::array<double, kNumEntityTypes>;

// Encoder plus two heads over a window:
//   entity:   p(e_i) = softmax(W_e (CLS + t_i) + b_e)
//   relation: r = sigmoid(W_r . (CLS * sum_{k=i..j} t_k) + b_r)
// t_i is the output at word i's first subword, CLS the window summary, and
// i..j runs over every subword from the first entity through the second.
class JointModel : public Extractor {
 public:
  JointModel(nn::SubwordVocab vocab, std::unique_ptr<nn::Encoder> encoder,
             uint64_t head_seed = 1, double init_std = 0.02);
  static std::unique_ptr<JointModel> Create(nn::SubwordVocab vocab,
                                            nn::TransformerConfig config);

  struct Forwarded {
    nn::EncodedWords input;
    nn::Encoding encoding;
  };

  // Throws ConfigError when the subword sequence exceeds the encoder limit.
  Forwarded Forward(const std::vector<std::string> &words, bool keep_state) const;

  std::vector<EntityDistribution> EntityDistributions(const Forwarded &f) const;
  // Window-local word spans; throws ConfigError if either lies outside.
  double RelationProbability(const Forwarded &f, const EntitySpan &x,
                             const EntitySpan &y) const;

  // Loss for one window; with accumulate_grad the parameter gradients are
  // incremented. Throws Divergence (naming the example) on a non-finite loss.
  LossTerms Loss(const WindowExample &ex, const LossWeights &weights, bool accumulate_grad);

  nn::ParamList Params();
  const nn::SubwordVocab &vocab() const { return vocab_; }
  nn::Param &entity_weight() { return w_e_; }
  nn::Param &entity_bias() { return b_e_; }
  nn::Param &relation_weight() { return w_r_; }
  nn::Param &relation_bias() { return b_r_; }

  std::string kind() const override { return "joint"; }
  std::vector<EntityType> Tag(const ERExample &sentence,
                              const WindowConfig &window) const override;
  double ScorePair(const ERExample &sentence, const SpanWindow &window,
                   const EntitySpan &gene, const EntitySpan &estimate) const override;

  // vocab.txt, encoder.json, params.bin, model.json.
  void Save(const std::string &dir) const override;
  static std::unique_ptr<JointModel> Load(const std::string &dir);

 private:
  EntityDistribution Distribution(const nn::Matrix &h, int pos) const;
  std::pair<int, int> SubwordRange(const Forwarded &f, const EntitySpan &x,
                                   const EntitySpan &y) const;

  nn::SubwordVocab vocab_;
  std::unique_ptr<nn::Encoder> encoder_;
  nn::Param w_e_, b_e_, w_r_, b_r_;
};

// Argmax with ties resolved none > germline_mutation > risk_estimate.
EntityType ArgmaxType(const EntityDistribution &p);

}  // namespace kbc::er

#endif  // KBC_ER_JOINT_MODEL_H_
