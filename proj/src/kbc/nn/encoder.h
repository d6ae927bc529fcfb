#ifndef KBC_NN_ENCODER_H_
#define KBC_NN_ENCODER_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "kbc/base/jsonl.h"
#include "kbc/nn/matrix.h"
#include "kbc/nn/param.h"

namespace kbc::nn {

// Whatever a forward pass must remember for its backward pass.
struct ForwardState {
  virtual ~ForwardState() = default;
};

struct Encoding {
  Matrix hidden;  // one row per input position; row 0 is the [CLS] summary
  std::unique_ptr<ForwardState> state;
};

// A contextual encoder over subword ids. Forward is const and safe to call
// concurrently; Backward accumulates into the parameter gradients and so
// belongs to a single owner.
class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual int hidden_size() const = 0;
  virtual int max_length() const = 0;

  // With keep_state=false the returned Encoding carries no state and
  // cannot be back-propagated.
  virtual Encoding Forward(std::span<const int> ids, bool keep_state) const = 0;
  virtual void Backward(const Encoding &encoding, const Matrix &d_hidden) = 0;
  virtual ParamList Params() = 0;
};

struct TransformerConfig {
  int vocab_size = 0;
  int hidden = 32;
  int layers = 2;
  int heads = 2;
  int ffn = 64;
  int max_length = 64;
  double init_std = 0.02;
  uint64_t seed = 1;

  Json ToJson() const;
  static TransformerConfig FromJson(const Json &j);
};

// Post-LayerNorm BERT-style encoder: token + position embeddings, then
// `layers` blocks of multi-head self-attention and a GELU feed-forward
// network, each wrapped in a residual connection and LayerNorm.
class TransformerEncoder : public Encoder {
 public:
  explicit TransformerEncoder(const TransformerConfig &config);

  const TransformerConfig &config() const { return config_; }
  int hidden_size() const override { return config_.hidden; }
  int max_length() const override { return config_.max_length; }

  Encoding Forward(std::span<const int> ids, bool keep_state) const override;
  void Backward(const Encoding &encoding, const Matrix &d_hidden) override;
  ParamList Params() override;

 private:
  struct Layer {
    Param wq, bq, wk, bk, wv, bv, wo, bo;
    Param ln1_g, ln1_b;
    Param w1, b1, w2, b2;
    Param ln2_g, ln2_b;
  };

  TransformerConfig config_;
  Param token_embedding_;
  Param position_embedding_;
  Param ln_emb_g_, ln_emb_b_;
  std::vector<Layer> layers_;
};

}  // namespace kbc::nn

#endif  // KBC_NN_ENCODER_H_
