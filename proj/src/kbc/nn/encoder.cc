#include "kbc/nn/encoder.h"

#include <cmath>

#include "kbc/base/errors.h"
#include "kbc/base/rng.h"
#include "kbc/nn/kernels.h"

namespace kbc::nn {
namespace {

constexpr double kLayerNormEps = 1e-12;

struct LayerNormCache {
  Matrix xhat;
  std::vector<double> inv_std;
};

Matrix LayerNorm(const Matrix &x, const Param &gamma, const Param &beta,
                 LayerNormCache *cache) {
  const int t = x.rows(), h = x.cols();
  Matrix y(t, h);
  if (cache) {
    cache->xhat.Resize(t, h);
    cache->inv_std.assign(t, 0.0);
  }
  for (int r = 0; r < t; ++r) {
    const double *xr = x.row_data(r);
    double mean = 0.0;
    for (int c = 0; c < h; ++c) mean += xr[c];
    mean /= h;
    double var = 0.0;
    for (int c = 0; c < h; ++c) var += (xr[c] - mean) * (xr[c] - mean);
    var /= h;
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    for (int c = 0; c < h; ++c) {
      double xh = (xr[c] - mean) * inv;
      if (cache) cache->xhat(r, c) = xh;
      y(r, c) = gamma.value(0, c) * xh + beta.value(0, c);
    }
    if (cache) cache->inv_std[r] = inv;
  }
  return y;
}

Matrix LayerNormBackward(const Matrix &dy, const LayerNormCache &cache,
                         Param *gamma, Param *beta) {
  const int t = dy.rows(), h = dy.cols();
  Matrix dx(t, h);
  std::vector<double> dxhat(h);
  for (int r = 0; r < t; ++r) {
    double mean_d = 0.0, mean_dx = 0.0;
    for (int c = 0; c < h; ++c) {
      double g = dy(r, c);
      gamma->grad(0, c) += g * cache.xhat(r, c);
      beta->grad(0, c) += g;
      dxhat[c] = g * gamma->value(0, c);
      mean_d += dxhat[c];
      mean_dx += dxhat[c] * cache.xhat(r, c);
    }
    mean_d /= h;
    mean_dx /= h;
    for (int c = 0; c < h; ++c) {
      dx(r, c) = cache.inv_std[r] * (dxhat[c] - mean_d - cache.xhat(r, c) * mean_dx);
    }
  }
  return dx;
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)

double Gelu(double x) {
  return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + 0.044715 * x * x * x)));
}

double GeluGrad(double x) {
  double u = kGeluC * (x + 0.044715 * x * x * x);
  double th = std::tanh(u);
  double du = kGeluC * (1.0 + 3.0 * 0.044715 * x * x);
  return 0.5 * (1.0 + th) + 0.5 * x * (1.0 - th * th) * du;
}

// y = x W + b
Matrix Affine(const Matrix &x, const Param &w, const Param &b) {
  Matrix y(x.rows(), w.value.cols());
  Gemm(x, false, w.value, false, 0.0, &y);
  AddRowVector(b.value.row(0), &y);
  return y;
}

// Accumulates dW, db and returns dx for y = x W + b.
Matrix AffineBackward(const Matrix &x, const Matrix &dy, Param *w, Param *b) {
  Gemm(x, true, dy, false, 1.0, &w->grad);
  AccumulateColumnSums(dy, b->grad.row(0));
  Matrix dx(x.rows(), w->value.rows());
  Gemm(dy, false, w->value, true, 0.0, &dx);
  return dx;
}

void AddInPlace(Matrix *a, const Matrix &b) {
  auto &av = a->values();
  const auto &bv = b.values();
  for (size_t i = 0; i < av.size(); ++i) av[i] += bv[i];
}

struct LayerCache {
  Matrix input;
  Matrix q, k, v;
  std::vector<Matrix> probs;  // per head, T x T
  Matrix context;
  LayerNormCache ln1;
  Matrix x1;
  Matrix ff_pre;
  Matrix ff_act;
  LayerNormCache ln2;
};

struct TransformerState : ForwardState {
  std::vector<int> ids;
  LayerNormCache ln_emb;
  std::vector<LayerCache> layers;
};

}  // namespace

Json TransformerConfig::ToJson() const {
  return {{"vocab_size", vocab_size}, {"hidden", hidden}, {"layers", layers},
          {"heads", heads}, {"ffn", ffn}, {"max_length", max_length},
          {"init_std", init_std}, {"seed", seed}};
}

TransformerConfig TransformerConfig::FromJson(const Json &j) {
  TransformerConfig c;
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.hidden = j.value("hidden", c.hidden);
  c.layers = j.value("layers", c.layers);
  c.heads = j.value("heads", c.heads);
  c.ffn = j.value("ffn", c.ffn);
  c.max_length = j.value("max_length", c.max_length);
  c.init_std = j.value("init_std", c.init_std);
  c.seed = j.value("seed", c.seed);
  return c;
}

TransformerEncoder::TransformerEncoder(const TransformerConfig &config)
    : config_(config) {
  if (config.vocab_size <= 0 || config.hidden <= 0 || config.heads <= 0 ||
      config.hidden % config.heads != 0 || config.layers < 0 ||
      config.max_length < 2) {
    throw ConfigError("invalid transformer configuration");
  }
  const int h = config.hidden, f = config.ffn;
  Rng rng(config.seed);
  token_embedding_ = Param("emb.token", config.vocab_size, h);
  position_embedding_ = Param("emb.position", config.max_length, h);
  token_embedding_.InitNormal(rng, config.init_std);
  position_embedding_.InitNormal(rng, config.init_std);
  ln_emb_g_ = Param("emb.ln.gamma", 1, h);
  ln_emb_b_ = Param("emb.ln.beta", 1, h);
  ln_emb_g_.value.Fill(1.0);
  layers_.resize(config.layers);
  for (int l = 0; l < config.layers; ++l) {
    Layer &L = layers_[l];
    const std::string p = "layer" + std::to_string(l) + ".";
    auto mat = [&](Param &param, const std::string &name, int r, int c) {
      param = Param(p + name, r, c);
      param.InitNormal(rng, config.init_std);
    };
    auto vec = [&](Param &param, const std::string &name, int c, double fill) {
      param = Param(p + name, 1, c);
      param.value.Fill(fill);
    };
    mat(L.wq, "attn.wq", h, h);
    vec(L.bq, "attn.bq", h, 0.0);
    mat(L.wk, "attn.wk", h, h);
    vec(L.bk, "attn.bk", h, 0.0);
    mat(L.wv, "attn.wv", h, h);
    vec(L.bv, "attn.bv", h, 0.0);
    mat(L.wo, "attn.wo", h, h);
    vec(L.bo, "attn.bo", h, 0.0);
    vec(L.ln1_g, "ln1.gamma", h, 1.0);
    vec(L.ln1_b, "ln1.beta", h, 0.0);
    mat(L.w1, "ffn.w1", h, f);
    vec(L.b1, "ffn.b1", f, 0.0);
    mat(L.w2, "ffn.w2", f, h);
    vec(L.b2, "ffn.b2", h, 0.0);
    vec(L.ln2_g, "ln2.gamma", h, 1.0);
    vec(L.ln2_b, "ln2.beta", h, 0.0);
  }
}

ParamList TransformerEncoder::Params() {
  ParamList out = {&token_embedding_, &position_embedding_, &ln_emb_g_, &ln_emb_b_};
  for (Layer &L : layers_) {
    for (Param *p : {&L.wq, &L.bq, &L.wk, &L.bk, &L.wv, &L.bv, &L.wo, &L.bo,
                     &L.ln1_g, &L.ln1_b, &L.w1, &L.b1, &L.w2, &L.b2, &L.ln2_g,
                     &L.ln2_b}) {
      out.push_back(p);
    }
  }
  return out;
}

Encoding TransformerEncoder::Forward(std::span<const int> ids,
                                     bool keep_state) const {
  const int t = static_cast<int>(ids.size());
  const int h = config_.hidden;
  if (t == 0 || t > config_.max_length) {
    throw ConfigError("sequence of " + std::to_string(t) +
                      " positions exceeds encoder limit " +
                      std::to_string(config_.max_length));
  }
  auto state = keep_state ? std::make_unique<TransformerState>() : nullptr;
  if (state) state->ids.assign(ids.begin(), ids.end());

  Matrix x(t, h);
  for (int i = 0; i < t; ++i) {
    if (ids[i] < 0 || ids[i] >= config_.vocab_size) {
      throw ConfigError("token id out of vocabulary range");
    }
    for (int c = 0; c < h; ++c) {
      x(i, c) = token_embedding_.value(ids[i], c) + position_embedding_.value(i, c);
    }
  }
  x = LayerNorm(x, ln_emb_g_, ln_emb_b_, state ? &state->ln_emb : nullptr);

  const int heads = config_.heads;
  const int dh = h / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  for (const Layer &L : layers_) {
    LayerCache *lc = nullptr;
    if (state) {
      state->layers.emplace_back();
      lc = &state->layers.back();
      lc->input = x;
    }
    Matrix q = Affine(x, L.wq, L.bq);
    Matrix k = Affine(x, L.wk, L.bk);
    Matrix v = Affine(x, L.wv, L.bv);
    Matrix context(t, h);
    std::vector<Matrix> probs(heads, Matrix(t, t));
    for (int hd = 0; hd < heads; ++hd) {
      const int off = hd * dh;
      Matrix &p = probs[hd];
      for (int i = 0; i < t; ++i) {
        double mx = -1e300;
        for (int j = 0; j < t; ++j) {
          double s = 0.0;
          for (int d = 0; d < dh; ++d) s += q(i, off + d) * k(j, off + d);
          p(i, j) = s * scale;
          mx = std::max(mx, p(i, j));
        }
        double z = 0.0;
        for (int j = 0; j < t; ++j) {
          p(i, j) = std::exp(p(i, j) - mx);
          z += p(i, j);
        }
        for (int j = 0; j < t; ++j) p(i, j) /= z;
        for (int j = 0; j < t; ++j) {
          const double pij = p(i, j);
          for (int d = 0; d < dh; ++d) context(i, off + d) += pij * v(j, off + d);
        }
      }
    }
    Matrix attn_out = Affine(context, L.wo, L.bo);
    AddInPlace(&attn_out, x);
    Matrix x1 = LayerNorm(attn_out, L.ln1_g, L.ln1_b, lc ? &lc->ln1 : nullptr);

    Matrix ff_pre = Affine(x1, L.w1, L.b1);
    Matrix ff_act = ff_pre;
    for (double &z : ff_act.values()) z = Gelu(z);
    Matrix ff_out = Affine(ff_act, L.w2, L.b2);
    AddInPlace(&ff_out, x1);
    Matrix out = LayerNorm(ff_out, L.ln2_g, L.ln2_b, lc ? &lc->ln2 : nullptr);

    if (lc) {
      lc->q = std::move(q);
      lc->k = std::move(k);
      lc->v = std::move(v);
      lc->probs = std::move(probs);
      lc->context = std::move(context);
      lc->x1 = std::move(x1);
      lc->ff_pre = std::move(ff_pre);
      lc->ff_act = std::move(ff_act);
    }
    x = std::move(out);
  }
  Encoding enc;
  enc.hidden = std::move(x);
  enc.state = std::move(state);
  return enc;
}

void TransformerEncoder::Backward(const Encoding &encoding, const Matrix &d_hidden) {
  const auto *state = dynamic_cast<const TransformerState *>(encoding.state.get());
  if (!state) throw ConfigError("Backward needs a forward pass with kept state");
  const int t = static_cast<int>(state->ids.size());
  const int h = config_.hidden;
  const int heads = config_.heads;
  const int dh = h / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Matrix dx = d_hidden;
  for (int l = config_.layers - 1; l >= 0; --l) {
    Layer &L = layers_[l];
    const LayerCache &lc = state->layers[l];

    // out = LN2(x1 + FFN(x1))
    Matrix d_ffsum = LayerNormBackward(dx, lc.ln2, &L.ln2_g, &L.ln2_b);
    Matrix d_act = AffineBackward(lc.ff_act, d_ffsum, &L.w2, &L.b2);
    for (size_t i = 0; i < d_act.size(); ++i) {
      d_act.values()[i] *= GeluGrad(lc.ff_pre.values()[i]);
    }
    Matrix d_x1 = AffineBackward(lc.x1, d_act, &L.w1, &L.b1);
    AddInPlace(&d_x1, d_ffsum);

    // x1 = LN1(x + Attn(x))
    Matrix d_attnsum = LayerNormBackward(d_x1, lc.ln1, &L.ln1_g, &L.ln1_b);
    Matrix d_context = AffineBackward(lc.context, d_attnsum, &L.wo, &L.bo);

    Matrix dq(t, h), dk(t, h), dv(t, h);
    std::vector<double> dp(t);
    for (int hd = 0; hd < heads; ++hd) {
      const int off = hd * dh;
      const Matrix &p = lc.probs[hd];
      for (int i = 0; i < t; ++i) {
        double dot = 0.0;
        for (int j = 0; j < t; ++j) {
          double s = 0.0;
          for (int d = 0; d < dh; ++d) s += d_context(i, off + d) * lc.v(j, off + d);
          dp[j] = s;
          dot += s * p(i, j);
        }
        for (int j = 0; j < t; ++j) {
          const double pij = p(i, j);
          for (int d = 0; d < dh; ++d) dv(j, off + d) += pij * d_context(i, off + d);
          const double ds = pij * (dp[j] - dot) * scale;
          for (int d = 0; d < dh; ++d) {
            dq(i, off + d) += ds * lc.k(j, off + d);
            dk(j, off + d) += ds * lc.q(i, off + d);
          }
        }
      }
    }
    Matrix d_in = AffineBackward(lc.input, dq, &L.wq, &L.bq);
    AddInPlace(&d_in, AffineBackward(lc.input, dk, &L.wk, &L.bk));
    AddInPlace(&d_in, AffineBackward(lc.input, dv, &L.wv, &L.bv));
    AddInPlace(&d_in, d_attnsum);
    dx = std::move(d_in);
  }

  Matrix d_emb = LayerNormBackward(dx, state->ln_emb, &ln_emb_g_, &ln_emb_b_);
  for (int i = 0; i < t; ++i) {
    for (int c = 0; c < h; ++c) {
      token_embedding_.grad(state->ids[i], c) += d_emb(i, c);
      position_embedding_.grad(i, c) += d_emb(i, c);
    }
  }
}

}  // namespace kbc::nn
