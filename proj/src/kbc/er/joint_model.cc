#include "kbc/er/joint_model.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include "kbc/base/errors.h"
#include "kbc/base/rng.h"
#include "kbc/base/strings.h"

namespace kbc::er {

namespace {

double Sigmoid(double s) {
  return s >= 0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
}

// Reported probabilities stay strictly inside (0, 1) even when the logit
// saturates double precision; losses work on the logit and are unaffected.
double OpenUnitSigmoid(double s) {
  return std::clamp(Sigmoid(s), std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

// log(1 + e^s) without overflow.
double Softplus(double s) { return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

}  // namespace

std::vector<std::string> WindowWords(const ERExample &ex, const SpanWindow &window) {
  std::vector<std::string> words;
  for (int i = window.start_tok; i < window.end_tok; ++i) words.push_back(ex.tokens[i].token);
  return words;
}

std::vector<WindowExample> MakeWindowExamples(const ERExample &ex, const WindowConfig &config) {
  std::vector<WindowExample> out;
  const std::vector<EntityType> tags = TokenTags(ex);
  for (const SpanWindow &w : EnumerateSpans(static_cast<int>(ex.tokens.size()), config)) {
    WindowExample we;
    we.id = ex.pmid + ":" + std::to_string(ex.sent_id) + ":" + std::to_string(w.start_tok);
    we.words = WindowWords(ex, w);
    we.tags.assign(tags.begin() + w.start_tok, tags.begin() + w.end_tok);
    auto local = [&](const EntitySpan &e) {
      return EntitySpan{e.start_tok - w.start_tok, e.end_tok - w.start_tok, e.type};
    };
    for (size_t g = 0; g < ex.entities.size(); ++g) {
      const EntitySpan &ge = ex.entities[g];
      if (ge.type != EntityType::kGermlineMutation || !w.Contains(ge.start_tok, ge.end_tok)) {
        continue;
      }
      for (size_t e = 0; e < ex.entities.size(); ++e) {
        const EntitySpan &ee = ex.entities[e];
        if (ee.type != EntityType::kRiskEstimate || !w.Contains(ee.start_tok, ee.end_tok)) continue;
        bool positive = false;
        for (const RelationLabel &r : ex.relations) {
          if (r.gene_entity == static_cast<int>(g) && r.estimate_entity == static_cast<int>(e)) {
            positive = r.polarity == Polarity::kPositive;
          }
        }
        we.pairs.push_back({local(ge), local(ee), positive});
      }
    }
    out.push_back(std::move(we));
  }
  return out;
}

EntityType ArgmaxType(const EntityDistribution &p) {
  int best = 0;
  for (int c = 1; c < kNumEntityTypes; ++c) {
    if (p[c] > p[best]) best = c;
  }
  return static_cast<EntityType>(best);
}

JointModel::JointModel(nn::SubwordVocab vocab, std::unique_ptr<nn::Encoder> encoder,
                       uint64_t head_seed, double init_std)
    : vocab_(std::move(vocab)), encoder_(std::move(encoder)) {
  const int h = encoder_->hidden_size();
  w_e_ = nn::Param("head.entity.w", kNumEntityTypes, h);
  b_e_ = nn::Param("head.entity.b", 1, kNumEntityTypes);
  w_r_ = nn::Param("head.relation.w", 1, h);
  b_r_ = nn::Param("head.relation.b", 1, 1);
  Rng rng(head_seed ^ 0x6a6f696e74ULL);
  w_e_.InitNormal(rng, init_std);
  w_r_.InitNormal(rng, init_std);
}

std::unique_ptr<JointModel> JointModel::Create(nn::SubwordVocab vocab,
                                               nn::TransformerConfig config) {
  config.vocab_size = vocab.size();
  auto encoder = std::make_unique<nn::TransformerEncoder>(config);
  return std::make_unique<JointModel>(std::move(vocab), std::move(encoder), config.seed,
                                      config.init_std);
}

JointModel::Forwarded JointModel::Forward(const std::vector<std::string> &words,
                                          bool keep_state) const {
  Forwarded f;
  f.input = nn::EncodeWords(vocab_, words);
  if (static_cast<int>(f.input.ids.size()) > encoder_->max_length()) {
    throw ConfigError("window of " + std::to_string(words.size()) + " words needs " +
                      std::to_string(f.input.ids.size()) + " subwords, encoder limit is " +
                      std::to_string(encoder_->max_length()));
  }
  f.encoding = encoder_->Forward(f.input.ids, keep_state);
  return f;
}

EntityDistribution JointModel::Distribution(const nn::Matrix &h, int pos) const {
  const int dim = encoder_->hidden_size();
  EntityDistribution z;
  double mx = -1e300;
  for (int c = 0; c < kNumEntityTypes; ++c) {
    double s = b_e_.value(0, c);
    for (int d = 0; d < dim; ++d) s += w_e_.value(c, d) * (h(0, d) + h(pos, d));
    z[c] = s;
    mx = std::max(mx, s);
  }
  double total = 0;
  for (double &x : z) total += (x = std::exp(x - mx));
  for (double &x : z) x /= total;
  return z;
}

std::vector<EntityDistribution> JointModel::EntityDistributions(const Forwarded &f) const {
  std::vector<EntityDistribution> out;
  for (int first : f.input.word_first) out.push_back(Distribution(f.encoding.hidden, first));
  return out;
}

std::pair<int, int> JointModel::SubwordRange(const Forwarded &f, const EntitySpan &x,
                                             const EntitySpan &y) const {
  const int n = static_cast<int>(f.input.word_first.size());
  for (const EntitySpan *e : {&x, &y}) {
    if (e->start_tok < 0 || e->end_tok > n || e->start_tok >= e->end_tok) {
      throw ConfigError("entity outside window");
    }
  }
  int i = std::min(x.start_tok, y.start_tok);
  int j = std::max(x.end_tok, y.end_tok) - 1;
  return {f.input.word_first[i], f.input.word_last[j]};
}

double JointModel::RelationProbability(const Forwarded &f, const EntitySpan &x,
                                       const EntitySpan &y) const {
  auto [lo, hi] = SubwordRange(f, x, y);
  const nn::Matrix &h = f.encoding.hidden;
  double s = b_r_.value(0, 0);
  for (int d = 0; d < encoder_->hidden_size(); ++d) {
    double sum = 0;
    for (int p = lo; p <= hi; ++p) sum += h(p, d);
    s += w_r_.value(0, d) * h(0, d) * sum;
  }
  return OpenUnitSigmoid(s);
}

LossTerms JointModel::Loss(const WindowExample &ex, const LossWeights &weights,
                           bool accumulate_grad) {
  Forwarded f = Forward(ex.words, accumulate_grad);
  const nn::Matrix &h = f.encoding.hidden;
  const int dim = encoder_->hidden_size();
  nn::Matrix d_h(h.rows(), h.cols());
  LossTerms loss;

  if (weights.entity != 0) {
    for (size_t i = 0; i < ex.words.size(); ++i) {
      const int pos = f.input.word_first[i];
      EntityDistribution p = Distribution(h, pos);
      const int gold = static_cast<int>(ex.tags[i]);
      loss.entity -= weights.entity * std::log(std::max(p[gold], 1e-300));
      if (!accumulate_grad) continue;
      for (int c = 0; c < kNumEntityTypes; ++c) {
        double dz = weights.entity * (p[c] - (c == gold ? 1.0 : 0.0));
        b_e_.grad(0, c) += dz;
        for (int d = 0; d < dim; ++d) {
          w_e_.grad(c, d) += dz * (h(0, d) + h(pos, d));
          double du = dz * w_e_.value(c, d);
          d_h(0, d) += du;
          d_h(pos, d) += du;
        }
      }
    }
  }

  if (weights.relation != 0) {
    std::vector<double> sum(dim);
    for (const WindowExample::Pair &pair : ex.pairs) {
      auto [lo, hi] = SubwordRange(f, pair.gene, pair.estimate);
      std::fill(sum.begin(), sum.end(), 0.0);
      for (int p = lo; p <= hi; ++p) {
        for (int d = 0; d < dim; ++d) sum[d] += h(p, d);
      }
      double s = b_r_.value(0, 0);
      for (int d = 0; d < dim; ++d) s += w_r_.value(0, d) * h(0, d) * sum[d];
      const double y = pair.positive ? 1.0 : 0.0;
      loss.relation += weights.relation * (Softplus(s) - y * s);
      if (!accumulate_grad) continue;
      const double ds = weights.relation * (Sigmoid(s) - y);
      b_r_.grad(0, 0) += ds;
      for (int d = 0; d < dim; ++d) {
        w_r_.grad(0, d) += ds * h(0, d) * sum[d];
        double df = ds * w_r_.value(0, d);
        d_h(0, d) += df * sum[d];
        for (int p = lo; p <= hi; ++p) d_h(p, d) += df * h(0, d);
      }
    }
  }

  if (!std::isfinite(loss.total())) throw Divergence("non-finite loss on example " + ex.id);
  if (accumulate_grad) encoder_->Backward(f.encoding, d_h);
  return loss;
}

nn::ParamList JointModel::Params() {
  nn::ParamList out = encoder_->Params();
  for (nn::Param *p : {&w_e_, &b_e_, &w_r_, &b_r_}) out.push_back(p);
  return out;
}

std::vector<EntityType> JointModel::Tag(const ERExample &sentence,
                                        const WindowConfig &window) const {
  const int n = static_cast<int>(sentence.tokens.size());
  std::vector<SpanWindow> windows = EnumerateSpans(n, window);
  std::vector<int> owner = OwningWindow(n, windows);
  std::vector<EntityType> tags(n, EntityType::kNone);
  for (size_t w = 0; w < windows.size(); ++w) {
    std::vector<EntityDistribution> dist =
        EntityDistributions(Forward(WindowWords(sentence, windows[w]), false));
    for (int t = windows[w].start_tok; t < windows[w].end_tok; ++t) {
      if (owner[t] == static_cast<int>(w)) tags[t] = ArgmaxType(dist[t - windows[w].start_tok]);
    }
  }
  return tags;
}

double JointModel::ScorePair(const ERExample &sentence, const SpanWindow &window,
                             const EntitySpan &gene, const EntitySpan &estimate) const {
  Forwarded f = Forward(WindowWords(sentence, window), false);
  auto local = [&](const EntitySpan &e) {
    return EntitySpan{e.start_tok - window.start_tok, e.end_tok - window.start_tok, e.type};
  };
  return RelationProbability(f, local(gene), local(estimate));
}

void JointModel::Save(const std::string &dir) const {
  auto *transformer = dynamic_cast<const nn::TransformerEncoder *>(encoder_.get());
  if (!transformer) throw ConfigError("only transformer-backed models can be saved");
  std::filesystem::create_directories(dir);
  vocab_.Save(dir + "/vocab.txt");
  WriteFile(dir + "/encoder.json", transformer->config().ToJson().dump(2) + "\n");
  WriteFile(dir + "/model.json", Json{{"kind", kind()}}.dump(2) + "\n");
  nn::SaveParams(const_cast<JointModel *>(this)->Params(), dir + "/params.bin");
}

std::unique_ptr<JointModel> JointModel::Load(const std::string &dir) {
  nn::SubwordVocab vocab = nn::SubwordVocab::Load(dir + "/vocab.txt");
  nn::TransformerConfig config =
      nn::TransformerConfig::FromJson(Json::parse(ReadFile(dir + "/encoder.json")));
  auto model = Create(std::move(vocab), config);
  nn::LoadParams(model->Params(), dir + "/params.bin");
  return model;
}

}  // namespace kbc::er
