#include "kbc/er/disjoint.h"

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

double Softplus(double s) { return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

nn::TransformerConfig WithVocab(nn::TransformerConfig c, int vocab_size) {
  c.vocab_size = vocab_size;
  return c;
}

}  // namespace

RelationClassifier::RelationClassifier(nn::SubwordVocab vocab, nn::TransformerConfig config)
    : vocab_(std::move(vocab)), encoder_(WithVocab(config, vocab_.size())) {
  const int h = encoder_.hidden_size();
  w_ = nn::Param("head.pair.w", 1, 3 * h);
  b_ = nn::Param("head.pair.b", 1, 1);
  Rng rng(config.seed ^ 0x70616972ULL);
  w_.InitNormal(rng, config.init_std);
}

RelationClassifier::Input RelationClassifier::MakeInput(const std::vector<std::string> &span_words,
                                                        const std::string &gene,
                                                        const std::string &estimate) const {
  Input in;
  in.ids.push_back(nn::SubwordVocab::kCls);
  for (const auto &w : span_words) {
    for (int id : vocab_.EncodeWord(w)) in.ids.push_back(id);
  }
  in.ids.push_back(nn::SubwordVocab::kSep);
  auto append = [&](const std::string &surface, int *begin, int *end) {
    *begin = static_cast<int>(in.ids.size());
    for (const auto &w : Split(surface, ' ')) {
      if (w.empty()) continue;
      for (int id : vocab_.EncodeWord(w)) in.ids.push_back(id);
    }
    *end = static_cast<int>(in.ids.size());
    in.ids.push_back(nn::SubwordVocab::kSep);
  };
  append(gene, &in.gene_begin, &in.gene_end);
  append(estimate, &in.est_begin, &in.est_end);
  if (static_cast<int>(in.ids.size()) > encoder_.max_length()) {
    throw ConfigError("relation input of " + std::to_string(in.ids.size()) +
                      " subwords exceeds encoder limit " + std::to_string(encoder_.max_length()));
  }
  if (in.gene_begin == in.gene_end || in.est_begin == in.est_end) {
    throw ConfigError("empty entity surface in relation input");
  }
  return in;
}

std::vector<double> RelationClassifier::Features(const nn::Matrix &h, const Input &in) const {
  const int dim = encoder_.hidden_size();
  std::vector<double> f(3 * dim, 0.0);
  for (int d = 0; d < dim; ++d) {
    f[d] = h(0, d);
    for (int p = in.gene_begin; p < in.gene_end; ++p) f[dim + d] += h(p, d);
    for (int p = in.est_begin; p < in.est_end; ++p) f[2 * dim + d] += h(p, d);
    f[dim + d] /= in.gene_end - in.gene_begin;
    f[2 * dim + d] /= in.est_end - in.est_begin;
  }
  return f;
}

double RelationClassifier::Probability(const Input &input) const {
  nn::Encoding e = encoder_.Forward(input.ids, false);
  std::vector<double> f = Features(e.hidden, input);
  double s = b_.value(0, 0);
  for (size_t k = 0; k < f.size(); ++k) s += w_.value(0, k) * f[k];
  return OpenUnitSigmoid(s);
}

double RelationClassifier::Loss(const Input &input, bool positive, bool accumulate_grad) {
  nn::Encoding e = encoder_.Forward(input.ids, accumulate_grad);
  std::vector<double> f = Features(e.hidden, input);
  double s = b_.value(0, 0);
  for (size_t k = 0; k < f.size(); ++k) s += w_.value(0, k) * f[k];
  const double y = positive ? 1.0 : 0.0;
  double loss = Softplus(s) - y * s;
  if (!std::isfinite(loss)) throw Divergence("non-finite relation loss");
  if (!accumulate_grad) return loss;

  const double ds = Sigmoid(s) - y;
  const int dim = encoder_.hidden_size();
  b_.grad(0, 0) += ds;
  nn::Matrix d_h(e.hidden.rows(), e.hidden.cols());
  for (int d = 0; d < dim; ++d) {
    w_.grad(0, d) += ds * f[d];
    w_.grad(0, dim + d) += ds * f[dim + d];
    w_.grad(0, 2 * dim + d) += ds * f[2 * dim + d];
    d_h(0, d) += ds * w_.value(0, d);
    double dg = ds * w_.value(0, dim + d) / (input.gene_end - input.gene_begin);
    for (int p = input.gene_begin; p < input.gene_end; ++p) d_h(p, d) += dg;
    double de = ds * w_.value(0, 2 * dim + d) / (input.est_end - input.est_begin);
    for (int p = input.est_begin; p < input.est_end; ++p) d_h(p, d) += de;
  }
  encoder_.Backward(e, d_h);
  return loss;
}

nn::ParamList RelationClassifier::Params() {
  nn::ParamList out = encoder_.Params();
  out.push_back(&w_);
  out.push_back(&b_);
  return out;
}

double DisjointModel::ScorePair(const ERExample &sentence, const SpanWindow &window,
                                const EntitySpan &gene, const EntitySpan &estimate) const {
  return relation_->Probability(relation_->MakeInput(WindowWords(sentence, window),
                                                     sentence.Surface(gene),
                                                     sentence.Surface(estimate)));
}

void DisjointModel::Save(const std::string &dir) const {
  std::filesystem::create_directories(dir + "/relation");
  tagger_->Save(dir + "/tagger");
  relation_->vocab().Save(dir + "/relation/vocab.txt");
  WriteFile(dir + "/relation/encoder.json", relation_->config().ToJson().dump(2) + "\n");
  nn::SaveParams(relation_->Params(), dir + "/relation/params.bin");
  WriteFile(dir + "/model.json", Json{{"kind", kind()}}.dump(2) + "\n");
}

std::unique_ptr<DisjointModel> DisjointModel::Load(const std::string &dir) {
  auto tagger = JointModel::Load(dir + "/tagger");
  nn::TransformerConfig config =
      nn::TransformerConfig::FromJson(Json::parse(ReadFile(dir + "/relation/encoder.json")));
  auto relation = std::make_unique<RelationClassifier>(
      nn::SubwordVocab::Load(dir + "/relation/vocab.txt"), config);
  nn::LoadParams(relation->Params(), dir + "/relation/params.bin");
  return std::make_unique<DisjointModel>(std::move(tagger), std::move(relation));
}

}  // namespace kbc::er
