#include "kbc/asc/classifier.h"

#include <cmath>
#include <filesystem>

#include "kbc/base/errors.h"
#include "kbc/base/rng.h"
#include "kbc/base/strings.h"
#include "kbc/text/segmenter.h"

namespace kbc::asc {

namespace {

double Sigmoid(double s) {
  return s >= 0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
}

double Softplus(double s) { return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

nn::TransformerConfig WithVocab(nn::TransformerConfig c, int vocab_size) {
  c.vocab_size = vocab_size;
  return c;
}

}  // namespace

const char *ClassifierKindName(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::kLogistic: return "logistic";
    case ClassifierKind::kSvmHinge: return "svm_hinge";
    case ClassifierKind::kEncoder: return "encoder";
  }
  return "?";
}

ClassifierKind ParseClassifierKind(const std::string &name) {
  if (name == "logistic") return ClassifierKind::kLogistic;
  if (name == "svm_hinge" || name == "svm") return ClassifierKind::kSvmHinge;
  if (name == "encoder") return ClassifierKind::kEncoder;
  throw ConfigError("unknown classifier kind '" + name + "'");
}

Json AscTrainConfig::ToJson() const {
  Json j{{"kind", ClassifierKindName(kind)}, {"lr", lr},     {"batch_size", batch_size},
         {"epochs", epochs},                {"seed", seed}, {"l2", l2},
         {"balance_classes", balance_classes},
         {"threshold", threshold}};
  if (kind == ClassifierKind::kEncoder) j["encoder"] = encoder.ToJson();
  return j;
}

AscTrainConfig AscTrainConfig::FromJson(const Json &j) {
  AscTrainConfig c;
  c.kind = ParseClassifierKind(j.value("kind", "encoder"));
  c.lr = j.value("lr", c.kind == ClassifierKind::kEncoder ? 2e-5 : 0.05);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.seed = j.value("seed", c.seed);
  c.l2 = j.value("l2", c.l2);
  c.balance_classes = j.value("balance_classes", c.balance_classes);
  c.threshold = j.value("threshold", c.threshold);
  if (j.contains("encoder")) c.encoder = nn::TransformerConfig::FromJson(j["encoder"]);
  if (c.lr <= 0 || c.batch_size < 1 || c.epochs < 1 || c.threshold < 0 || c.threshold > 1) {
    throw ConfigError("invalid ascertainment training config");
  }
  return c;
}

// ---------------------------------------------------------------------------

LinearModel::LinearModel(ClassifierKind kind, int dim, std::string repr_mode)
    : kind_(kind), repr_mode_(std::move(repr_mode)), w_("linear.w", 1, dim), b_("linear.b", 1, 1) {
  if (kind == ClassifierKind::kEncoder) throw ConfigError("not a linear kind");
}

double LinearModel::Score(const std::vector<double> &x) const {
  if (static_cast<int>(x.size()) != w_.value.cols()) {
    throw ConfigError("input dim " + std::to_string(x.size()) + " does not match model dim " +
                      std::to_string(w_.value.cols()));
  }
  double s = b_.value(0, 0);
  for (size_t i = 0; i < x.size(); ++i) s += w_.value(0, static_cast<int>(i)) * x[i];
  return s;
}

double LinearModel::Probability(const AscInput &input) const {
  double s = Score(input.x);
  return kind_ == ClassifierKind::kLogistic ? Sigmoid(s) : Sigmoid(platt_a_ * s + platt_c_);
}

void LinearModel::Save(const std::string &dir) const {
  std::filesystem::create_directories(dir);
  Json j{{"kind", ClassifierKindName(kind_)},
         {"repr_mode", repr_mode_},
         {"weights", w_.value.values()},
         {"bias", b_.value(0, 0)},
         {"platt", {platt_a_, platt_c_}}};
  WriteFile(dir + "/model.json", j.dump() + "\n");
}

std::unique_ptr<LinearModel> LinearModel::Load(const std::string &dir) {
  Json j = Json::parse(ReadFile(dir + "/model.json"));
  auto w = j.at("weights").get<std::vector<double>>();
  auto m = std::make_unique<LinearModel>(ParseClassifierKind(j.at("kind").get<std::string>()),
                                         static_cast<int>(w.size()),
                                         j.at("repr_mode").get<std::string>());
  m->weights() = w;
  m->bias() = j.at("bias").get<double>();
  m->SetCalibration(j["platt"][0].get<double>(), j["platt"][1].get<double>());
  return m;
}

// ---------------------------------------------------------------------------

EncoderClassifier::EncoderClassifier(nn::SubwordVocab vocab, nn::TransformerConfig config)
    : vocab_(std::move(vocab)), encoder_(WithVocab(config, vocab_.size())) {
  w_ = nn::Param("head.cls.w", 2, encoder_.hidden_size());
  b_ = nn::Param("head.cls.b", 1, 2);
  Rng rng(config.seed ^ 0x617363ULL);
  w_.InitNormal(rng, config.init_std);
}

std::vector<int> EncoderClassifier::Ids(const std::vector<std::string> &words) const {
  nn::EncodedWords enc = nn::EncodeWords(vocab_, words);
  const size_t limit = static_cast<size_t>(encoder_.max_length());
  if (enc.ids.size() > limit) {
    enc.ids.resize(limit);
    enc.ids.back() = nn::SubwordVocab::kSep;
  }
  return enc.ids;
}

std::array<double, 2> EncoderClassifier::Distribution(const std::vector<std::string> &words) const {
  nn::Encoding e = encoder_.Forward(Ids(words), false);
  std::array<double, 2> z{b_.value(0, 0), b_.value(0, 1)};
  for (int c = 0; c < 2; ++c) {
    for (int d = 0; d < encoder_.hidden_size(); ++d) z[c] += w_.value(c, d) * e.hidden(0, d);
  }
  double p1 = Sigmoid(z[1] - z[0]);
  return {1.0 - p1, p1};
}

double EncoderClassifier::Probability(const AscInput &input) const {
  return Distribution(input.words)[1];
}

double EncoderClassifier::Loss(const std::vector<std::string> &words, bool positive, double weight,
                               bool accumulate_grad) {
  nn::Encoding e = encoder_.Forward(Ids(words), accumulate_grad);
  const int dim = encoder_.hidden_size();
  std::array<double, 2> z{b_.value(0, 0), b_.value(0, 1)};
  for (int c = 0; c < 2; ++c) {
    for (int d = 0; d < dim; ++d) z[c] += w_.value(c, d) * e.hidden(0, d);
  }
  // Two-class softmax cross-entropy written through the logit margin.
  const double margin = z[1] - z[0];
  const double loss = weight * (positive ? Softplus(-margin) : Softplus(margin));
  if (!std::isfinite(loss)) throw Divergence("non-finite ascertainment loss");
  if (!accumulate_grad) return loss;
  const double p1 = Sigmoid(margin);
  const double dz1 = weight * (p1 - (positive ? 1.0 : 0.0));
  const double dz[2] = {-dz1, dz1};
  nn::Matrix d_h(e.hidden.rows(), e.hidden.cols());
  for (int c = 0; c < 2; ++c) {
    b_.grad(0, c) += dz[c];
    for (int d = 0; d < dim; ++d) {
      w_.grad(c, d) += dz[c] * e.hidden(0, d);
      d_h(0, d) += dz[c] * w_.value(c, d);
    }
  }
  encoder_.Backward(e, d_h);
  return loss;
}

nn::ParamList EncoderClassifier::Params() {
  nn::ParamList out = encoder_.Params();
  out.push_back(&w_);
  out.push_back(&b_);
  return out;
}

void EncoderClassifier::Save(const std::string &dir) const {
  std::filesystem::create_directories(dir);
  vocab_.Save(dir + "/vocab.txt");
  WriteFile(dir + "/encoder.json", encoder_.config().ToJson().dump(2) + "\n");
  WriteFile(dir + "/model.json", Json{{"kind", "encoder"}}.dump() + "\n");
  nn::SaveParams(const_cast<EncoderClassifier *>(this)->Params(), dir + "/params.bin");
}

std::unique_ptr<EncoderClassifier> EncoderClassifier::Load(const std::string &dir) {
  nn::TransformerConfig config =
      nn::TransformerConfig::FromJson(Json::parse(ReadFile(dir + "/encoder.json")));
  auto m = std::make_unique<EncoderClassifier>(nn::SubwordVocab::Load(dir + "/vocab.txt"), config);
  nn::LoadParams(m->Params(), dir + "/params.bin");
  return m;
}

// ---------------------------------------------------------------------------

namespace {

// Platt scaling: fit sigmoid(a s + c) to held-out labels by Newton's
// method on the smoothed targets of the original formulation.
std::pair<double, double> FitPlatt(const std::vector<double> &scores,
                                   const std::vector<int> &labels) {
  double n_pos = 0, n_neg = 0;
  for (int y : labels) (y ? n_pos : n_neg) += 1;
  const double t_pos = (n_pos + 1) / (n_pos + 2), t_neg = 1 / (n_neg + 2);
  double a = 1.0, c = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    double ga = 0, gc = 0, haa = 1e-9, hac = 0, hcc = 1e-9;
    for (size_t i = 0; i < scores.size(); ++i) {
      double p = Sigmoid(a * scores[i] + c);
      double t = labels[i] ? t_pos : t_neg;
      double w = p * (1 - p);
      ga += (p - t) * scores[i];
      gc += p - t;
      haa += w * scores[i] * scores[i];
      hac += w * scores[i];
      hcc += w;
    }
    double det = haa * hcc - hac * hac;
    if (std::fabs(det) < 1e-18) break;
    double da = (hcc * ga - hac * gc) / det;
    double dc = (haa * gc - hac * ga) / det;
    a -= da;
    c -= dc;
    if (std::fabs(da) + std::fabs(dc) < 1e-10) break;
  }
  return {a, c};
}

struct EpochLoop {
  const AscTrainConfig &config;
  nn::ParamList params;
  std::vector<Json> *log;
  const std::function<void(const Json &)> &on_epoch;

  // `step(i, weight)` returns example i's loss and accumulates gradients;
  // `select()` returns validation metrics.
  void Run(size_t n, const std::vector<int> &labels,
           const std::function<double(size_t, double)> &step,
           const std::function<eval::Metrics()> &select, TrainResult *result) {
    double n_pos = 0;
    for (int y : labels) n_pos += y != 0;
    const double pos_weight =
        config.balance_classes && n_pos > 0 ? (labels.size() - n_pos) / n_pos : 1.0;
    nn::Adam adam;
    Rng rng(config.seed);
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    nn::Snapshot best = nn::TakeSnapshot(params);
    double best_f1 = -1;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
      rng.Shuffle(order);
      double total = 0;
      for (size_t b = 0; b < n; b += config.batch_size) {
        const size_t end = std::min(n, b + config.batch_size);
        nn::ZeroGrads(params);
        for (size_t k = b; k < end; ++k) {
          size_t i = order[k];
          total += step(i, labels[i] ? pos_weight : 1.0);
        }
        for (nn::Param *p : params) {
          for (double &g : p->grad.values()) g /= static_cast<double>(end - b);
        }
        adam.Step(params, config.lr);
        if (!std::isfinite(total) || !nn::AllFinite(params)) {
          throw Divergence("ascertainment training diverged in epoch " + std::to_string(epoch) +
                           " (loss " + std::to_string(total) + ")");
        }
      }
      eval::Metrics m = select();
      Json record{{"epoch", epoch}, {"loss", total}, {"val", m.ToJson()}};
      log->push_back(record);
      if (on_epoch) on_epoch(record);
      double f1 = std::isnan(m.f1) ? 0.0 : m.f1;
      if (f1 > best_f1) {
        best_f1 = f1;
        best = nn::TakeSnapshot(params);
        result->best_epoch = epoch;
        result->best_val = m;
      }
    }
    nn::RestoreSnapshot(best, params);
  }
};

}  // namespace

TrainResult Train(const std::vector<AscInput> &train, const std::vector<int> &train_labels,
                  const std::vector<AscInput> &val, const std::vector<int> &val_labels,
                  const AscTrainConfig &config, const std::string &repr_mode,
                  const std::function<void(const Json &)> &on_epoch) {
  if (train.empty()) throw ConfigError("ascertainment training split is empty");
  if (train.size() != train_labels.size() || val.size() != val_labels.size()) {
    throw ConfigError("inputs and labels differ in length");
  }
  const bool use_val = !val.empty();
  const auto &sel_x = use_val ? val : train;
  const auto &sel_y = use_val ? val_labels : train_labels;
  TrainResult result;

  if (config.kind == ClassifierKind::kEncoder) {
    std::vector<std::vector<std::string>> sentences;
    for (const auto &in : train) sentences.push_back(in.words);
    auto model = std::make_unique<EncoderClassifier>(nn::SubwordVocab::Build(sentences),
                                                     config.encoder);
    EncoderClassifier *m = model.get();
    EpochLoop loop{config, m->Params(), &result.log, on_epoch};
    loop.Run(
        train.size(), train_labels,
        [&](size_t i, double w) { return m->Loss(train[i].words, train_labels[i] != 0, w, true); },
        [&] { return EvaluateClassifier(*m, sel_x, sel_y, config.threshold); }, &result);
    result.model = std::move(model);
    return result;
  }

  const int dim = static_cast<int>(train[0].x.size());
  if (dim == 0) throw ConfigError("linear classifier needs sentence vectors");
  auto model = std::make_unique<LinearModel>(config.kind, dim, repr_mode);
  LinearModel *m = model.get();
  nn::ParamList params = m->Params();
  const bool hinge = config.kind == ClassifierKind::kSvmHinge;
  EpochLoop loop{config, params, &result.log, on_epoch};
  loop.Run(
      train.size(), train_labels,
      [&](size_t i, double w) {
        const std::vector<double> &x = train[i].x;
        const double s = m->Score(x);
        const double y = train_labels[i] ? 1.0 : 0.0;
        double loss, ds;
        if (hinge) {
          const double ys = (2 * y - 1) * s;
          loss = w * std::max(0.0, 1 - ys);
          ds = ys < 1 ? -w * (2 * y - 1) : 0.0;
        } else {
          loss = w * (Softplus(s) - y * s);
          ds = w * (Sigmoid(s) - y);
        }
        auto &grad = params[0]->grad;
        auto &value = params[0]->value;
        for (int d = 0; d < dim; ++d) {
          grad(0, d) += ds * x[d] + config.l2 * value(0, d);
          loss += 0.5 * config.l2 * value(0, d) * value(0, d);
        }
        params[1]->grad(0, 0) += ds;
        return loss;
      },
      [&] {
        if (hinge) {
          // Calibrate on the selection split before scoring it.
          std::vector<double> scores;
          for (const auto &in : sel_x) scores.push_back(m->Score(in.x));
          auto [a, c] = FitPlatt(scores, sel_y);
          m->SetCalibration(a, c);
        }
        return EvaluateClassifier(*m, sel_x, sel_y, config.threshold);
      },
      &result);
  if (hinge) {
    std::vector<double> scores;
    for (const auto &in : sel_x) scores.push_back(m->Score(in.x));
    auto [a, c] = FitPlatt(scores, sel_y);
    m->SetCalibration(a, c);
  }
  result.model = std::move(model);
  return result;
}

std::vector<AscInput> MakeInputs(const std::vector<label::LabeledSentence> &sentences,
                                 const repr::Representer *representer) {
  std::vector<AscInput> out;
  out.reserve(sentences.size());
  for (const auto &s : sentences) {
    text::TokenizedSentence ts = text::MakeSentence(s.pmid, s.sent_id, s.text);
    AscInput in;
    for (const auto &t : ts.tokens) in.words.push_back(t.token);
    if (representer) in.x = (*representer)(ts).vector.values;
    out.push_back(std::move(in));
  }
  return out;
}

std::vector<int> Labels(const std::vector<label::LabeledSentence> &sentences) {
  std::vector<int> out;
  for (const auto &s : sentences) out.push_back(s.positive ? 1 : 0);
  return out;
}

std::vector<double> PredictScores(const Classifier &model, const std::vector<AscInput> &inputs) {
  std::vector<double> out;
  out.reserve(inputs.size());
  for (const auto &in : inputs) out.push_back(model.Probability(in));
  return out;
}

eval::Metrics EvaluateClassifier(const Classifier &model, const std::vector<AscInput> &inputs,
                                 const std::vector<int> &labels, double threshold) {
  std::vector<int> preds;
  for (double p : PredictScores(model, inputs)) preds.push_back(p >= threshold ? 1 : 0);
  return eval::ComputeMetrics(preds, labels);
}

std::string SaveCheckpoint(const TrainResult &result, const AscTrainConfig &config,
                           const std::string &registry, const std::string &run_id,
                           const std::string &data_hash, const Json &extra_metrics) {
  const std::string dir =
      registry + "/asc_" + ClassifierKindName(config.kind) + "/" + run_id;
  result.model->Save(dir);
  Json meta{{"kind", ClassifierKindName(config.kind)},
            {"run_id", run_id},
            {"config", config.ToJson()},
            {"data_hash", data_hash},
            {"best_epoch", result.best_epoch},
            {"metrics", {{"val", result.best_val.ToJson()}}}};
  for (auto it = extra_metrics.begin(); it != extra_metrics.end(); ++it) {
    meta["metrics"][it.key()] = it.value();
  }
  WriteFile(dir + "/metadata.json", meta.dump(2) + "\n");
  WriteJsonl(dir + "/training_log.jsonl", result.log);
  return dir;
}

std::unique_ptr<Classifier> LoadClassifier(const std::string &dir) {
  Json meta = Json::parse(ReadFile(dir + "/model.json"));
  if (meta.at("kind").get<std::string>() == "encoder") return EncoderClassifier::Load(dir);
  return LinearModel::Load(dir);
}

}  // namespace kbc::asc
