#include "kbc/er/trainer.h"

#include <cmath>
#include <map>
#include <set>

#include "kbc/base/errors.h"
#include "kbc/base/rng.h"
#include "kbc/base/strings.h"
#include "kbc/er/disjoint.h"
#include "kbc/er/joint_model.h"

namespace kbc::er {

const char *TrainModeName(TrainMode m) { return m == TrainMode::kJoint ? "joint" : "disjoint"; }

TrainMode ParseTrainMode(const std::string &name) {
  if (name == "joint") return TrainMode::kJoint;
  if (name == "disjoint") return TrainMode::kDisjoint;
  throw ConfigError("unknown ER mode '" + name + "'");
}

Json ERTrainConfig::ToJson() const {
  return {{"mode", TrainModeName(mode)},
          {"lr", lr},
          {"batch_size", batch_size},
          {"epochs", epochs},
          {"patience", patience},
          {"linear_decay", linear_decay},
          {"seed", seed},
          {"relation_threshold", relation_threshold},
          {"window", window.ToJson()},
          {"encoder", encoder.ToJson()}};
}

ERTrainConfig ERTrainConfig::FromJson(const Json &j) {
  ERTrainConfig c;
  c.mode = ParseTrainMode(j.value("mode", "joint"));
  c.lr = j.value("lr", c.lr);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.patience = j.value("patience", c.patience);
  c.linear_decay = j.value("linear_decay", c.linear_decay);
  c.seed = j.value("seed", c.seed);
  c.relation_threshold = j.value("relation_threshold", c.relation_threshold);
  if (j.contains("window")) c.window = WindowConfig::FromJson(j["window"]);
  if (j.contains("encoder")) c.encoder = nn::TransformerConfig::FromJson(j["encoder"]);
  if (c.lr <= 0 || c.batch_size < 1 || c.epochs < 1 || c.patience < 0) {
    throw ConfigError("invalid ER training config");
  }
  return c;
}

double ERMetrics::SelectionScore() const {
  double s = 0;
  if (!std::isnan(entity.f1)) s += entity.f1;
  if (!std::isnan(relation.f1)) s += relation.f1;
  return s;
}

Json ERMetrics::ToJson() const {
  return {{"entity", entity.ToJson()}, {"relation", relation.ToJson()}};
}

namespace {

using SpanPair = std::pair<std::pair<int, int>, std::pair<int, int>>;

SpanPair Key(const EntitySpan &g, const EntitySpan &e) {
  return {{g.start_tok, g.end_tok}, {e.start_tok, e.end_tok}};
}

// Gold gene x estimate pairs that share at least one window, with their
// gold polarity (unlisted pairs are negative).
std::map<SpanPair, bool> GoldCandidates(const ERExample &ex, const WindowConfig &window) {
  std::map<SpanPair, bool> out;
  auto windows = EnumerateSpans(static_cast<int>(ex.tokens.size()), window);
  for (size_t g = 0; g < ex.entities.size(); ++g) {
    if (ex.entities[g].type != EntityType::kGermlineMutation) continue;
    for (size_t e = 0; e < ex.entities.size(); ++e) {
      if (ex.entities[e].type != EntityType::kRiskEstimate) continue;
      bool shared = false;
      for (const auto &w : windows) {
        shared |= w.Contains(ex.entities[g].start_tok, ex.entities[g].end_tok) &&
                  w.Contains(ex.entities[e].start_tok, ex.entities[e].end_tok);
      }
      if (shared) out[Key(ex.entities[g], ex.entities[e])] = false;
    }
  }
  for (const RelationLabel &r : ex.relations) {
    if (r.polarity == Polarity::kPositive) {
      out[Key(ex.entities[r.gene_entity], ex.entities[r.estimate_entity])] = true;
    }
  }
  return out;
}

}  // namespace

ERMetrics Evaluate(const Extractor &model, const std::vector<ERExample> &examples,
                   const DecodeOptions &options) {
  eval::ConfusionCounts ent, rel;
  for (const ERExample &ex : examples) {
    std::vector<EntityType> gold = TokenTags(ex);
    std::vector<EntityType> pred = model.Tag(ex, options.window);
    for (size_t i = 0; i < gold.size(); ++i) {
      bool g = gold[i] != EntityType::kNone, p = pred[i] != EntityType::kNone;
      if (g && p && gold[i] == pred[i]) {
        ++ent.tp;
      } else {
        if (p) ++ent.fp;
        if (g) ++ent.fn;
        if (!p && !g) ++ent.tn;
      }
    }

    std::map<SpanPair, bool> candidates = GoldCandidates(ex, options.window);
    std::set<SpanPair> predicted;
    auto scorer = [&](const SpanWindow &w, const EntitySpan &g, const EntitySpan &e) {
      return std::optional<double>(model.ScorePair(ex, w, g, e));
    };
    for (const Triple &t : DecodeTriples(ex, pred, scorer, options)) {
      if (t.polarity == Polarity::kPositive) predicted.insert(Key(t.gene_span, t.estimate_span));
    }
    for (const auto &[key, positive] : candidates) {
      bool p = predicted.count(key) > 0;
      if (positive && p) ++rel.tp;
      else if (positive) ++rel.fn;
      else if (p) ++rel.fp;
      else ++rel.tn;
    }
    for (const SpanPair &key : predicted) {
      if (!candidates.count(key)) ++rel.fp;
    }
  }
  return {eval::ComputeMetrics(ent), eval::ComputeMetrics(rel)};
}

eval::Metrics EvaluatePairsOnGoldEntities(const Extractor &model,
                                          const std::vector<ERExample> &examples,
                                          const DecodeOptions &options) {
  std::vector<int> preds, golds;
  for (const ERExample &ex : examples) {
    std::vector<EntityType> gold_tags = TokenTags(ex);
    std::map<SpanPair, bool> candidates = GoldCandidates(ex, options.window);
    std::map<SpanPair, bool> decided;
    auto scorer = [&](const SpanWindow &w, const EntitySpan &g, const EntitySpan &e) {
      return std::optional<double>(model.ScorePair(ex, w, g, e));
    };
    for (const Triple &t : DecodeTriples(ex, gold_tags, scorer, options)) {
      decided[Key(t.gene_span, t.estimate_span)] = t.polarity == Polarity::kPositive;
    }
    for (const auto &[key, positive] : candidates) {
      golds.push_back(positive);
      preds.push_back(decided.count(key) && decided[key]);
    }
  }
  return eval::ComputeMetrics(preds, golds);
}

namespace {

nn::SubwordVocab BuildVocab(const std::vector<ERExample> &train) {
  std::vector<std::vector<std::string>> sentences;
  for (const auto &ex : train) {
    std::vector<std::string> words;
    for (const auto &t : ex.tokens) words.push_back(t.token);
    sentences.push_back(std::move(words));
  }
  return nn::SubwordVocab::Build(sentences);
}

double StepLr(const ERTrainConfig &c, long step, long total) {
  if (!c.linear_decay || total <= 0) return c.lr;
  return c.lr * std::max(0.0, 1.0 - static_cast<double>(step) / total);
}

void ScaleGrads(const nn::ParamList &params, double scale) {
  for (nn::Param *p : params) {
    for (double &g : p->grad.values()) g *= scale;
  }
}

// Generic epoch loop: `run_batch` consumes a batch of unit indices and
// returns their summed loss, `score` evaluates the current parameters.
struct LoopResult {
  nn::Snapshot best;
  double best_score = -1;
  int best_epoch = 0;
  Json best_metrics;
};

LoopResult RunEpochs(const std::string &stage, size_t n_units, const nn::ParamList &params,
                     const ERTrainConfig &config, uint64_t seed,
                     const std::function<double(const std::vector<size_t> &)> &run_batch,
                     const std::function<std::pair<double, Json>()> &score,
                     std::vector<Json> *log,
                     const std::function<void(const Json &)> &on_epoch) {
  LoopResult out;
  out.best = nn::TakeSnapshot(params);
  if (n_units == 0) throw ConfigError(stage + ": no training units");
  nn::Adam adam;
  Rng rng(seed);
  std::vector<size_t> order(n_units);
  for (size_t i = 0; i < n_units; ++i) order[i] = i;
  const long batches_per_epoch =
      static_cast<long>((n_units + config.batch_size - 1) / config.batch_size);
  const long total_steps = batches_per_epoch * config.epochs;
  long step = 0;
  int stale = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.Shuffle(order);
    double epoch_loss = 0;
    for (size_t b = 0; b < n_units; b += config.batch_size) {
      std::vector<size_t> batch(order.begin() + b,
                                order.begin() + std::min(n_units, b + config.batch_size));
      nn::ZeroGrads(params);
      epoch_loss += run_batch(batch);
      ScaleGrads(params, 1.0 / batch.size());
      adam.Step(params, StepLr(config, step++, total_steps));
      if (!nn::AllFinite(params)) {
        throw Divergence(stage + ": non-finite parameters after epoch " + std::to_string(epoch) +
                         " step " + std::to_string(step));
      }
    }
    auto [s, metrics] = score();
    Json record{{"stage", stage}, {"epoch", epoch}, {"loss", epoch_loss}, {"val", metrics}};
    log->push_back(record);
    if (on_epoch) on_epoch(record);
    if (s > out.best_score) {
      out.best_score = s;
      out.best_epoch = epoch;
      out.best_metrics = metrics;
      out.best = nn::TakeSnapshot(params);
      stale = 0;
    } else if (config.patience > 0 && ++stale >= config.patience) {
      break;
    }
    if (s >= 2.0 - 1e-12) break;  // nothing left to improve on the selection data
  }
  nn::RestoreSnapshot(out.best, params);
  return out;
}

}  // namespace

ERTrainResult TrainER(const std::vector<ERExample> &train, const std::vector<ERExample> &val,
                      const ERTrainConfig &config,
                      const std::function<void(const Json &)> &on_epoch) {
  if (train.empty()) throw ConfigError("ER training split is empty");
  config.window.Validate();
  const std::vector<ERExample> &select = val.empty() ? train : val;
  DecodeOptions options{config.relation_threshold, PairScope::kWindow, config.window};

  std::vector<WindowExample> units;
  for (const auto &ex : train) {
    for (auto &w : MakeWindowExamples(ex, config.window)) units.push_back(std::move(w));
  }

  ERTrainResult result;
  nn::SubwordVocab vocab = BuildVocab(train);
  auto joint = JointModel::Create(vocab, config.encoder);
  LossWeights weights;
  if (config.mode == TrainMode::kDisjoint) weights.relation = 0;
  nn::ParamList params = joint->Params();

  LoopResult first = RunEpochs(
      config.mode == TrainMode::kJoint ? "joint" : "tagger", units.size(), params, config,
      config.seed,
      [&](const std::vector<size_t> &batch) {
        double loss = 0;
        for (size_t i : batch) loss += joint->Loss(units[i], weights, true).total();
        return loss;
      },
      [&]() {
        ERMetrics m = Evaluate(*joint, select, options);
        if (config.mode == TrainMode::kDisjoint) {
          double f1 = std::isnan(m.entity.f1) ? 0.0 : m.entity.f1;
          return std::make_pair(2 * f1, Json{{"entity", m.entity.ToJson()}});
        }
        return std::make_pair(m.SelectionScore(), m.ToJson());
      },
      &result.log, on_epoch);

  if (config.mode == TrainMode::kJoint) {
    result.best_epoch = first.best_epoch;
    result.best_val = Evaluate(*joint, select, options);
    result.model = std::move(joint);
    return result;
  }

  // Relation stage on gold-entity pairs.
  auto relation = std::make_unique<RelationClassifier>(vocab, config.encoder);
  struct PairUnit {
    RelationClassifier::Input input;
    bool positive;
  };
  std::vector<PairUnit> pairs;
  for (const auto &ex : train) {
    for (const WindowExample &we : MakeWindowExamples(ex, config.window)) {
      for (const WindowExample::Pair &p : we.pairs) {
        auto surface = [&](const EntitySpan &e) {
          std::vector<std::string> words(we.words.begin() + e.start_tok,
                                         we.words.begin() + e.end_tok);
          return Join(words, " ");
        };
        pairs.push_back({relation->MakeInput(we.words, surface(p.gene), surface(p.estimate)),
                         p.positive});
      }
    }
  }
  nn::ParamList rel_params = relation->Params();
  RelationClassifier *rel = relation.get();
  auto model = std::make_unique<DisjointModel>(std::move(joint), std::move(relation));
  RunEpochs(
      "relation", pairs.size(), rel_params, config, config.seed + 1,
      [&](const std::vector<size_t> &batch) {
        double loss = 0;
        for (size_t i : batch) loss += rel->Loss(pairs[i].input, pairs[i].positive, true);
        return loss;
      },
      [&]() {
        eval::Metrics m = EvaluatePairsOnGoldEntities(*model, select, options);
        double f1 = std::isnan(m.f1) ? 0.0 : m.f1;
        return std::make_pair(2 * f1, Json{{"pairs", m.ToJson()}});
      },
      &result.log, on_epoch);
  result.best_epoch = first.best_epoch;
  result.best_val = Evaluate(*model, select, options);
  result.model = std::move(model);
  return result;
}

std::unique_ptr<Extractor> LoadExtractor(const std::string &dir) {
  Json meta = Json::parse(ReadFile(dir + "/model.json"));
  std::string kind = meta.at("kind").get<std::string>();
  if (kind == "joint") return JointModel::Load(dir);
  if (kind == "disjoint") return DisjointModel::Load(dir);
  throw ConfigError("unknown model kind '" + kind + "' in " + dir);
}

}  // namespace kbc::er
