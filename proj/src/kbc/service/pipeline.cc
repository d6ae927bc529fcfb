#include "kbc/service/pipeline.h"

#include <cstdio>
#include <filesystem>
#include <set>

#include "kbc/asc/classifier.h"
#include "kbc/base/rng.h"
#include "kbc/base/strings.h"
#include "kbc/er/example.h"
#include "kbc/er/trainer.h"
#include "kbc/eval/perturb.h"
#include "kbc/label/labeler.h"
#include "kbc/nn/param.h"
#include "kbc/rod/rod_csv.h"
#include "kbc/service/review.h"
#include "kbc/text/corpus_io.h"
#include "kbc/text/segmenter.h"

namespace kbc::service {

namespace fs = std::filesystem;

namespace {

constexpr Stage kStages[] = {Stage::kIngest,  Stage::kLabel,   Stage::kTrainAsc,
                             Stage::kTrainEr, Stage::kPredict, Stage::kAblate};

void Log(const Logger &log, const std::string &msg) {
  if (log) log(msg);
}

std::string HashFile(const std::string &path) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(Fingerprint(ReadFile(path))));
  return buf;
}

void WriteJson(const std::string &path, const Json &j) { WriteFile(path, j.dump(2) + "\n"); }

Json ReadJson(const std::string &path) { return Json::parse(ReadFile(path)); }

void RecordStage(const PipelineConfig &config, Stage stage, const Json &summary) {
  const std::string path = config.RunDir() + "/metadata.json";
  Json meta = fs::exists(path) ? ReadJson(path) : Json::object();
  meta["run_id"] = config.run_id;
  meta["config"] = config.ToJson();
  // The top-level config is the latest one used; each stage also keeps
  // the exact config it ran with, since CLI overrides can differ per stage.
  meta["stages"][StageName(stage)] = {{"config", config.ToJson()}, {"summary", summary}};
  WriteJson(path, meta);
}

er::DecodeOptions DecodeOptionsFor(const PipelineConfig &config) {
  er::DecodeOptions options;
  options.threshold = config.er.relation_threshold;
  options.scope = er::PairScope::kWindow;
  options.window = config.er.window;
  return options;
}

std::string ModelVersion(const PipelineConfig &config) {
  return std::string("er_") + er::TrainModeName(config.er.mode) + "/" + config.run_id;
}

std::vector<std::string> Words(const text::TokenizedSentence &s) {
  std::vector<std::string> words;
  words.reserve(s.tokens.size());
  for (const auto &t : s.tokens) words.push_back(t.token);
  return words;
}

std::vector<er::ERExample> ReadErData(const PipelineConfig &config) {
  if (config.er_data.empty()) throw ConfigError("config field 'paths.er_data' is required");
  return er::ReadExamples(config.er_data);
}

Json Ingest(const PipelineConfig &config, const Logger &log) {
  if (config.corpus_manifest.empty()) {
    throw ConfigError("config field 'paths.corpus_manifest' is required");
  }
  text::Corpus corpus = text::LoadCorpus(config.corpus_manifest);
  std::vector<Json> docs, sentences, errors;
  for (const text::Document &doc : corpus.documents()) {
    docs.push_back(text::DocumentToJson(doc));
    for (const auto &s : text::SegmentAndTokenize(doc)) {
      sentences.push_back(text::SentenceToJson(s));
    }
  }
  for (const text::LoadError &e : corpus.errors()) {
    errors.push_back({{"pmid", e.pmid}, {"path", e.path}, {"message", e.message}});
    Log(log, "ingest: " + e.pmid + ": " + e.message);
  }
  const std::string dir = config.RunDir();
  WriteJsonl(dir + "/documents.jsonl", docs);
  WriteJsonl(dir + "/sentences.jsonl", sentences);
  WriteJsonl(dir + "/load_errors.jsonl", errors);
  return {{"documents", docs.size()}, {"sentences", sentences.size()},
          {"load_errors", errors.size()}};
}

Json Label(const PipelineConfig &config, const Logger &log) {
  text::Corpus corpus = LoadIngested(config, Stage::kLabel);
  if (config.rod.empty()) throw ConfigError("config field 'paths.rod' is required");
  rod::RodLoadOptions rod_options;
  rod_options.passthrough_extra_columns = config.rod_passthrough_extra_columns;
  rod::RodTable rod = rod::LoadRod(config.rod, rod_options);
  for (const rod::RowError &e : rod.errors) {
    Log(log, "label: rod row " + std::to_string(e.line) + ": " + e.message);
  }
  std::vector<label::LabeledSentence> direct;
  if (!config.direct_annotations.empty()) direct = label::ReadLabeled(config.direct_annotations);

  ReprResources resources(config, corpus);
  label::DatasetConfig dc;
  dc.k = config.k_top;
  dc.ratios = config.split;
  dc.split_seed = config.split_seed;
  label::AscertainmentDataset ds =
      label::BuildAscertainmentDataset(corpus, rod.records, direct, resources.representer(), dc);
  for (const std::string &w : ds.warnings) Log(log, "label: " + w);

  std::vector<Json> rows;
  for (const auto &s : ds.All()) rows.push_back(label::ToJson(s));
  const std::string dir = config.RunDir();
  WriteJsonl(dir + "/labeled.jsonl", rows);
  WriteJson(dir + "/split.json", ds.split.ToJson());
  auto positives = [](const std::vector<label::LabeledSentence> &v) {
    size_t n = 0;
    for (const auto &s : v) n += s.positive;
    return n;
  };
  Json summary{{"repr_mode", repr::ReprModeName(ds.repr_mode)},
               {"train", {{"sentences", ds.train.size()}, {"positive", positives(ds.train)}}},
               {"val", {{"sentences", ds.val.size()}, {"positive", positives(ds.val)}}},
               {"test", {{"sentences", ds.test.size()}, {"positive", positives(ds.test)}}},
               {"rod_row_errors", rod.errors.size()},
               {"missing_pmids", ds.missing_pmids},
               {"warnings", ds.warnings.size()}};
  WriteJson(dir + "/label_report.json", Json{{"summary", summary}, {"warnings", ds.warnings}});
  return summary;
}

Json TrainAsc(const PipelineConfig &config, const Logger &log) {
  const std::string labeled_path = config.RunDir() + "/labeled.jsonl";
  if (!fs::exists(labeled_path)) throw MissingStage(Stage::kTrainAsc, Stage::kLabel);
  std::vector<label::LabeledSentence> labeled = label::ReadLabeled(labeled_path);

  std::unique_ptr<ReprResources> resources;
  const repr::Representer *representer = nullptr;
  if (config.asc.kind != asc::ClassifierKind::kEncoder) {
    text::Corpus corpus = LoadIngested(config, Stage::kTrainAsc);
    resources = std::make_unique<ReprResources>(config, corpus);
    representer = &resources->representer();
  }
  std::vector<label::LabeledSentence> parts[3];
  for (auto &s : labeled) {
    int idx = s.split == "val" ? 1 : s.split == "test" ? 2 : 0;
    parts[idx].push_back(std::move(s));
  }
  std::vector<asc::AscInput> inputs[3];
  for (int i = 0; i < 3; ++i) inputs[i] = asc::MakeInputs(parts[i], representer);

  asc::TrainResult result = asc::Train(
      inputs[0], asc::Labels(parts[0]), inputs[1], asc::Labels(parts[1]), config.asc,
      repr::ReprModeName(config.repr_mode),
      [&](const Json &e) { Log(log, "train_asc: " + e.dump()); });
  Json test = nullptr;
  if (!parts[2].empty()) {
    test = asc::EvaluateClassifier(*result.model, inputs[2], asc::Labels(parts[2]),
                                   config.asc.threshold)
               .ToJson();
  }
  const std::string dir = asc::SaveCheckpoint(result, config.asc, config.registry, config.run_id,
                                              HashFile(labeled_path), Json{{"test", test}});
  Json summary{{"checkpoint", dir},
               {"best_epoch", result.best_epoch},
               {"val", result.best_val.ToJson()},
               {"test", test}};
  WriteJson(config.RunDir() + "/asc_metrics.json", summary);
  return summary;
}

Json TrainEr(const PipelineConfig &config, const Logger &log) {
  std::vector<er::ERExample> examples = ReadErData(config);
  std::vector<std::string> pmids;
  for (const auto &ex : examples) pmids.push_back(ex.pmid);
  eval::DocumentSplit split;
  const std::string corpus_split = config.RunDir() + "/split.json";
  if (fs::exists(corpus_split)) {
    // Reuse the corpus split so no document is in training for one task
    // and in test for the other; pmids outside the corpus go to train.
    eval::DocumentSplit base = eval::DocumentSplit::FromJson(ReadJson(corpus_split));
    std::set<std::string> seen;
    for (const std::string &p : pmids) {
      if (!seen.insert(p).second) continue;
      eval::SplitName s = base.Contains(p) ? base.Of(p) : eval::SplitName::kTrain;
      (s == eval::SplitName::kTest  ? split.test
       : s == eval::SplitName::kVal ? split.val
                                    : split.train)
          .push_back(p);
    }
  } else {
    split = eval::SplitByDocument(pmids, config.split, config.split_seed);
  }
  eval::AssertDisjoint(split);
  std::vector<er::ERExample> parts[3];
  for (const auto &ex : examples) {
    eval::SplitName s = split.Of(ex.pmid);
    parts[s == eval::SplitName::kTest ? 2 : s == eval::SplitName::kVal ? 1 : 0].push_back(ex);
  }
  const std::string run_dir = config.RunDir();
  WriteJson(run_dir + "/er_split.json", split.ToJson());

  er::ERTrainResult result = er::TrainER(parts[0], parts[1], config.er, [&](const Json &e) {
    Log(log, "train_er: " + e.dump());
  });
  Json test = nullptr;
  if (!parts[2].empty()) {
    test = er::Evaluate(*result.model, parts[2], DecodeOptionsFor(config)).ToJson();
  }
  const std::string dir = config.ErModelDir();
  result.model->Save(dir);
  Json summary{{"checkpoint", dir},
               {"best_epoch", result.best_epoch},
               {"examples",
                {{"train", parts[0].size()}, {"val", parts[1].size()}, {"test", parts[2].size()}}},
               {"val", result.best_val.ToJson()},
               {"test", test}};
  Json meta{{"kind", std::string("er_") + er::TrainModeName(config.er.mode)},
            {"run_id", config.run_id},
            {"config", config.er.ToJson()},
            {"data_hash", HashFile(config.er_data)},
            {"best_epoch", result.best_epoch},
            {"metrics", {{"val", summary["val"]}, {"test", test}}}};
  WriteJson(dir + "/metadata.json", meta);
  WriteJsonl(dir + "/training_log.jsonl", result.log);
  WriteJson(run_dir + "/er_metrics.json", summary);
  return summary;
}

Json Predict(const PipelineConfig &config, const Logger &log) {
  const std::string model_dir = config.ErModelDir();
  if (!fs::exists(model_dir + "/model.json")) throw MissingStage(Stage::kPredict, Stage::kTrainEr);
  text::Corpus corpus = LoadIngested(config, Stage::kPredict);
  std::unique_ptr<er::Extractor> model = er::LoadExtractor(model_dir);
  const er::DecodeOptions options = DecodeOptionsFor(config);
  const std::string version = ModelVersion(config);

  std::unique_ptr<asc::Classifier> classifier;
  std::unique_ptr<ReprResources> resources;
  const std::string asc_dir = config.AscModelDir();
  if (fs::exists(asc_dir + "/model.json")) {
    classifier = asc::LoadClassifier(asc_dir);
    if (classifier->needs_vectors()) resources = std::make_unique<ReprResources>(config, corpus);
  } else {
    Log(log, "predict: no ascertainment model at " + asc_dir + "; sentences not scored");
  }

  std::vector<Json> predictions, scores;
  std::vector<ReviewItem> items;
  size_t n_sentences = 0, n_positive = 0;
  for (const text::Document &doc : corpus.documents()) {
    for (const text::TokenizedSentence &s : text::SegmentAndTokenize(doc)) {
      ++n_sentences;
      er::ERExample ex;
      ex.pmid = s.sentence.pmid;
      ex.sent_id = s.sentence.sent_id;
      ex.text = s.sentence.text;
      ex.tokens = s.tokens;
      for (const er::Triple &t : model->Extract(ex, options)) {
        Json j = t.ToJson();
        predictions.push_back(j);
        if (t.polarity != er::Polarity::kPositive) continue;
        ++n_positive;
        ReviewItem item;
        item.item_id = "t:" + t.pmid + ":" + std::to_string(t.sent_id) + ":" +
                       std::to_string(t.gene_span.start_tok) + "-" +
                       std::to_string(t.gene_span.end_tok) + ":" +
                       std::to_string(t.estimate_span.start_tok) + "-" +
                       std::to_string(t.estimate_span.end_tok);
        item.kind = ItemKind::kRiskTriple;
        item.pmid = t.pmid;
        item.sent_id = t.sent_id;
        item.confidence = t.confidence;
        item.model_version = version;
        j["text"] = s.sentence.text;
        item.payload = std::move(j);
        items.push_back(std::move(item));
      }
      if (!classifier) continue;
      asc::AscInput input;
      input.words = Words(s);
      if (resources) input.x = resources->representer()(s).vector.values;
      const double p = classifier->Probability(input);
      scores.push_back({{"pmid", s.sentence.pmid}, {"sent_id", s.sentence.sent_id}, {"score", p}});
      if (p < config.asc.threshold) continue;
      ReviewItem item;
      item.item_id = "a:" + s.sentence.pmid + ":" + std::to_string(s.sentence.sent_id);
      item.kind = ItemKind::kAscertainmentSentence;
      item.pmid = s.sentence.pmid;
      item.sent_id = s.sentence.sent_id;
      item.confidence = p;
      item.model_version = std::string("asc_") + asc::ClassifierKindName(config.asc.kind) +
                           "/" + config.run_id;
      label::LabeledSentence labeled;
      labeled.pmid = item.pmid;
      labeled.sent_id = item.sent_id;
      labeled.text = s.sentence.text;
      labeled.positive = true;
      labeled.score = p;
      labeled.repr_mode = repr::ReprModeName(config.repr_mode);
      item.payload = label::ToJson(labeled);
      items.push_back(std::move(item));
    }
  }
  const std::string dir = config.RunDir();
  WriteJsonl(dir + "/predictions.jsonl", predictions);
  WriteJsonl(dir + "/asc_scores.jsonl", scores);
  ReviewStore::WriteItems(dir + "/review", items);
  return {{"sentences", n_sentences},
          {"triples", predictions.size()},
          {"positive_triples", n_positive},
          {"scored_sentences", scores.size()},
          {"review_items", items.size()},
          {"model_version", version}};
}

Json Ablate(const PipelineConfig &config, const Logger &log) {
  const std::string model_dir = config.ErModelDir();
  const std::string split_path = config.RunDir() + "/er_split.json";
  if (!fs::exists(model_dir + "/model.json") || !fs::exists(split_path)) {
    throw MissingStage(Stage::kAblate, Stage::kTrainEr);
  }
  std::unique_ptr<er::Extractor> model = er::LoadExtractor(model_dir);
  eval::DocumentSplit split = eval::DocumentSplit::FromJson(ReadJson(split_path));
  std::vector<er::ERExample> all = ReadErData(config), test;
  for (const auto &ex : all) {
    if (split.Contains(ex.pmid) && split.Of(ex.pmid) == eval::SplitName::kTest) test.push_back(ex);
  }
  std::string evaluated_on = "test";
  if (test.empty()) {
    Log(log, "ablate: test split is empty; evaluating on all examples");
    test = all;
    evaluated_on = "all";
  }
  const er::DecodeOptions options = DecodeOptionsFor(config);
  Json out{{"evaluated_on", evaluated_on},
           {"examples", test.size()},
           {"seed", config.ablation_seed},
           {"baseline", er::Evaluate(*model, test, options).ToJson()}};
  for (eval::PerturbationKind kind :
       {eval::PerturbationKind::kScaleUp, eval::PerturbationKind::kScaleDown,
        eval::PerturbationKind::kReplaceNonNumeric}) {
    eval::PerturbationTask task{kind, config.ablation_seed};
    out[eval::PerturbationName(kind)] =
        er::Evaluate(*model, eval::Perturb(test, task), options).ToJson();
  }
  WriteJson(config.RunDir() + "/ablation.json", out);
  return out;
}

}  // namespace

const char *StageName(Stage s) {
  switch (s) {
    case Stage::kIngest: return "ingest";
    case Stage::kLabel: return "label";
    case Stage::kTrainAsc: return "train_asc";
    case Stage::kTrainEr: return "train_er";
    case Stage::kPredict: return "predict";
    default: return "ablate";
  }
}

Stage ParseStage(const std::string &name) {
  for (Stage s : kStages) {
    if (name == StageName(s)) return s;
  }
  throw ConfigError("unknown stage '" + name + "'");
}

text::Corpus LoadIngested(const PipelineConfig &config, Stage stage) {
  const std::string path = config.RunDir() + "/documents.jsonl";
  if (!fs::exists(path)) throw MissingStage(stage, Stage::kIngest);
  text::Corpus corpus;
  for (const Json &j : ReadJsonl(path)) corpus.Add(text::DocumentFromJson(j));
  return corpus;
}

ReprResources::ReprResources(const PipelineConfig &config, const text::Corpus &corpus)
    : table_(config.embeddings.empty()
                 ? repr::EmbeddingTable(config.embedding_dim, config.oov_policy,
                                        config.embedding_seed)
                 : repr::EmbeddingTable::LoadText(config.embeddings, config.oov_policy,
                                                  config.embedding_seed)) {
  if (config.repr_mode == repr::ReprMode::kTfidf) {
    stats_ = std::make_unique<repr::VocabStats>(repr::VocabStats::Fit(corpus));
  }
  if (config.repr_mode == repr::ReprMode::kCls) {
    nn::TransformerConfig tc = config.cls_encoder;
    if (!config.cls_checkpoint.empty()) {
      cls_vocab_ = nn::SubwordVocab::Load(config.cls_checkpoint + "/vocab.txt");
      tc = nn::TransformerConfig::FromJson(ReadJson(config.cls_checkpoint + "/encoder.json"));
      cls_model_ = std::make_unique<nn::TransformerEncoder>(tc);
      nn::LoadParams(cls_model_->Params(), config.cls_checkpoint + "/params.bin");
    } else {
      std::vector<std::vector<std::string>> sentences;
      for (const text::Document &doc : corpus.documents()) {
        for (const auto &s : text::SegmentAndTokenize(doc)) sentences.push_back(Words(s));
      }
      cls_vocab_ = nn::SubwordVocab::Build(sentences);
      tc.vocab_size = cls_vocab_.size();
      cls_model_ = std::make_unique<nn::TransformerEncoder>(tc);
    }
    cls_.vocab = &cls_vocab_;
    cls_.encoder = cls_model_.get();
  }
  representer_ = std::make_unique<repr::Representer>(config.repr_mode, &table_, stats_.get(),
                                                     cls_model_ ? &cls_ : nullptr);
}

Json RunStage(const PipelineConfig &config, Stage stage, const Logger &log) {
  Log(log, std::string("stage ") + StageName(stage) + " (run " + config.run_id + ")");
  Json summary;
  switch (stage) {
    case Stage::kIngest: summary = Ingest(config, log); break;
    case Stage::kLabel: summary = Label(config, log); break;
    case Stage::kTrainAsc: summary = TrainAsc(config, log); break;
    case Stage::kTrainEr: summary = TrainEr(config, log); break;
    case Stage::kPredict: summary = Predict(config, log); break;
    case Stage::kAblate: summary = Ablate(config, log); break;
  }
  RecordStage(config, stage, summary);
  return summary;
}

Json RunAll(const PipelineConfig &config, const Logger &log) {
  Json out = Json::object();
  for (Stage s : kStages) out[StageName(s)] = RunStage(config, s, log);
  return out;
}

size_t EmitRunKb(const PipelineConfig &config, const std::string &path) {
  return EmitStoreKb(config, ReviewStore::Open(config.RunDir() + "/review"), path);
}

size_t EmitStoreKb(const PipelineConfig &config, const ReviewStore &store,
                   const std::string &path) {
  std::vector<rod::RiskRecord> rod;
  if (!config.rod.empty() && fs::exists(config.rod)) {
    rod::RodLoadOptions options;
    options.passthrough_extra_columns = config.rod_passthrough_extra_columns;
    rod = rod::LoadRod(config.rod, options).records;
  }
  std::vector<rod::KBRow> rows = store.KbRows(rod);
  rod::EmitKb(rows, path);
  return rows.size();
}

}  // namespace kbc::service
