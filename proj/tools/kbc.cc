// Command-line front end for the pipeline stages, the review server and
// the synthetic corpus generator.

#include <csignal>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "kbc/base/errors.h"
#include "kbc/rod/synthetic.h"
#include "kbc/service/config.h"
#include "kbc/service/pipeline.h"
#include "kbc/service/server.h"

namespace {

using kbc::service::PipelineConfig;
using kbc::service::Stage;

kbc::service::KbService *g_service = nullptr;

void HandleSignal(int) {
  if (g_service) g_service->Stop();
}

void LogLine(const std::string &line) { std::cerr << line << "\n"; }

// Flags shared by every subcommand plus the stage-specific overrides. Unset
// overrides leave the config file's value in place; applied overrides end
// up in the run metadata like any other config value.
struct Options {
  std::string config;
  std::optional<std::string> run_id;
  std::optional<std::string> repr_mode;
  std::optional<int> k_top;
  std::optional<std::string> kind;  // classifier kind or ER mode
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<uint64_t> seed;
  std::optional<double> threshold;

  PipelineConfig Load(Stage stage) const {
    PipelineConfig c = PipelineConfig::Load(config);
    if (run_id) c.run_id = *run_id;
    if (repr_mode) c.repr_mode = kbc::repr::ParseReprMode(*repr_mode);
    if (k_top) c.k_top = *k_top;
    if (stage == Stage::kTrainAsc) {
      if (kind) c.asc.kind = kbc::asc::ParseClassifierKind(*kind);
      if (epochs) c.asc.epochs = *epochs;
      if (lr) c.asc.lr = *lr;
      if (seed) c.asc.seed = *seed;
    }
    if (stage == Stage::kTrainEr || stage == Stage::kPredict || stage == Stage::kAblate) {
      if (kind) c.er.mode = kbc::er::ParseTrainMode(*kind);
    }
    if (stage == Stage::kTrainEr) {
      if (epochs) c.er.epochs = *epochs;
      if (lr) c.er.lr = *lr;
      if (seed) c.er.seed = *seed;
    }
    if (stage == Stage::kPredict && threshold) c.er.relation_threshold = *threshold;
    if (stage == Stage::kAblate && seed) c.ablation_seed = *seed;
    return c;
  }
};

CLI::App *AddConfig(CLI::App *sub, Options &o) {
  sub->add_option("--config", o.config, "Pipeline config JSON")->required();
  sub->add_option("--run-id", o.run_id, "Override run_id");
  return sub;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Germline cancer-risk knowledge-base construction"};
  app.require_subcommand(1);
  Options o;

  auto stage = [&](Stage s) {
    return [&o, s] {
      std::cout << kbc::service::RunStage(o.Load(s), s, LogLine).dump(2) << "\n";
    };
  };

  AddConfig(app.add_subcommand("ingest", "Parse and segment the corpus"), o)
      ->callback(stage(Stage::kIngest));

  CLI::App *label =
      AddConfig(app.add_subcommand("label", "Distant-label ascertainment sentences"), o);
  label->add_option("--repr-mode", o.repr_mode, "bow, tfidf or cls");
  label->add_option("--k-top", o.k_top, "Positives per document");
  label->callback(stage(Stage::kLabel));

  CLI::App *train_asc =
      AddConfig(app.add_subcommand("train-asc", "Train the ascertainment classifier"), o);
  train_asc->add_option("--kind", o.kind, "logistic, svm_hinge or encoder");
  train_asc->add_option("--epochs", o.epochs, "Training epochs");
  train_asc->add_option("--lr", o.lr, "Learning rate");
  train_asc->add_option("--seed", o.seed, "Training seed");
  train_asc->callback(stage(Stage::kTrainAsc));

  CLI::App *train_er =
      AddConfig(app.add_subcommand("train-er", "Train the entity/relation model"), o);
  train_er->add_option("--mode", o.kind, "joint or disjoint");
  train_er->add_option("--epochs", o.epochs, "Training epochs");
  train_er->add_option("--lr", o.lr, "Learning rate");
  train_er->add_option("--seed", o.seed, "Training seed");
  train_er->callback(stage(Stage::kTrainEr));

  CLI::App *predict =
      AddConfig(app.add_subcommand("predict", "Extract triples and queue them for review"), o);
  predict->add_option("--mode", o.kind, "Which trained ER model: joint or disjoint");
  predict->add_option("--threshold", o.threshold, "Relation threshold");
  predict->callback(stage(Stage::kPredict));

  CLI::App *ablate = AddConfig(app.add_subcommand("ablate", "Evaluate on perturbed test data"), o);
  ablate->add_option("--mode", o.kind, "Which trained ER model: joint or disjoint");
  ablate->add_option("--seed", o.seed, "Seed for the letter replacements");
  ablate->callback(stage(Stage::kAblate));

  AddConfig(app.add_subcommand("run", "Run every stage in order"), o)->callback([&] {
    std::cout << kbc::service::RunAll(o.Load(Stage::kIngest), LogLine).dump(2) << "\n";
  });

  std::string host = "127.0.0.1";
  int port = 8080;
  CLI::App *serve = AddConfig(app.add_subcommand("serve", "Serve the review API for a run"), o);
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->callback([&] {
    kbc::service::KbService service(o.Load(Stage::kPredict));
    g_service = &service;
    std::signal(SIGINT, HandleSignal);
    std::signal(SIGTERM, HandleSignal);
    bool ok = service.Serve(host, port, [&](int p) {
      std::cerr << "listening on http://" << host << ":" << p << "\n";
    });
    g_service = nullptr;
    if (!ok) throw kbc::IoError("cannot listen on " + host + ":" + std::to_string(port));
  });

  std::string kb_out;
  CLI::App *emit =
      AddConfig(app.add_subcommand("emit-kb", "Write reviewed triples as a KB CSV"), o);
  emit->add_option("--out", kb_out, "Output CSV (default: runs/<run_id>/kb.csv)");
  emit->callback([&] {
    PipelineConfig config = o.Load(Stage::kPredict);
    std::string path = kb_out.empty() ? config.RunDir() + "/kb.csv" : kb_out;
    size_t rows = kbc::service::EmitRunKb(config, path);
    std::cout << kbc::Json{{"path", path}, {"rows", rows}}.dump(2) << "\n";
  });

  kbc::rod::SyntheticSpec spec;
  std::string synth_out;
  CLI::App *synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--docs", spec.n_docs, "Number of documents");
  synth->add_option("--seed", spec.seed, "Generator seed");
  synth->callback([&] {
    kbc::rod::WriteSyntheticCorpus(kbc::rod::GenerateSyntheticCorpus(spec), synth_out);
    std::cout << "wrote " << spec.n_docs << " documents to " << synth_out << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  } catch (const kbc::Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
