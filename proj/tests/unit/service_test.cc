#include <filesystem>
#include <future>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "kbc/base/strings.h"
#include "kbc/rod/synthetic.h"
#include "kbc/service/config.h"
#include "kbc/service/pipeline.h"
#include "kbc/service/review.h"
#include "kbc/service/server.h"
#include "../test_util.h"

namespace kbc::service {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

Json SmallConfigJson(const std::string &run_id) {
  return Json{{"run_id", run_id},
              {"paths",
               {{"corpus_manifest", "data/manifest.jsonl"},
                {"rod", "data/rod.csv"},
                {"direct_annotations", "data/ascertainment_direct.jsonl"},
                {"er_data", "data/er.jsonl"},
                {"registry", "registry"},
                {"runs", "runs"}}},
              {"repr_mode", "tfidf"},
              {"embedding", {{"dim", 32}, {"oov", "hashed"}}},
              {"asc", {{"kind", "logistic"}, {"epochs", 5}, {"lr", 0.05}}},
              {"er",
               {{"lr", 1e-3},
                {"epochs", 2},
                {"patience", 0},
                {"encoder", {{"hidden", 16}, {"layers", 1}, {"heads", 2}, {"ffn", 32},
                             {"max_length", 96}}}}}};
}

// Writes a synthetic corpus and config under `dir`; returns the config path.
std::string SetUpWorkspace(const TempDir &dir, const std::string &run_id, int n_docs = 10) {
  rod::SyntheticSpec spec;
  spec.n_docs = n_docs;
  rod::WriteSyntheticCorpus(rod::GenerateSyntheticCorpus(spec), dir.File("data"));
  const std::string path = dir.File(run_id + ".json");
  WriteFile(path, SmallConfigJson(run_id).dump(2));
  return path;
}

ReviewItem Item(const std::string &id, ItemKind kind, const std::string &pmid,
                double confidence, Json payload) {
  ReviewItem item;
  item.item_id = id;
  item.kind = kind;
  item.pmid = pmid;
  item.sent_id = 1;
  item.confidence = confidence;
  item.model_version = "er_joint/test";
  item.payload = std::move(payload);
  return item;
}

std::vector<ReviewItem> SampleItems() {
  return {Item("t1", ItemKind::kRiskTriple, "100", 0.7,
               {{"gene", "BRCA2"}, {"estimate", "6.20"}, {"metric", "OR"}}),
          Item("t2", ItemKind::kRiskTriple, "100", 0.9,
               {{"gene", "TP53"}, {"estimate", "2.5"}, {"metric", "HR"}}),
          Item("t3", ItemKind::kRiskTriple, "200", 0.8,
               {{"gene", "MLH1"}, {"estimate", "1.9"}, {"metric", "OR"}}),
          Item("a1", ItemKind::kAscertainmentSentence, "100", 0.95,
               {{"text", "Cases were consecutive clinic patients."}})};
}

Clock FixedClock() {
  return [] { return std::string("2024-01-02T03:04:05Z"); };
}

TEST_CASE("config requires repr_mode and resolves paths against the config file") {
  Json j = SmallConfigJson("r");
  j.erase("repr_mode");
  CHECK_THROWS_AS(PipelineConfig::FromJson(j, "/base"), ConfigError);

  PipelineConfig c = PipelineConfig::FromJson(SmallConfigJson("r"), "/base/dir");
  CHECK(c.corpus_manifest == "/base/dir/data/manifest.jsonl");
  CHECK(c.RunDir() == "/base/dir/runs/r");
  CHECK(c.ErModelDir() == "/base/dir/registry/er_joint/r");
  CHECK(c.AscModelDir() == "/base/dir/registry/asc_logistic/r");

  j = SmallConfigJson("r");
  j["repr_mode"] = "glove";
  CHECK_THROWS_AS(PipelineConfig::FromJson(j, "."), ConfigError);
  j = SmallConfigJson("r");
  j["er"]["epochs"] = "many";
  try {
    PipelineConfig::FromJson(j, ".");
    FAIL("expected a ConfigError");
  } catch (const ConfigError &e) {
    CHECK(std::string(e.what()).find("'er'") != std::string::npos);
  }
  j = SmallConfigJson("a/b");
  CHECK_THROWS_AS(PipelineConfig::FromJson(j, "."), ConfigError);
}

TEST_CASE("config round-trips through its serialized form") {
  Json j = SmallConfigJson("r");
  j["window"] = {{"length", 10}, {"stride", 3}};
  j["thresholds"] = {{"ascertainment", 0.7}, {"relation", 0.6}};
  PipelineConfig c = PipelineConfig::FromJson(j, "/b");
  CHECK(c.er.window.length == 10);
  CHECK(c.er.relation_threshold == doctest::Approx(0.6));
  CHECK(c.asc.threshold == doctest::Approx(0.7));
  PipelineConfig again = PipelineConfig::FromJson(c.ToJson(), "/elsewhere");
  CHECK(again.ToJson() == c.ToJson());
}

TEST_CASE("stages name the missing dependency") {
  TempDir dir;
  PipelineConfig c = PipelineConfig::Load(SetUpWorkspace(dir, "deps"));
  auto message = [&](Stage s) {
    try {
      RunStage(c, s);
    } catch (const MissingStage &e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message(Stage::kPredict) == "predict: train_er required");
  CHECK(message(Stage::kLabel) == "label: ingest required");
  CHECK(message(Stage::kTrainAsc) == "train_asc: label required");
  CHECK(message(Stage::kAblate) == "ablate: train_er required");
}

TEST_CASE("review queue is pending items by descending confidence") {
  TempDir dir;
  ReviewStore::WriteItems(dir.path(), SampleItems());
  ReviewStore store = ReviewStore::Open(dir.path(), FixedClock());
  std::vector<std::string> ids;
  for (const auto &i : store.Queue(std::nullopt, std::nullopt)) ids.push_back(i.item_id);
  CHECK(ids == std::vector<std::string>{"a1", "t2", "t3", "t1"});

  ids.clear();
  for (const auto &i : store.Queue(std::string("100"), ItemKind::kRiskTriple)) {
    ids.push_back(i.item_id);
  }
  CHECK(ids == std::vector<std::string>{"t2", "t1"});

  store.Decide("t2", rod::ReviewDecision::kRejected, nullptr, "bob");
  CHECK(store.Queue(std::string("100"), ItemKind::kRiskTriple).size() == 1);
}

TEST_CASE("decisions validate status and edits") {
  TempDir dir;
  ReviewStore::WriteItems(dir.path(), SampleItems());
  ReviewStore store = ReviewStore::Open(dir.path(), FixedClock());
  using rod::ReviewDecision;
  CHECK_THROWS_AS(store.Decide("zz", ReviewDecision::kAccepted, nullptr, "a"), NotFound);
  CHECK_THROWS_AS(store.Decide("t1", ReviewDecision::kPending, nullptr, "a"), ConfigError);
  CHECK_THROWS_AS(store.Decide("t1", ReviewDecision::kEdited, nullptr, "a"), ConfigError);
  CHECK_THROWS_AS(store.Decide("t1", ReviewDecision::kEdited, Json{{"estimate", "six"}}, "a"),
                  ConfigError);
  CHECK_THROWS_AS(store.Decide("t1", ReviewDecision::kEdited, Json{{"pmid", "1"}}, "a"),
                  ConfigError);
  CHECK_THROWS_AS(store.Decide("t1", ReviewDecision::kAccepted, Json{{"gene", "X"}}, "a"),
                  ConfigError);
  // Failed attempts leave the item pending and the log empty.
  CHECK(store.Find("t1")->status == ReviewDecision::kPending);
  CHECK_FALSE(fs::exists(dir.File("decisions.jsonl")));

  ReviewItem done = store.Decide("t1", ReviewDecision::kEdited, Json{{"estimate", "6.25"}}, "a");
  CHECK(done.status == ReviewDecision::kEdited);
  CHECK(done.reviewer == "a");
  CHECK(done.decided_at == "2024-01-02T03:04:05Z");
  CHECK_THROWS_AS(store.Decide("t1", ReviewDecision::kAccepted, nullptr, "b"), Conflict);
}

TEST_CASE("replaying the decision log reconstructs the queue") {
  TempDir dir;
  ReviewStore::WriteItems(dir.path(), SampleItems());
  {
    ReviewStore store = ReviewStore::Open(dir.path(), FixedClock());
    store.Decide("t2", rod::ReviewDecision::kAccepted, nullptr, "alice");
    store.Decide("t3", rod::ReviewDecision::kEdited, Json{{"gene", "MSH2"}}, "bob");
  }
  std::vector<Json> log = ReadJsonl(dir.File("decisions.jsonl"));
  REQUIRE(log.size() == 2);
  CHECK(log[0]["seq"] == 0);
  CHECK(log[1]["seq"] == 1);
  CHECK(log[1]["reviewer"] == "bob");
  CHECK(log[1]["timestamp"] == "2024-01-02T03:04:05Z");
  CHECK(log[1]["edited_payload"]["gene"] == "MSH2");

  ReviewStore reopened = ReviewStore::Open(dir.path(), FixedClock());
  CHECK(reopened.Queue(std::nullopt, std::nullopt).size() == 2);
  CHECK(reopened.Find("t2")->status == rod::ReviewDecision::kAccepted);
  CHECK(reopened.Find("t3")->edited_payload["gene"] == "MSH2");
  CHECK(reopened.Find("t3")->reviewer == "bob");
  reopened.Decide("t1", rod::ReviewDecision::kRejected, nullptr, "carol");
  CHECK(ReadJsonl(dir.File("decisions.jsonl")).back()["seq"] == 2);

  // Regenerated items drop t1: its decision is skipped, not fatal.
  std::vector<ReviewItem> fewer = SampleItems();
  fewer.erase(fewer.begin());
  ReviewStore::WriteItems(dir.path(), fewer);
  ReviewStore regenerated = ReviewStore::Open(dir.path(), FixedClock());
  CHECK(regenerated.warnings().size() == 1);
  CHECK(regenerated.Queue(std::nullopt, std::nullopt).size() == 1);
}

TEST_CASE("a log with two decisions for one item is rejected") {
  TempDir dir;
  ReviewStore::WriteItems(dir.path(), SampleItems());
  WriteFile(dir.File("decisions.jsonl"),
            "{\"seq\":0,\"item_id\":\"t1\",\"status\":\"accepted\"}\n"
            "{\"seq\":1,\"item_id\":\"t1\",\"status\":\"rejected\"}\n");
  CHECK_THROWS_AS(ReviewStore::Open(dir.path()), ParseError);
}

TEST_CASE("KB rows come from accepted and edited items only") {
  TempDir dir;
  ReviewStore::WriteItems(dir.path(), SampleItems());
  ReviewStore store = ReviewStore::Open(dir.path(), FixedClock());
  store.Decide("t1", rod::ReviewDecision::kEdited, Json{{"estimate", "6.25"}}, "a");
  store.Decide("t2", rod::ReviewDecision::kAccepted, nullptr, "a");
  store.Decide("t3", rod::ReviewDecision::kRejected, nullptr, "a");
  store.Decide("a1", rod::ReviewDecision::kAccepted, nullptr, "a");

  rod::RiskRecord known;
  known.pmid = "100";
  known.gene = "TP53";
  known.cancer = "Breast";
  known.race = "White";
  rod::RiskRecord other = known;
  other.gene = "ATM";
  other.cancer = "Ovarian";

  std::vector<rod::KBRow> rows = store.KbRows({other, known});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].record.gene == "BRCA2");
  CHECK(rows[0].record.odds_ratio->text == "6.25");
  CHECK(rows[0].record.cancer == "Ovarian");  // first row of the pmid
  CHECK(rows[0].decision == rod::ReviewDecision::kEdited);
  CHECK(rows[1].record.gene == "TP53");
  CHECK(rows[1].record.hazard_ratio->text == "2.5");
  CHECK_FALSE(rows[1].record.odds_ratio.has_value());
  CHECK(rows[1].record.cancer == "Breast");
  CHECK(rows[1].record.race == std::optional<std::string>("White"));
  CHECK(rows[1].record.ascertainment_snippets ==
        std::vector<std::string>{"Cases were consecutive clinic patients."});
  CHECK(rows[1].model_version == "er_joint/test");
  CHECK(rows[1].sent_id == 1);
}

// One trained run shared by the pipeline and HTTP tests.
struct TrainedRun {
  TempDir dir;
  PipelineConfig config;

  TrainedRun() : config(PipelineConfig::Load(SetUpWorkspace(dir, "http"))) { RunAll(config); }
};

TrainedRun &SharedRun() {
  static TrainedRun run;
  return run;
}

TEST_CASE("the full pipeline writes every artifact") {
  const PipelineConfig &c = SharedRun().config;
  for (const char *f : {"documents.jsonl", "sentences.jsonl", "labeled.jsonl", "split.json",
                        "asc_metrics.json", "er_split.json", "er_metrics.json",
                        "predictions.jsonl", "asc_scores.jsonl", "review/items.jsonl",
                        "ablation.json", "metadata.json"}) {
    CHECK_MESSAGE(fs::exists(c.RunDir() + "/" + f), f);
  }
  Json meta = Json::parse(ReadFile(c.RunDir() + "/metadata.json"));
  CHECK(meta["config"] == c.ToJson());
  CHECK(meta["stages"].size() == 6);
  CHECK(meta["stages"]["label"]["config"] == c.ToJson());
  CHECK(meta["stages"]["ingest"]["summary"]["documents"] == 10);
  CHECK(fs::exists(c.ErModelDir() + "/metadata.json"));
  CHECK(fs::exists(c.ErModelDir() + "/training_log.jsonl"));
  CHECK(fs::exists(c.AscModelDir() + "/metadata.json"));

  Json ablation = Json::parse(ReadFile(c.RunDir() + "/ablation.json"));
  for (const char *k : {"baseline", "A", "B", "C"}) CHECK(ablation.contains(k));

  // Training and test documents never overlap, for either task.
  auto split = eval::DocumentSplit::FromJson(Json::parse(ReadFile(c.RunDir() + "/er_split.json")));
  eval::AssertDisjoint(split);
  auto corpus_split =
      eval::DocumentSplit::FromJson(Json::parse(ReadFile(c.RunDir() + "/split.json")));
  for (const std::string &p : split.test) {
    if (corpus_split.Contains(p)) CHECK(corpus_split.Of(p) == eval::SplitName::kTest);
  }
}

TEST_CASE("labeling is deterministic for a fixed config") {
  TempDir dir;
  rod::SyntheticSpec spec;
  spec.n_docs = 10;
  rod::WriteSyntheticCorpus(rod::GenerateSyntheticCorpus(spec), dir.File("data"));
  std::string outputs[2];
  for (int i = 0; i < 2; ++i) {
    Json j = SmallConfigJson("det" + std::to_string(i));
    PipelineConfig c = PipelineConfig::FromJson(j, dir.path());
    RunStage(c, Stage::kIngest);
    RunStage(c, Stage::kLabel);
    outputs[i] = ReadFile(c.RunDir() + "/labeled.jsonl");
  }
  CHECK_FALSE(outputs[0].empty());
  CHECK(outputs[0] == outputs[1]);
}

HttpRequest Get(const std::string &path, std::map<std::string, std::string> query = {}) {
  return {"GET", path, std::move(query), {}, ""};
}

HttpRequest Post(const std::string &path, const Json &body,
                 std::map<std::string, std::string> headers = {}) {
  return {"POST", path, {}, std::move(headers), body.is_null() ? "" : body.dump()};
}

TEST_CASE("review API status codes and payloads") {
  TrainedRun &run = SharedRun();
  KbService service(run.config, FixedClock());

  HttpResponse queue = service.Handle(Get("/queue"));
  REQUIRE(queue.status == 200);
  const Json &items = queue.body["items"];
  REQUIRE(items.size() >= 2);
  for (size_t i = 1; i < items.size(); ++i) {
    CHECK(items[i - 1]["confidence"].get<double>() >= items[i]["confidence"].get<double>());
  }
  Json triple;
  for (const Json &i : items) {
    if (i["kind"] == "risk_triple") {
      triple = i;
      break;
    }
  }
  REQUIRE(triple.is_object());
  const std::string id = triple["item_id"];
  const std::string pmid = triple["pmid"];

  HttpResponse filtered = service.Handle(Get("/queue", {{"pmid", pmid}, {"kind", "risk_triple"}}));
  CHECK(filtered.status == 200);
  for (const Json &i : filtered.body["items"]) {
    CHECK(i["pmid"] == pmid);
    CHECK(i["kind"] == "risk_triple");
  }
  CHECK(service.Handle(Get("/queue", {{"kind", "bogus"}})).status == 400);

  HttpResponse doc = service.Handle(Get("/document/" + pmid));
  CHECK(doc.status == 200);
  CHECK(doc.body["sentences"].size() > 0);
  CHECK(doc.body["sentences"][0]["tokens"][0].contains("start"));
  CHECK(service.Handle(Get("/document/0000")).status == 404);

  HttpResponse ok = service.Handle(
      Post("/decision", {{"item_id", id}, {"status", "accepted"}}, {{"x-reviewer", "alice"}}));
  CHECK(ok.status == 200);
  CHECK(ok.body["status"] == "accepted");
  CHECK(ok.body["reviewer"] == "alice");
  CHECK(service.Handle(Post("/decision", {{"item_id", id}, {"status", "rejected"}})).status == 409);
  CHECK(service.Handle(Post("/decision", {{"item_id", "nope"}, {"status", "accepted"}})).status ==
        404);
  const std::string other = items[0]["item_id"] == id ? items[1]["item_id"] : items[0]["item_id"];
  CHECK(service.Handle(Post("/decision", {{"item_id", other}, {"status", "maybe"}})).status == 400);
  CHECK(service.Handle(Post("/decision", {{"status", "accepted"}})).status == 400);
  CHECK(service.Handle({"POST", "/decision", {}, {}, "{not json"}).status == 400);
  CHECK(service.Handle(Get("/nowhere")).status == 404);

  // The accepted triple is in the emitted KB, through the shared writer.
  const std::string kb = run.dir.File("kb.csv");
  HttpResponse emitted = service.Handle(Post("/emit-kb", {{"path", kb}}));
  REQUIRE(emitted.status == 200);
  const std::string csv = ReadFile(kb);
  CHECK(emitted.body["rows"].get<int>() == 1);
  CHECK(csv.find(triple["payload"]["gene"].get<std::string>()) != std::string::npos);
  CHECK(csv.find(",accepted") != std::string::npos);
  const std::string shared = run.dir.File("kb_shared.csv");
  CHECK(EmitRunKb(run.config, shared) == emitted.body["rows"].get<size_t>());
  CHECK(ReadFile(shared) == csv);

  HttpResponse runs = service.Handle(Get("/runs"));
  CHECK(runs.status == 200);
  REQUIRE(runs.body["runs"].size() == 1);
  CHECK(runs.body["runs"][0]["run_id"] == "http");
}

TEST_CASE("review API over a real socket") {
  TrainedRun &run = SharedRun();
  KbService service(run.config, FixedClock());
  std::promise<int> port_promise;
  std::thread server([&] {
    bool ok = service.Serve("127.0.0.1", 0, [&](int p) { port_promise.set_value(p); });
    if (!ok) port_promise.set_value(-1);
  });
  const int port = port_promise.get_future().get();
  REQUIRE(port > 0);
  httplib::Client client("127.0.0.1", port);
  auto queue = client.Get("/queue?kind=risk_triple");
  REQUIRE(queue);
  CHECK(queue->status == 200);
  Json items = Json::parse(queue->body)["items"];
  std::string pending;
  for (const Json &i : items) {
    if (i["status"] == "pending") {
      pending = i["item_id"];
      break;
    }
  }
  REQUIRE_FALSE(pending.empty());
  httplib::Headers headers{{"X-Reviewer", "dana"}};
  Json body{{"item_id", pending}, {"status", "edited"}, {"edited_payload", {{"cancer", "Colon"}}}};
  auto decided = client.Post("/decision", headers, body.dump(), "application/json");
  REQUIRE(decided);
  CHECK(decided->status == 200);
  CHECK(Json::parse(decided->body)["reviewer"] == "dana");
  auto again = client.Post("/decision", headers, body.dump(), "application/json");
  REQUIRE(again);
  CHECK(again->status == 409);
  auto runs = client.Get("/runs");
  REQUIRE(runs);
  CHECK(runs->status == 200);
  service.Stop();
  server.join();
}

}  // namespace
}  // namespace kbc::service
