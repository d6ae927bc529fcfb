#include "kbc/service/server.h"

#include <algorithm>
#include <cctype>
#include <filesystem>

#include "httplib.h"
#include "kbc/base/strings.h"
#include "kbc/service/pipeline.h"
#include "kbc/text/segmenter.h"

namespace kbc::service {

namespace fs = std::filesystem;

namespace {

HttpResponse Error(int status, const std::string &message) {
  return {status, Json{{"error", message}}};
}

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

KbService::KbService(PipelineConfig config, Clock clock)
    : config_(std::move(config)),
      store_(ReviewStore::Open(config_.RunDir() + "/review", std::move(clock))) {}

HttpResponse KbService::Handle(const HttpRequest &request) {
  try {
    const std::string &p = request.path;
    if (request.method == "GET" && p == "/queue") return Queue(request);
    if (request.method == "GET" && p.rfind("/document/", 0) == 0) {
      return Document(p.substr(std::string("/document/").size()));
    }
    if (request.method == "POST" && p == "/decision") return Decision(request);
    if (request.method == "POST" && p == "/emit-kb") return EmitKb(request);
    if (request.method == "GET" && p == "/runs") return Runs();
    return Error(404, "no route " + request.method + " " + p);
  } catch (const NotFound &e) {
    return Error(404, e.what());
  } catch (const Conflict &e) {
    return Error(409, e.what());
  } catch (const ConfigError &e) {
    return Error(400, e.what());
  } catch (const Json::exception &e) {
    return Error(400, e.what());
  } catch (const std::exception &e) {
    return Error(500, e.what());
  }
}

HttpResponse KbService::Queue(const HttpRequest &request) {
  std::optional<std::string> pmid;
  std::optional<ItemKind> kind;
  if (auto it = request.query.find("pmid"); it != request.query.end() && !it->second.empty()) {
    pmid = it->second;
  }
  if (auto it = request.query.find("kind"); it != request.query.end() && !it->second.empty()) {
    kind = ParseItemKind(it->second);
  }
  Json items = Json::array();
  for (const ReviewItem &item : store_.Queue(pmid, kind)) items.push_back(item.ToJson());
  return {200, Json{{"items", items}}};
}

HttpResponse KbService::Document(const std::string &pmid) {
  text::Corpus corpus = LoadIngested(config_, Stage::kPredict);
  const text::Document *doc = corpus.Find(pmid);
  if (!doc) throw NotFound("no document " + pmid);
  Json sentences = Json::array();
  for (const auto &s : text::SegmentAndTokenize(*doc)) {
    Json tokens = Json::array();
    for (const auto &t : s.tokens) {
      tokens.push_back({{"token", t.token}, {"start", t.start}, {"end", t.end},
                        {"is_numeric", t.is_numeric}});
    }
    sentences.push_back({{"sent_id", s.sentence.sent_id},
                         {"section", s.sentence.section},
                         {"text", s.sentence.text},
                         {"tokens", tokens}});
  }
  Json triples = Json::array(), scores = Json::array();
  const std::string dir = config_.RunDir();
  if (fs::exists(dir + "/predictions.jsonl")) {
    for (const Json &j : ReadJsonl(dir + "/predictions.jsonl")) {
      if (j.value("pmid", "") == pmid) triples.push_back(j);
    }
  }
  if (fs::exists(dir + "/asc_scores.jsonl")) {
    for (const Json &j : ReadJsonl(dir + "/asc_scores.jsonl")) {
      if (j.value("pmid", "") == pmid) scores.push_back(j);
    }
  }
  Json items = Json::array();
  for (const ReviewItem &item : store_.Items()) {
    if (item.pmid == pmid) items.push_back(item.ToJson());
  }
  return {200, Json{{"pmid", pmid},
                    {"sentences", sentences},
                    {"triples", triples},
                    {"ascertainment", scores},
                    {"items", items}}};
}

HttpResponse KbService::Decision(const HttpRequest &request) {
  Json body;
  try {
    body = Json::parse(request.body);
  } catch (const Json::parse_error &e) {
    return Error(400, std::string("body is not JSON: ") + e.what());
  }
  if (!body.is_object() || !body.contains("item_id") || !body["item_id"].is_string() ||
      !body.contains("status") || !body["status"].is_string()) {
    return Error(400, "body needs string fields 'item_id' and 'status'");
  }
  rod::ReviewDecision status = rod::ParseReviewDecision(body["status"].get<std::string>());
  std::string reviewer = "anonymous";
  if (auto it = request.headers.find("x-reviewer"); it != request.headers.end() &&
                                                    !Trim(it->second).empty()) {
    reviewer = Trim(it->second);
  }
  ReviewItem item = store_.Decide(body["item_id"].get<std::string>(), status,
                                  body.value("edited_payload", Json()), reviewer);
  return {200, item.ToJson()};
}

HttpResponse KbService::EmitKb(const HttpRequest &request) {
  std::string path = config_.RunDir() + "/kb.csv";
  if (!Trim(request.body).empty()) {
    Json body = Json::parse(request.body);
    if (body.contains("path")) path = body["path"].get<std::string>();
  }
  const size_t rows = EmitStoreKb(config_, store_, path);
  return {200, Json{{"path", path}, {"rows", rows}}};
}

HttpResponse KbService::Runs() {
  Json runs = Json::array();
  if (fs::exists(config_.runs)) {
    std::vector<fs::path> dirs;
    for (const auto &e : fs::directory_iterator(config_.runs)) {
      if (e.is_directory() && fs::exists(e.path() / "metadata.json")) dirs.push_back(e.path());
    }
    std::sort(dirs.begin(), dirs.end());
    for (const fs::path &d : dirs) {
      Json meta = Json::parse(ReadFile((d / "metadata.json").string()));
      runs.push_back({{"run_id", d.filename().string()},
                      {"stages", meta.value("stages", Json::object())},
                      {"config", meta.value("config", Json::object())}});
    }
  }
  return {200, Json{{"runs", runs}}};
}

bool KbService::Serve(const std::string &host, int port,
                      const std::function<void(int)> &on_listening) {
  httplib::Server server;
  auto adapt = [this](const httplib::Request &req, httplib::Response &res) {
    HttpRequest r;
    r.method = req.method;
    r.path = req.path;
    for (const auto &[k, v] : req.params) r.query[k] = v;
    for (const auto &[k, v] : req.headers) r.headers[Lower(k)] = v;
    r.body = req.body;
    HttpResponse out = Handle(r);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  server.Get(R"(/.*)", adapt);
  server.Post(R"(/.*)", adapt);
  int bound = port;
  if (port == 0) {
    bound = server.bind_to_any_port(host.c_str());
  } else if (!server.bind_to_port(host.c_str(), port)) {
    bound = -1;
  }
  if (bound < 0) return false;
  {
    std::lock_guard<std::mutex> lock(server_mu_);
    server_ = &server;
  }
  if (on_listening) on_listening(bound);
  bool ok = server.listen_after_bind();
  std::lock_guard<std::mutex> lock(server_mu_);
  server_ = nullptr;
  return ok;
}

void KbService::Stop() {
  std::lock_guard<std::mutex> lock(server_mu_);
  if (server_) static_cast<httplib::Server *>(server_)->stop();
}

}  // namespace kbc::service
