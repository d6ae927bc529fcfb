#ifndef KBC_SERVICE_SERVER_H_
#define KBC_SERVICE_SERVER_H_

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "kbc/base/jsonl.h"
#include "kbc/service/config.h"
#include "kbc/service/review.h"

namespace kbc::service {

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lowercase names
  std::string body;
};

struct HttpResponse {
  int status = 200;
  Json body;
};

// The review API over one run:
//   GET  /queue?pmid=&kind=   pending items, highest confidence first
//   GET  /document/{pmid}     sentences, predicted triples, sentence scores
//   POST /decision            {"item_id", "status", "edited_payload"?};
//                             reviewer from the X-Reviewer header
//   POST /emit-kb             {"path"?}; writes the KB CSV
//   GET  /runs                metadata of every run under the runs root
// Errors are {"error": message} with 400 (bad request), 404 (unknown item
// or document) or 409 (item already decided).
class KbService {
 public:
  KbService(PipelineConfig config, Clock clock = UtcNow);

  HttpResponse Handle(const HttpRequest &request);

  // Blocks serving HTTP until Stop(); returns false if the bind fails.
  // Port 0 picks a free port, reported through on_listening.
  bool Serve(const std::string &host, int port,
             const std::function<void(int port)> &on_listening = nullptr);
  void Stop();

 private:
  HttpResponse Queue(const HttpRequest &request);
  HttpResponse Document(const std::string &pmid);
  HttpResponse Decision(const HttpRequest &request);
  HttpResponse EmitKb(const HttpRequest &request);
  HttpResponse Runs();

  PipelineConfig config_;
  ReviewStore store_;
  std::mutex server_mu_;
  void *server_ = nullptr;  // httplib::Server while serving
};

}  // namespace kbc::service

#endif  // KBC_SERVICE_SERVER_H_
