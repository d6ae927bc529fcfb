#ifndef KBC_SERVICE_REVIEW_H_
#define KBC_SERVICE_REVIEW_H_

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "kbc/base/errors.h"
#include "kbc/base/jsonl.h"
#include "kbc/rod/risk_record.h"

namespace kbc::service {

enum class ItemKind { kRiskTriple, kAscertainmentSentence };

const char *ItemKindName(ItemKind k);
ItemKind ParseItemKind(const std::string &name);

// One model output awaiting a human decision. payload carries the
// prediction (for triples: pmid, sent_id, gene, estimate, metric, ...;
// for sentences: pmid, sent_id, text, score).
struct ReviewItem {
  std::string item_id;
  ItemKind kind = ItemKind::kRiskTriple;
  std::string pmid;
  int sent_id = 0;
  double confidence = 0;
  std::string model_version;
  Json payload;

  rod::ReviewDecision status = rod::ReviewDecision::kPending;
  Json edited_payload;  // null unless edited
  std::string reviewer;
  std::string decided_at;

  Json ToJson() const;
  // The decision-free part, as stored in items.jsonl.
  static ReviewItem FromJson(const Json &j);
};

class NotFound : public Error {
 public:
  using Error::Error;
};

// A decision on an item that is no longer pending.
class Conflict : public Error {
 public:
  using Error::Error;
};

// Returns an ISO-8601 UTC timestamp; injectable for tests.
using Clock = std::function<std::string()>;
std::string UtcNow();

// Review state of one run directory: review/items.jsonl holds the
// predictions, review/decisions.jsonl is an append-only log of
// {seq, item_id, status, edited_payload, reviewer, timestamp}. Opening the
// store replays the log, so the queue can always be reconstructed from
// disk. Thread safe.
class ReviewStore {
 public:
  // Loads items and replays decisions. Decisions naming an unknown item
  // (e.g. after predictions were regenerated) are skipped with a warning;
  // a second decision on one item is a corrupt log and throws ParseError.
  static ReviewStore Open(const std::string &review_dir, Clock clock = UtcNow);

  // Replaces items.jsonl; the decision log is left untouched.
  static void WriteItems(const std::string &review_dir, const std::vector<ReviewItem> &items);

  ReviewStore(ReviewStore &&other) noexcept;

  // Pending items, highest confidence first (ties by item id).
  std::vector<ReviewItem> Queue(const std::optional<std::string> &pmid,
                                const std::optional<ItemKind> &kind) const;
  std::vector<ReviewItem> Items() const;
  std::optional<ReviewItem> Find(const std::string &item_id) const;

  // Records a decision and appends it to the log before returning. Throws
  // NotFound, Conflict (item already decided), or ConfigError for a
  // pending status or an invalid edited payload.
  ReviewItem Decide(const std::string &item_id, rod::ReviewDecision status,
                    const Json &edited_payload, const std::string &reviewer);

  // Accepted and edited triples as KB rows. Cancer and race come from the
  // edited payload when present, else from the ROD row for the same pmid
  // and gene, else the first ROD row of the pmid. Ascertainment snippets
  // are the accepted sentences of the same pmid.
  std::vector<rod::KBRow> KbRows(const std::vector<rod::RiskRecord> &rod) const;

  const std::vector<std::string> &warnings() const { return warnings_; }

 private:
  ReviewStore(std::string dir, Clock clock) : dir_(std::move(dir)), clock_(std::move(clock)) {}
  void Apply(ReviewItem &item, rod::ReviewDecision status, const Json &edited,
             const std::string &reviewer, const std::string &timestamp);

  std::string dir_;
  Clock clock_;
  mutable std::mutex mu_;
  std::vector<ReviewItem> items_;
  std::map<std::string, size_t> index_;
  int next_seq_ = 0;
  std::vector<std::string> warnings_;
};

}  // namespace kbc::service

#endif  // KBC_SERVICE_REVIEW_H_
