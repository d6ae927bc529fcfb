#include "kbc/service/review.h"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "kbc/base/strings.h"

namespace kbc::service {

namespace {

constexpr char kItems[] = "/items.jsonl";
constexpr char kDecisions[] = "/decisions.jsonl";

using rod::ReviewDecision;

void ValidateEdit(const ReviewItem &item, const Json &edited) {
  if (!edited.is_object() || edited.empty()) {
    throw ConfigError("an edited decision needs a non-empty edited_payload object");
  }
  if (item.kind == ItemKind::kAscertainmentSentence) {
    for (auto it = edited.begin(); it != edited.end(); ++it) {
      if (it.key() != "text") throw ConfigError("cannot edit field '" + it.key() + "'");
      if (!it.value().is_string()) throw ConfigError("'text' must be a string");
    }
    return;
  }
  static const char *kEditable[] = {"gene", "estimate", "metric", "cancer", "race"};
  for (auto it = edited.begin(); it != edited.end(); ++it) {
    if (std::find_if(std::begin(kEditable), std::end(kEditable),
                     [&](const char *k) { return it.key() == k; }) == std::end(kEditable)) {
      throw ConfigError("cannot edit field '" + it.key() + "'");
    }
    if (!it.value().is_string()) throw ConfigError("'" + it.key() + "' must be a string");
  }
  if (edited.contains("estimate") &&
      !rod::Decimal::Parse(edited["estimate"].get<std::string>())) {
    throw ConfigError("edited estimate is not a decimal");
  }
  if (edited.contains("metric")) {
    std::string m = edited["metric"].get<std::string>();
    if (m != "OR" && m != "RR" && m != "HR") throw ConfigError("metric must be OR, RR or HR");
  }
  if (edited.contains("gene") && Trim(edited["gene"].get<std::string>()).empty()) {
    throw ConfigError("edited gene is empty");
  }
}

// Payload with edits applied.
Json Effective(const ReviewItem &item) {
  Json p = item.payload;
  if (item.edited_payload.is_object()) {
    for (auto it = item.edited_payload.begin(); it != item.edited_payload.end(); ++it) {
      p[it.key()] = it.value();
    }
  }
  return p;
}

std::string Str(const Json &j, const char *key) {
  return j.contains(key) && j[key].is_string() ? j[key].get<std::string>() : "";
}

}  // namespace

const char *ItemKindName(ItemKind k) {
  return k == ItemKind::kRiskTriple ? "risk_triple" : "ascertainment_sentence";
}

ItemKind ParseItemKind(const std::string &name) {
  if (name == "risk_triple") return ItemKind::kRiskTriple;
  if (name == "ascertainment_sentence") return ItemKind::kAscertainmentSentence;
  throw ConfigError("unknown item kind '" + name + "'");
}

std::string UtcNow() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json ReviewItem::ToJson() const {
  Json j{{"item_id", item_id},
         {"kind", ItemKindName(kind)},
         {"pmid", pmid},
         {"sent_id", sent_id},
         {"confidence", confidence},
         {"model_version", model_version},
         {"payload", payload},
         {"status", rod::ReviewDecisionName(status)}};
  if (status != ReviewDecision::kPending) {
    j["edited_payload"] = edited_payload;
    j["reviewer"] = reviewer;
    j["decided_at"] = decided_at;
  }
  return j;
}

ReviewItem ReviewItem::FromJson(const Json &j) {
  ReviewItem item;
  item.item_id = j.at("item_id").get<std::string>();
  item.kind = ParseItemKind(j.at("kind").get<std::string>());
  item.pmid = j.at("pmid").get<std::string>();
  item.sent_id = j.at("sent_id").get<int>();
  item.confidence = j.at("confidence").get<double>();
  item.model_version = j.value("model_version", "");
  item.payload = j.value("payload", Json::object());
  return item;
}

ReviewStore::ReviewStore(ReviewStore &&other) noexcept
    : dir_(std::move(other.dir_)),
      clock_(std::move(other.clock_)),
      items_(std::move(other.items_)),
      index_(std::move(other.index_)),
      next_seq_(other.next_seq_),
      warnings_(std::move(other.warnings_)) {}

void ReviewStore::WriteItems(const std::string &review_dir,
                             const std::vector<ReviewItem> &items) {
  std::vector<Json> rows;
  rows.reserve(items.size());
  for (const ReviewItem &item : items) {
    Json j = item.ToJson();
    j.erase("status");
    rows.push_back(std::move(j));
  }
  WriteJsonl(review_dir + kItems, rows);
}

ReviewStore ReviewStore::Open(const std::string &review_dir, Clock clock) {
  ReviewStore store(review_dir, std::move(clock));
  const std::string items_path = review_dir + kItems;
  if (!std::filesystem::exists(items_path)) {
    throw ConfigError("no review items at " + items_path + "; run predict first");
  }
  for (const Json &j : ReadJsonl(items_path)) {
    ReviewItem item = ReviewItem::FromJson(j);
    if (store.index_.count(item.item_id)) {
      throw ParseError("duplicate review item " + item.item_id, 0);
    }
    store.index_[item.item_id] = store.items_.size();
    store.items_.push_back(std::move(item));
  }
  const std::string log_path = review_dir + kDecisions;
  if (std::filesystem::exists(log_path)) {
    for (const Json &d : ReadJsonl(log_path)) {
      store.next_seq_ = std::max(store.next_seq_, d.value("seq", 0) + 1);
      const std::string id = d.at("item_id").get<std::string>();
      auto it = store.index_.find(id);
      if (it == store.index_.end()) {
        store.warnings_.push_back("decision for unknown item " + id + " skipped");
        continue;
      }
      ReviewItem &item = store.items_[it->second];
      if (item.status != ReviewDecision::kPending) {
        throw ParseError("decision log has two decisions for " + id, 0);
      }
      store.Apply(item, rod::ParseReviewDecision(d.at("status").get<std::string>()),
                  d.value("edited_payload", Json()), d.value("reviewer", ""),
                  d.value("timestamp", ""));
    }
  }
  return store;
}

void ReviewStore::Apply(ReviewItem &item, ReviewDecision status, const Json &edited,
                        const std::string &reviewer, const std::string &timestamp) {
  item.status = status;
  item.edited_payload = status == ReviewDecision::kEdited ? edited : Json();
  item.reviewer = reviewer;
  item.decided_at = timestamp;
}

std::vector<ReviewItem> ReviewStore::Queue(const std::optional<std::string> &pmid,
                                           const std::optional<ItemKind> &kind) const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<ReviewItem> out;
  for (const ReviewItem &item : items_) {
    if (item.status != ReviewDecision::kPending) continue;
    if (pmid && item.pmid != *pmid) continue;
    if (kind && item.kind != *kind) continue;
    out.push_back(item);
  }
  std::stable_sort(out.begin(), out.end(), [](const ReviewItem &a, const ReviewItem &b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return a.item_id < b.item_id;
  });
  return out;
}

std::vector<ReviewItem> ReviewStore::Items() const {
  std::lock_guard<std::mutex> lock(mu_);
  return items_;
}

std::optional<ReviewItem> ReviewStore::Find(const std::string &item_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = index_.find(item_id);
  if (it == index_.end()) return std::nullopt;
  return items_[it->second];
}

ReviewItem ReviewStore::Decide(const std::string &item_id, ReviewDecision status,
                               const Json &edited_payload, const std::string &reviewer) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = index_.find(item_id);
  if (it == index_.end()) throw NotFound("no review item " + item_id);
  ReviewItem &item = items_[it->second];
  if (status == ReviewDecision::kPending) throw ConfigError("a decision cannot be 'pending'");
  if (item.status != ReviewDecision::kPending) {
    throw Conflict("item " + item_id + " is already " + rod::ReviewDecisionName(item.status));
  }
  if (status == ReviewDecision::kEdited) {
    ValidateEdit(item, edited_payload);
  } else if (!edited_payload.is_null()) {
    throw ConfigError("edited_payload is only allowed with status 'edited'");
  }
  const std::string timestamp = clock_();
  Json line{{"seq", next_seq_},
            {"item_id", item_id},
            {"status", rod::ReviewDecisionName(status)},
            {"edited_payload", status == ReviewDecision::kEdited ? edited_payload : Json()},
            {"reviewer", reviewer},
            {"timestamp", timestamp}};
  std::filesystem::create_directories(dir_);
  std::ofstream out(dir_ + kDecisions, std::ios::app | std::ios::binary);
  out << line.dump() << '\n';
  out.flush();
  if (!out) throw IoError("cannot append to " + dir_ + kDecisions);
  ++next_seq_;
  Apply(item, status, edited_payload, reviewer, timestamp);
  return item;
}

std::vector<rod::KBRow> ReviewStore::KbRows(const std::vector<rod::RiskRecord> &rod) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto accepted = [](const ReviewItem &i) {
    return i.status == ReviewDecision::kAccepted || i.status == ReviewDecision::kEdited;
  };
  std::map<std::string, std::vector<std::string>> snippets;
  for (const ReviewItem &item : items_) {
    if (item.kind != ItemKind::kAscertainmentSentence || !accepted(item)) continue;
    snippets[item.pmid].push_back(Str(Effective(item), "text"));
  }
  std::vector<rod::KBRow> rows;
  for (const ReviewItem &item : items_) {
    if (item.kind != ItemKind::kRiskTriple || !accepted(item)) continue;
    const Json p = Effective(item);
    rod::RiskRecord r;
    r.pmid = item.pmid;
    r.gene = Str(p, "gene");
    const rod::RiskRecord *match = nullptr;
    for (const rod::RiskRecord &rec : rod) {
      if (rec.pmid != r.pmid) continue;
      if (rec.gene == r.gene) {
        match = &rec;
        break;
      }
      if (!match) match = &rec;
    }
    r.cancer = p.contains("cancer") ? Str(p, "cancer") : (match ? match->cancer : "");
    if (p.contains("race")) {
      r.race = Str(p, "race");
    } else if (match) {
      r.race = match->race;
    }
    std::optional<rod::Decimal> estimate = rod::Decimal::Parse(Str(p, "estimate"));
    const std::string metric = Str(p, "metric");
    if (metric == "RR") {
      r.relative_risk = estimate;
    } else if (metric == "HR") {
      r.hazard_ratio = estimate;
    } else {
      r.odds_ratio = estimate;
    }
    if (auto s = snippets.find(r.pmid); s != snippets.end()) r.ascertainment_snippets = s->second;
    rod::KBRow row;
    row.record = std::move(r);
    row.sent_id = item.sent_id;
    row.model_version = item.model_version;
    row.decision = item.status;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace kbc::service
