#ifndef KBC_ROD_RISK_RECORD_H_
#define KBC_ROD_RISK_RECORD_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kbc::rod {

// A decimal as written in the source; the text is kept verbatim so that
// "6.20" survives a load/emit round trip.
struct Decimal {
  std::string text;
  double value = 0.0;

  // Accepts plain decimal literals only.
  static std::optional<Decimal> Parse(std::string_view s);
  bool operator==(const Decimal &o) const { return text == o.text; }
};

enum class ReviewDecision { kPending, kAccepted, kEdited, kRejected };

const char *ReviewDecisionName(ReviewDecision d);
ReviewDecision ParseReviewDecision(const std::string &name);

struct RiskRecord {
  std::string pmid;
  std::string gene;
  std::string cancer;
  std::optional<std::string> race;
  std::optional<Decimal> odds_ratio;
  std::optional<Decimal> relative_risk;
  std::optional<Decimal> hazard_ratio;
  std::optional<int> max_age;
  std::optional<int> total_carriers;
  std::vector<std::string> ascertainment_snippets;
  // Columns outside the known schema, kept verbatim when pass-through is on.
  std::vector<std::pair<std::string, std::string>> extra;

  bool HasEstimate() const {
    return odds_ratio || relative_risk || hazard_ratio;
  }
  bool operator==(const RiskRecord &) const = default;
};

struct KBRow {
  RiskRecord record;
  int sent_id = -1;
  std::string model_version;
  ReviewDecision decision = ReviewDecision::kPending;
};

// Distinct snippets per pmid in first-seen order.
std::map<std::string, std::vector<std::string>> SnippetsByPmid(
    const std::vector<RiskRecord> &records);

}  // namespace kbc::rod

#endif  // KBC_ROD_RISK_RECORD_H_
