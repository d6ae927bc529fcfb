#include "kbc/rod/rod_csv.h"

#include <algorithm>
#include <charconv>
#include <map>
#include <regex>
#include <set>

#include "kbc/base/csv.h"
#include "kbc/base/errors.h"
#include "kbc/base/strings.h"

namespace kbc::rod {
namespace {

enum Column {
  kPmid, kGene, kCancer, kRace, kOr, kRr, kHr, kMaxAge, kCarriers,
  kAscertainment, kSentId, kModelVersion, kDecision, kExtra
};

bool IsAbsent(const std::string &cell) {
  std::string t = Trim(cell);
  return t.empty() || t == "-";
}

std::optional<Decimal> ParseEstimate(const std::string &cell,
                                     const std::string &name) {
  if (IsAbsent(cell)) return std::nullopt;
  auto d = Decimal::Parse(Trim(cell));
  if (!d || d->value <= 0) {
    throw ConfigError(name + " is not a positive decimal: '" + cell + "'");
  }
  return d;
}

std::optional<int> ParseCount(const std::string &cell, const std::string &name) {
  if (IsAbsent(cell)) return std::nullopt;
  std::string t = Trim(cell);
  int value = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || value < 0) {
    throw ConfigError(name + " is not a non-negative integer: '" + cell + "'");
  }
  return value;
}

std::string OrDash(const std::optional<Decimal> &d) { return d ? d->text : "-"; }
std::string OrDash(const std::optional<int> &v) {
  return v ? std::to_string(*v) : "-";
}

CsvRow RecordCells(const RiskRecord &r) {
  std::string snippets;
  for (size_t i = 0; i < r.ascertainment_snippets.size(); ++i) {
    if (i) snippets.push_back(kSnippetSeparator);
    snippets += r.ascertainment_snippets[i];
  }
  return {r.pmid, r.gene, r.cancer.empty() ? "-" : r.cancer,
          r.race.value_or("-"), OrDash(r.odds_ratio),
          OrDash(r.relative_risk), OrDash(r.hazard_ratio),
          OrDash(r.max_age), OrDash(r.total_carriers),
          snippets.empty() ? "-" : snippets};
}

}  // namespace

std::optional<Decimal> Decimal::Parse(std::string_view s) {
  static const std::regex kDecimal(R"([+-]?[0-9]+(\.[0-9]+)?)");
  if (!std::regex_match(s.begin(), s.end(), kDecimal)) return std::nullopt;
  Decimal d;
  d.text = std::string(s);
  d.value = std::stod(d.text);
  return d;
}

const char *ReviewDecisionName(ReviewDecision d) {
  switch (d) {
    case ReviewDecision::kAccepted: return "accepted";
    case ReviewDecision::kEdited: return "edited";
    case ReviewDecision::kRejected: return "rejected";
    default: return "pending";
  }
}

ReviewDecision ParseReviewDecision(const std::string &name) {
  if (name == "pending") return ReviewDecision::kPending;
  if (name == "accepted") return ReviewDecision::kAccepted;
  if (name == "edited") return ReviewDecision::kEdited;
  if (name == "rejected") return ReviewDecision::kRejected;
  throw ConfigError("unknown reviewer decision '" + name + "'");
}

std::map<std::string, std::vector<std::string>> SnippetsByPmid(
    const std::vector<RiskRecord> &records) {
  std::map<std::string, std::vector<std::string>> out;
  for (const RiskRecord &r : records) {
    auto &list = out[r.pmid];
    for (const std::string &s : r.ascertainment_snippets) {
      if (std::find(list.begin(), list.end(), s) == list.end()) list.push_back(s);
    }
  }
  return out;
}

const std::vector<std::string> &RodColumns() {
  static const std::vector<std::string> kColumns = {
      "PMID", "Gene", "Cancer", "Race", "OR", "RR", "HR",
      "Max Age", "Total Carriers", "Ascertainment"};
  return kColumns;
}

const std::vector<std::string> &ProvenanceColumns() {
  static const std::vector<std::string> kColumns = {
      "Sent ID", "Model Version", "Reviewer Decision"};
  return kColumns;
}

RodTable ParseRod(std::string_view csv, const RodLoadOptions &options) {
  RodTable table;
  std::vector<CsvRow> rows = ParseCsv(csv);
  if (rows.empty()) return table;

  std::map<std::string, Column> known;
  for (size_t i = 0; i < RodColumns().size(); ++i) {
    known[RodColumns()[i]] = static_cast<Column>(i);
  }
  known["Sent ID"] = kSentId;
  known["Model Version"] = kModelVersion;
  known["Reviewer Decision"] = kDecision;

  std::vector<Column> layout;
  std::set<std::string> seen;
  for (const std::string &raw : rows[0]) {
    std::string name = Trim(raw);
    if (!seen.insert(name).second) throw ConfigError("duplicate column '" + name + "'");
    auto it = known.find(name);
    if (it != known.end()) {
      layout.push_back(it->second);
    } else if (options.passthrough_extra_columns) {
      layout.push_back(kExtra);
    } else {
      throw ConfigError("unknown ROD column '" + name + "'");
    }
  }
  for (const char *required : {"PMID", "Gene"}) {
    if (!seen.count(required)) {
      throw ConfigError(std::string("ROD is missing column '") + required + "'");
    }
  }

  for (size_t r = 1; r < rows.size(); ++r) {
    const CsvRow &row = rows[r];
    if (row.size() == 1 && Trim(row[0]).empty()) continue;
    if (row.size() != layout.size()) {
      table.errors.push_back({r, "expected " + std::to_string(layout.size()) +
                                     " cells, found " + std::to_string(row.size())});
      continue;
    }
    RiskRecord rec;
    try {
      for (size_t c = 0; c < row.size(); ++c) {
        const std::string &cell = row[c];
        switch (layout[c]) {
          case kPmid: rec.pmid = Trim(cell); break;
          case kGene: rec.gene = Trim(cell); break;
          case kCancer: rec.cancer = IsAbsent(cell) ? "" : Trim(cell); break;
          case kRace:
            if (!IsAbsent(cell)) rec.race = Trim(cell);
            break;
          case kOr: rec.odds_ratio = ParseEstimate(cell, "OR"); break;
          case kRr: rec.relative_risk = ParseEstimate(cell, "RR"); break;
          case kHr: rec.hazard_ratio = ParseEstimate(cell, "HR"); break;
          case kMaxAge: rec.max_age = ParseCount(cell, "Max Age"); break;
          case kCarriers: rec.total_carriers = ParseCount(cell, "Total Carriers"); break;
          case kAscertainment:
            if (!IsAbsent(cell)) {
              for (std::string &s : Split(cell, kSnippetSeparator)) {
                if (!Trim(s).empty()) rec.ascertainment_snippets.push_back(Trim(s));
              }
            }
            break;
          case kSentId:
          case kModelVersion:
          case kDecision:
          case kExtra:
            rec.extra.emplace_back(Trim(rows[0][c]), cell);
            break;
        }
      }
      if (rec.pmid.empty()) throw ConfigError("empty PMID");
    } catch (const ConfigError &e) {
      table.errors.push_back({r, e.what()});
      continue;
    }
    table.records.push_back(std::move(rec));
  }
  return table;
}

RodTable LoadRod(const std::string &path, const RodLoadOptions &options) {
  return ParseRod(ReadFile(path), options);
}

std::string FormatKb(const std::vector<KBRow> &rows) {
  CsvRow header = RodColumns();
  header.insert(header.end(), ProvenanceColumns().begin(), ProvenanceColumns().end());
  std::string out = FormatCsvRow(header);
  for (const KBRow &row : rows) {
    if (row.decision != ReviewDecision::kAccepted &&
        row.decision != ReviewDecision::kEdited) {
      continue;
    }
    CsvRow cells = RecordCells(row.record);
    cells.push_back(row.sent_id < 0 ? "-" : std::to_string(row.sent_id));
    cells.push_back(row.model_version.empty() ? "-" : row.model_version);
    cells.push_back(ReviewDecisionName(row.decision));
    out += FormatCsvRow(cells);
  }
  return out;
}

std::string FormatRod(const std::vector<RiskRecord> &records) {
  std::string out = FormatCsvRow(RodColumns());
  for (const RiskRecord &r : records) out += FormatCsvRow(RecordCells(r));
  return out;
}

void EmitKb(const std::vector<KBRow> &rows, const std::string &path) {
  try {
    WriteFile(path, FormatKb(rows));
  } catch (const IoError &e) {
    throw IoError("cannot emit KB to " + path + ": " + e.what());
  }
}

}  // namespace kbc::rod
