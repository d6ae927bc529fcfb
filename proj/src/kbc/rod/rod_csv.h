#ifndef KBC_ROD_ROD_CSV_H_
#define KBC_ROD_ROD_CSV_H_

#include <string>
#include <string_view>
#include <vector>

#include "kbc/rod/risk_record.h"

namespace kbc::rod {

// Table column order, shared by the ROD and the emitted KB.
const std::vector<std::string> &RodColumns();
// Provenance columns appended after RodColumns() in KB files.
const std::vector<std::string> &ProvenanceColumns();

// Separates ascertainment snippets inside one CSV field.
inline constexpr char kSnippetSeparator = '\x1e';

struct RowError {
  size_t line = 0;  // 1-based data row
  std::string message;
};

struct RodTable {
  std::vector<RiskRecord> records;
  std::vector<RowError> errors;
};

struct RodLoadOptions {
  // When false an unrecognised column header is fatal.
  bool passthrough_extra_columns = false;
};

// "-" and empty cells load as absent. A non-numeric OR/RR/HR (or age,
// carrier count) cell drops that row and records a RowError. An unknown
// column throws ConfigError unless pass-through is enabled.
RodTable ParseRod(std::string_view csv, const RodLoadOptions &options = {});
RodTable LoadRod(const std::string &path, const RodLoadOptions &options = {});

// Writes accepted and edited rows only, Table columns first, then
// provenance. Absent values are written as "-". Throws IoError naming the
// path on failure.
std::string FormatKb(const std::vector<KBRow> &rows);
// ROD layout: Table columns only, every record written.
std::string FormatRod(const std::vector<RiskRecord> &records);
void EmitKb(const std::vector<KBRow> &rows, const std::string &path);

}  // namespace kbc::rod

#endif  // KBC_ROD_ROD_CSV_H_
