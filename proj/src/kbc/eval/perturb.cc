#include "kbc/eval/perturb.h"

#include "kbc/base/errors.h"
#include "kbc/base/rng.h"
#include "kbc/text/tokenizer.h"

namespace kbc::eval {

const char *PerturbationName(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::kScaleUp: return "A";
    case PerturbationKind::kScaleDown: return "B";
    case PerturbationKind::kReplaceNonNumeric: return "C";
  }
  return "?";
}

PerturbationKind ParsePerturbation(const std::string &name) {
  if (name == "A" || name == "scale_up") return PerturbationKind::kScaleUp;
  if (name == "B" || name == "scale_down") return PerturbationKind::kScaleDown;
  if (name == "C" || name == "replace_non_numeric") return PerturbationKind::kReplaceNonNumeric;
  throw ConfigError("unknown perturbation '" + name + "'");
}

std::string ShiftDecimal(std::string_view literal, int places) {
  if (!text::IsNumericToken(literal)) {
    throw ConfigError("not a decimal literal: '" + std::string(literal) + "'");
  }
  std::string sign;
  if (literal[0] == '+' || literal[0] == '-') {
    if (literal[0] == '-') sign = "-";
    literal.remove_prefix(1);
  }
  size_t dot = literal.find('.');
  std::string digits(literal.substr(0, dot));
  long point = static_cast<long>(digits.size());
  if (dot != std::string_view::npos) digits += literal.substr(dot + 1);

  point += places;
  if (point <= 0) {
    digits.insert(0, static_cast<size_t>(1 - point), '0');
    point = 1;
  } else if (point > static_cast<long>(digits.size())) {
    digits.append(static_cast<size_t>(point) - digits.size(), '0');
  }
  std::string whole = digits.substr(0, point);
  std::string frac = digits.substr(point);

  size_t nz = whole.find_first_not_of('0');
  whole = nz == std::string::npos ? "0" : whole.substr(nz);
  size_t last = frac.find_last_not_of('0');
  frac = last == std::string::npos ? "" : frac.substr(0, last + 1);

  if (whole == "0" && frac.empty()) sign.clear();
  return sign + whole + (frac.empty() ? "" : "." + frac);
}

namespace {

std::string RandomLetters(Rng &rng) {
  std::string s;
  for (int i = 0; i < 3; ++i) s += static_cast<char>('A' + rng.UniformInt(0, 25));
  return s;
}

}  // namespace

er::ERExample Perturb(const er::ERExample &ex, const PerturbationTask &task) {
  std::vector<std::string> replacement(ex.tokens.size());
  if (task.kind == PerturbationKind::kReplaceNonNumeric) {
    Rng rng(Fingerprint(ex.pmid + ":" + std::to_string(ex.sent_id), task.seed));
    for (const er::EntitySpan &e : ex.entities) {
      if (e.type != er::EntityType::kRiskEstimate) continue;
      // The whole span collapses to its first token's replacement; the
      // others are emptied and dropped below.
      replacement[e.start_tok] = RandomLetters(rng);
      for (int i = e.start_tok + 1; i < e.end_tok; ++i) replacement[i] = "\x01";
    }
  } else {
    int places = task.kind == PerturbationKind::kScaleUp ? 3 : -3;
    for (size_t i = 0; i < ex.tokens.size(); ++i) {
      if (ex.tokens[i].is_numeric) replacement[i] = ShiftDecimal(ex.tokens[i].token, places);
    }
  }

  // Rebuild the text, tracking which new token index each old one maps to.
  er::ERExample out = ex;
  out.text.clear();
  size_t cursor = 0;
  std::vector<int> new_index(ex.tokens.size() + 1, 0);
  int next = 0;
  for (size_t i = 0; i < ex.tokens.size(); ++i) {
    const text::TokenSpan &t = ex.tokens[i];
    out.text += ex.text.substr(cursor, t.start - cursor);
    new_index[i] = next;
    if (replacement[i] == "\x01") {
      // Merged into the previous replacement: drop the token and the
      // whitespace before it.
      while (!out.text.empty() && out.text.back() == ' ') out.text.pop_back();
    } else {
      out.text += replacement[i].empty() ? t.token : replacement[i];
      ++next;
    }
    cursor = t.end;
  }
  out.text += ex.text.substr(cursor);
  new_index[ex.tokens.size()] = next;

  out.tokens = text::Tokenize(out.text);
  if (static_cast<int>(out.tokens.size()) != next) {
    throw Error("perturbation changed tokenization of " + ex.pmid + ":" +
                std::to_string(ex.sent_id));
  }
  for (er::EntitySpan &e : out.entities) {
    e.start_tok = new_index[e.start_tok];
    e.end_tok = new_index[e.end_tok];
  }
  er::Validate(out);
  return out;
}

std::vector<er::ERExample> Perturb(const std::vector<er::ERExample> &examples,
                                   const PerturbationTask &task) {
  std::vector<er::ERExample> out;
  out.reserve(examples.size());
  for (const auto &ex : examples) out.push_back(Perturb(ex, task));
  return out;
}

}  // namespace kbc::eval
