#ifndef KBC_TESTS_FIXTURES_H_
#define KBC_TESTS_FIXTURES_H_

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kbc/er/example.h"
#include "kbc/text/tokenizer.h"

namespace kbc::testing {

inline const char *kTable2Text =
    "These included CDKN2A, with mutations in 0.30% of cases and 0.02% of controls "
    "(OR, 12.33; 95% CI, 5.43-25.61); TP53, with mutations in 0.20% of cases and "
    "0.02% of controls (OR, 6.70; 95% CI, 2.52-14.95); MLH1, with mutations in 0.13% "
    "of cases and 0.02% of controls (OR, 6.66; 95% CI, 1.94-17.53); BRCA2, with "
    "mutations in 1.90% of cases and 0.30% of controls (OR, 6.20; 95% CI, 4.62- "
    "8.17); ATM, with mutations in 2.30% of cases and 0.37% of controls (OR, 5.71; "
    "95% CI, 4.38-7.33);";

// Index of the first token equal to `word`.
inline int TokenIndex(const er::ERExample &ex, const std::string &word) {
  for (size_t i = 0; i < ex.tokens.size(); ++i) {
    if (ex.tokens[i].token == word) return static_cast<int>(i);
  }
  throw std::runtime_error("no token " + word);
}

// Builds a gold example from single-token entities and (gene, estimate,
// positive) relations.
inline er::ERExample MakeExample(
    const std::string &text, const std::vector<std::string> &genes,
    const std::vector<std::string> &estimates,
    const std::vector<std::tuple<std::string, std::string, bool>> &relations,
    const std::string &pmid = "29922827", int sent_id = 0) {
  er::ERExample ex;
  ex.pmid = pmid;
  ex.sent_id = sent_id;
  ex.text = text;
  ex.tokens = text::Tokenize(text);
  auto add = [&](const std::string &w, er::EntityType type) {
    int i = TokenIndex(ex, w);
    ex.entities.push_back({i, i + 1, type});
  };
  for (const auto &g : genes) add(g, er::EntityType::kGermlineMutation);
  for (const auto &e : estimates) add(e, er::EntityType::kRiskEstimate);
  auto entity = [&](const std::string &w) {
    for (size_t k = 0; k < ex.entities.size(); ++k) {
      if (ex.Surface(ex.entities[k]) == w) return static_cast<int>(k);
    }
    throw std::runtime_error("no entity " + w);
  };
  for (const auto &[g, e, pos] : relations) {
    ex.relations.push_back({entity(g), entity(e),
                            pos ? er::Polarity::kPositive : er::Polarity::kNegative});
  }
  er::Validate(ex);
  return ex;
}

// The Table-2 snippet with its six listed targets.
inline er::ERExample Table2Example() {
  return MakeExample(kTable2Text, {"CDKN2A", "TP53", "MLH1", "BRCA2"},
                     {"12.33", "6.70", "6.66", "6.20", "4.62"},
                     {{"CDKN2A", "12.33", true},
                      {"TP53", "6.70", true},
                      {"MLH1", "6.66", true},
                      {"BRCA2", "6.20", true},
                      {"BRCA2", "4.62", false},
                      {"CDKN2A", "6.70", false}});
}

}  // namespace kbc::testing

#endif  // KBC_TESTS_FIXTURES_H_
