#ifndef KBC_EVAL_PERTURB_H_
#define KBC_EVAL_PERTURB_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kbc/er/example.h"

namespace kbc::eval {

enum class PerturbationKind {
  kScaleUp,            // A: every numeric token x 10^3
  kScaleDown,          // B: every numeric token / 10^3
  kReplaceNonNumeric,  // C: gold risk estimates -> random letter strings
};

const char *PerturbationName(PerturbationKind kind);
PerturbationKind ParsePerturbation(const std::string &name);

struct PerturbationTask {
  PerturbationKind kind = PerturbationKind::kScaleUp;
  uint64_t seed = 0;  // only C samples
};

// Moves the decimal point of a decimal literal `places` to the right
// (negative: left) and normalizes the result: no redundant leading or
// trailing zeros, no trailing point. "12.33",3 -> "12330";
// "12.33",-3 -> "0.01233". Throws ConfigError on a non-numeric input.
std::string ShiftDecimal(std::string_view literal, int places);

// Rewrites the sentence text, re-tokenizes and keeps entity/relation
// indices. A and B preserve the token count; C preserves entity count
// and relation arity.
er::ERExample Perturb(const er::ERExample &ex, const PerturbationTask &task);
std::vector<er::ERExample> Perturb(const std::vector<er::ERExample> &examples,
                                   const PerturbationTask &task);

}  // namespace kbc::eval

#endif  // KBC_EVAL_PERTURB_H_
