#ifndef KBC_EVAL_METRICS_H_
#define KBC_EVAL_METRICS_H_

#include <span>
#include <string>
#include <vector>

#include "kbc/base/jsonl.h"

namespace kbc::eval {

struct ConfusionCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long tn = 0;

  long total() const { return tp + fp + fn + tn; }
  ConfusionCounts &operator+=(const ConfusionCounts &o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
};

// A metric whose denominator is zero is NaN and named in `flags`
// ("precision_undefined", ...); it is never reported as 0.
struct Metrics {
  double f1 = 0;
  double precision = 0;
  double recall = 0;
  double accuracy = 0;
  double mcc = 0;
  std::vector<std::string> flags;
  ConfusionCounts counts;

  Json ToJson() const;
};

// Counts for binary labels (nonzero = positive). Throws ConfigError on
// length mismatch.
ConfusionCounts CountBinary(std::span<const int> preds, std::span<const int> golds);

Metrics ComputeMetrics(const ConfusionCounts &c);
Metrics ComputeMetrics(std::span<const int> preds, std::span<const int> golds);

// Harmonic mean 2pr/(p+r).
double F1FromPrecisionRecall(double p, double r);

}  // namespace kbc::eval

#endif  // KBC_EVAL_METRICS_H_
