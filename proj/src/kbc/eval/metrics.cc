#include "kbc/eval/metrics.h"

#include <cmath>
#include <limits>

#include "kbc/base/errors.h"

namespace kbc::eval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Json NumberOrNull(double x) { return std::isnan(x) ? Json(nullptr) : Json(x); }

}  // namespace

Json Metrics::ToJson() const {
  return Json{{"f1", NumberOrNull(f1)},
              {"precision", NumberOrNull(precision)},
              {"recall", NumberOrNull(recall)},
              {"accuracy", NumberOrNull(accuracy)},
              {"mcc", NumberOrNull(mcc)},
              {"counts",
               {{"tp", counts.tp}, {"fp", counts.fp}, {"fn", counts.fn}, {"tn", counts.tn}}},
              {"flags", flags}};
}

ConfusionCounts CountBinary(std::span<const int> preds, std::span<const int> golds) {
  if (preds.size() != golds.size()) {
    throw ConfigError("prediction/gold length mismatch: " + std::to_string(preds.size()) +
                      " vs " + std::to_string(golds.size()));
  }
  ConfusionCounts c;
  for (size_t i = 0; i < preds.size(); ++i) {
    bool p = preds[i] != 0, g = golds[i] != 0;
    if (p && g) ++c.tp;
    else if (p) ++c.fp;
    else if (g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

Metrics ComputeMetrics(const ConfusionCounts &c) {
  if (c.tp < 0 || c.fp < 0 || c.fn < 0 || c.tn < 0) {
    throw ConfigError("negative confusion count");
  }
  Metrics m;
  m.counts = c;
  const double tp = c.tp, fp = c.fp, fn = c.fn, tn = c.tn;

  if (c.tp + c.fp == 0) {
    m.precision = kNaN;
    m.flags.push_back("precision_undefined");
  } else {
    m.precision = tp / (tp + fp);
  }
  if (c.tp + c.fn == 0) {
    m.recall = kNaN;
    m.flags.push_back("recall_undefined");
  } else {
    m.recall = tp / (tp + fn);
  }
  if (std::isnan(m.precision) || std::isnan(m.recall)) {
    m.f1 = kNaN;
    m.flags.push_back("f1_undefined");
  } else {
    // Equals 2pr/(p+r), and stays defined (0) when p = r = 0.
    m.f1 = 2 * tp / (2 * tp + fp + fn);
  }
  if (c.total() == 0) {
    m.accuracy = kNaN;
    m.flags.push_back("accuracy_undefined");
  } else {
    m.accuracy = (tp + tn) / (tp + fp + fn + tn);
  }
  double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (denom == 0) {
    m.mcc = kNaN;
    m.flags.push_back("mcc_undefined");
  } else {
    m.mcc = (tp * tn - fp * fn) / std::sqrt(denom);
  }
  return m;
}

Metrics ComputeMetrics(std::span<const int> preds, std::span<const int> golds) {
  return ComputeMetrics(CountBinary(preds, golds));
}

double F1FromPrecisionRecall(double p, double r) {
  if (p + r == 0) return 0.0;
  return 2 * p * r / (p + r);
}

}  // namespace kbc::eval
