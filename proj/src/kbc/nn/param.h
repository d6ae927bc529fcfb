#ifndef KBC_NN_PARAM_H_
#define KBC_NN_PARAM_H_

#include <string>
#include <vector>

#include "kbc/base/rng.h"
#include "kbc/nn/matrix.h"

namespace kbc::nn {

// A trainable tensor with its gradient and Adam moments.
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix m;
  Matrix v;

  Param() = default;
  Param(std::string n, int rows, int cols)
      : name(std::move(n)), value(rows, cols), grad(rows, cols), m(rows, cols),
        v(rows, cols) {}

  void InitNormal(Rng &rng, double stddev) {
    for (double &x : value.values()) x = rng.Normal() * stddev;
  }
};

using ParamList = std::vector<Param *>;

void ZeroGrads(const ParamList &params);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
};

class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // One bias-corrected update with learning rate `lr`; grads are consumed
  // as-is (callers average over the batch).
  void Step(const ParamList &params, double lr);
  long steps() const { return t_; }

 private:
  AdamConfig config_;
  long t_ = 0;
};

// Named snapshot of parameter values, used for best-checkpoint tracking
// and serialization.
struct Snapshot {
  std::vector<std::string> names;
  std::vector<Matrix> values;
};

Snapshot TakeSnapshot(const ParamList &params);
void RestoreSnapshot(const Snapshot &snapshot, const ParamList &params);

// Binary layout per tensor: u32 name length, name bytes, i32 rows, i32 cols,
// rows*cols little-endian doubles.
void SaveParams(const ParamList &params, const std::string &path);
void LoadParams(const ParamList &params, const std::string &path);

bool AllFinite(const ParamList &params);

}  // namespace kbc::nn

#endif  // KBC_NN_PARAM_H_
