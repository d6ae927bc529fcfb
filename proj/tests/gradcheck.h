#ifndef KBC_TESTS_GRADCHECK_H_
#define KBC_TESTS_GRADCHECK_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "kbc/base/rng.h"
#include "kbc/nn/param.h"

namespace kbc::testing {

struct GradCheckResult {
  double max_relative_error = 0;
  std::string worst;  // "param[index] numeric=... analytic=..."
  int probes = 0;
  int nontrivial = 0;  // probes where either gradient exceeds 1e-6
};

// Compares the gradients left in `params` (after the caller ran a backward
// pass) with central differences of `loss`. Entries whose analytic and
// numeric values are both near zero and agree to within `abs_floor` count
// as exact: that covers gradients that are zero by symmetry, where the
// relative error is finite-difference noise.
inline GradCheckResult CheckGradients(const nn::ParamList &params,
                                      const std::function<double()> &loss, Rng &rng,
                                      int probes_per_param = 8, double h = 1e-5,
                                      double abs_floor = 1e-8) {
  GradCheckResult r;
  for (nn::Param *p : params) {
    const size_t n = p->value.values().size();
    for (int k = 0; k < probes_per_param; ++k) {
      size_t i = static_cast<size_t>(rng.UniformInt(0, static_cast<int64_t>(n) - 1));
      double &x = p->value.values()[i];
      const double saved = x;
      x = saved + h;
      const double up = loss();
      x = saved - h;
      const double down = loss();
      x = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = p->grad.values()[i];
      const double diff = std::fabs(numeric - analytic);
      const double scale = std::max(std::fabs(numeric), std::fabs(analytic));
      const bool both_zero = scale <= 1e-6 && diff < abs_floor;
      const double rel = both_zero ? 0.0 : diff / (std::fabs(numeric) + std::fabs(analytic));
      ++r.probes;
      if (scale > 1e-6) ++r.nontrivial;
      if (rel > r.max_relative_error) {
        r.max_relative_error = rel;
        r.worst = p->name + "[" + std::to_string(i) + "] numeric=" + std::to_string(numeric) +
                  " analytic=" + std::to_string(analytic);
      }
    }
  }
  return r;
}

}  // namespace kbc::testing

#endif  // KBC_TESTS_GRADCHECK_H_
