#include "kbc/er/window.h"

#include <algorithm>
#include <cmath>

#include "kbc/base/errors.h"

namespace kbc::er {

void WindowConfig::Validate() const {
  if (length < 10 || length > 15) {
    throw ConfigError("window length must be in [10, 15], got " + std::to_string(length));
  }
  int s = EffectiveStride();
  if (s < 1 || s > length) throw ConfigError("window stride must be in [1, length]");
}

WindowConfig WindowConfig::FromJson(const Json &j) {
  WindowConfig c;
  c.length = j.value("length", c.length);
  c.stride = j.value("stride", 0);
  c.Validate();
  return c;
}

std::vector<SpanWindow> EnumerateSpans(int n_tokens, const WindowConfig &config) {
  config.Validate();
  std::vector<SpanWindow> out;
  if (n_tokens <= 0) return out;
  const int stride = config.EffectiveStride();
  for (int start = 0;; start += stride) {
    int end = std::min(n_tokens, start + config.length);
    out.push_back({start, end});
    if (end == n_tokens) break;
  }
  return out;
}

std::vector<int> OwningWindow(int n_tokens, const std::vector<SpanWindow> &windows) {
  std::vector<int> owner(n_tokens, -1);
  for (int t = 0; t < n_tokens; ++t) {
    double best = 0;
    for (size_t w = 0; w < windows.size(); ++w) {
      if (t < windows[w].start_tok || t >= windows[w].end_tok) continue;
      double centre = 0.5 * (windows[w].start_tok + windows[w].end_tok - 1);
      double d = std::fabs(t - centre);
      if (owner[t] < 0 || d < best) {
        owner[t] = static_cast<int>(w);
        best = d;
      }
    }
  }
  return owner;
}

}  // namespace kbc::er
