#ifndef KBC_ER_WINDOW_H_
#define KBC_ER_WINDOW_H_

#include <vector>

#include "kbc/base/jsonl.h"

namespace kbc::er {

// Token range [start_tok, end_tok) of a sentence.
struct SpanWindow {
  int start_tok = 0;
  int end_tok = 0;

  int length() const { return end_tok - start_tok; }
  bool Contains(int start, int end) const { return start >= start_tok && end <= end_tok; }
  bool operator==(const SpanWindow &) const = default;
};

struct WindowConfig {
  int length = 12;
  int stride = 0;  // 0 means length / 2

  int EffectiveStride() const { return stride > 0 ? stride : length / 2; }
  // Throws ConfigError unless 10 <= length <= 15 and 1 <= stride <= length.
  void Validate() const;

  Json ToJson() const { return {{"length", length}, {"stride", EffectiveStride()}}; }
  static WindowConfig FromJson(const Json &j);
};

// Windows start at 0, stride, 2*stride, ... and the last one is clipped at
// the sentence end; together they cover every token. An empty sentence has
// no windows.
std::vector<SpanWindow> EnumerateSpans(int n_tokens, const WindowConfig &config);

// For each token, the index of the window whose centre is nearest (earlier
// window on ties); that window's predictions are used for the token.
std::vector<int> OwningWindow(int n_tokens, const std::vector<SpanWindow> &windows);

}  // namespace kbc::er

#endif  // KBC_ER_WINDOW_H_
