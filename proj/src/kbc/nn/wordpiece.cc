#include "kbc/nn/wordpiece.h"

#include <algorithm>
#include <fstream>
#include <set>

#include "kbc/base/errors.h"
#include "kbc/base/strings.h"
#include "kbc/text/tokenizer.h"

namespace kbc::nn {
namespace {

std::vector<std::string> CodePoints(const std::string &s) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : 4;
    len = std::min(len, s.size() - i);
    out.push_back(s.substr(i, len));
    i += len;
  }
  return out;
}

}  // namespace

SubwordVocab::SubwordVocab() {
  for (const char *s : {"[PAD]", "[UNK]", "[CLS]", "[SEP]"}) Add(s);
  for (char c = '0'; c <= '9'; ++c) {
    Add(std::string(1, c));
    Add("##" + std::string(1, c));
  }
  Add(".");
  Add("##.");
}

int SubwordVocab::Add(const std::string &piece) {
  auto it = index_.find(piece);
  if (it != index_.end()) return it->second;
  int id = static_cast<int>(pieces_.size());
  pieces_.push_back(piece);
  index_[piece] = id;
  return id;
}

int SubwordVocab::Id(const std::string &piece) const {
  auto it = index_.find(piece);
  return it == index_.end() ? kUnk : it->second;
}

SubwordVocab SubwordVocab::Build(
    const std::vector<std::vector<std::string>> &sentences, int min_count,
    size_t max_words) {
  SubwordVocab vocab;
  std::map<std::string, int> counts;
  std::set<std::string> chars;
  for (const auto &sentence : sentences) {
    for (const std::string &raw : sentence) {
      std::string word = ToLower(raw);
      for (const std::string &cp : CodePoints(word)) chars.insert(cp);
      if (!text::IsNumericToken(word)) ++counts[word];
    }
  }
  for (const std::string &c : chars) {
    vocab.Add(c);
    vocab.Add("##" + c);
  }
  std::vector<std::pair<std::string, int>> words(counts.begin(), counts.end());
  std::stable_sort(words.begin(), words.end(), [](const auto &a, const auto &b) {
    return a.second > b.second;
  });
  size_t added = 0;
  for (const auto &[word, count] : words) {
    if (count < min_count || added >= max_words) break;
    vocab.Add(word);
    ++added;
  }
  return vocab;
}

std::vector<int> SubwordVocab::EncodeWord(const std::string &raw) const {
  std::string word = ToLower(raw);
  if (!text::IsNumericToken(word)) {
    auto whole = index_.find(word);
    if (whole != index_.end()) return {whole->second};
  }
  std::vector<std::string> cps = CodePoints(word);
  std::vector<int> ids;
  size_t start = 0;
  while (start < cps.size()) {
    size_t end = cps.size();
    int found = -1;
    while (end > start) {
      std::string piece = start == 0 ? "" : "##";
      for (size_t k = start; k < end; ++k) piece += cps[k];
      if (!(start == 0 && end == cps.size() && text::IsNumericToken(word))) {
        auto it = index_.find(piece);
        if (it != index_.end()) {
          found = it->second;
          break;
        }
      }
      --end;
    }
    if (found < 0) {
      ids.push_back(kUnk);
      end = start + 1;
    } else {
      ids.push_back(found);
    }
    start = end;
  }
  if (ids.empty()) ids.push_back(kUnk);
  return ids;
}

void SubwordVocab::Save(const std::string &path) const {
  std::string out;
  for (const std::string &p : pieces_) out += p + "\n";
  WriteFile(path, out);
}

SubwordVocab SubwordVocab::Load(const std::string &path) {
  SubwordVocab vocab;
  vocab.pieces_.clear();
  vocab.index_.clear();
  for (const std::string &line : Split(ReadFile(path), '\n')) {
    if (!line.empty()) vocab.Add(line);
  }
  if (vocab.size() < 4 || vocab.piece(kCls) != "[CLS]") {
    throw IoError("not a subword vocabulary: " + path);
  }
  return vocab;
}

EncodedWords EncodeWords(const SubwordVocab &vocab,
                         const std::vector<std::string> &words) {
  EncodedWords out;
  out.ids.push_back(SubwordVocab::kCls);
  for (const std::string &w : words) {
    std::vector<int> pieces = vocab.EncodeWord(w);
    out.word_first.push_back(static_cast<int>(out.ids.size()));
    out.ids.insert(out.ids.end(), pieces.begin(), pieces.end());
    out.word_last.push_back(static_cast<int>(out.ids.size()) - 1);
  }
  out.ids.push_back(SubwordVocab::kSep);
  return out;
}

}  // namespace kbc::nn
