#ifndef KBC_NN_WORDPIECE_H_
#define KBC_NN_WORDPIECE_H_

#include <map>
#include <string>
#include <vector>

namespace kbc::nn {

// Uncased subword vocabulary with greedy longest-match-first segmentation.
// Whole words come from a corpus; every observed character is present both
// as a word-initial piece and as a "##" continuation, so any word over the
// observed alphabet segments without [UNK]. Numeric tokens are never stored
// whole: they always decompose into digits, which lets a model treat unseen
// numbers uniformly.
class SubwordVocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;

  SubwordVocab();

  static SubwordVocab Build(const std::vector<std::vector<std::string>> &sentences,
                            int min_count = 1, size_t max_words = 30000);

  int size() const { return static_cast<int>(pieces_.size()); }
  const std::string &piece(int id) const { return pieces_[id]; }
  int Id(const std::string &piece) const;

  std::vector<int> EncodeWord(const std::string &word) const;

  void Save(const std::string &path) const;
  static SubwordVocab Load(const std::string &path);

 private:
  int Add(const std::string &piece);

  std::vector<std::string> pieces_;
  std::map<std::string, int> index_;
};

// Encoder input for a word sequence: [CLS] pieces... [SEP]. word_first[i]
// and word_last[i] are the positions of word i's first and last piece.
struct EncodedWords {
  std::vector<int> ids;
  std::vector<int> word_first;
  std::vector<int> word_last;
};

EncodedWords EncodeWords(const SubwordVocab &vocab,
                         const std::vector<std::string> &words);

}  // namespace kbc::nn

#endif  // KBC_NN_WORDPIECE_H_
