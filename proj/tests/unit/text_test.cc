#include <set>

#include "doctest.h"
#include "kbc/base/errors.h"
#include "kbc/base/rng.h"
#include "kbc/base/strings.h"
#include "kbc/text/corpus_io.h"
#include "kbc/text/parse.h"
#include "kbc/text/segmenter.h"
#include "kbc/text/tokenizer.h"
#include "../test_util.h"

using namespace kbc;
using namespace kbc::text;

namespace {

const char *kTei = R"(<?xml version="1.0" encoding="UTF-8"?>
<TEI xmlns="http://www.tei-c.org/ns/1.0">
<teiHeader><fileDesc><titleStmt><title>Risk paper</title></titleStmt></fileDesc>
<profileDesc><abstract><div><p>We studied carriers. Risk was high.</p></div></abstract></profileDesc>
</teiHeader>
<text><body>
<div><head>Methods</head><p>Cases were enrolled from the registry.</p>
<figure type="table"><head>Table 2</head><table><row><cell>OR 99.9</cell></row></table></figure>
<p>Controls were matched on age.</p></div>
<div><head>Results</head><p>BRCA2 carriers had elevated risk (OR, 6.20; 95% CI, 4.62-8.17).</p></div>
</body></text></TEI>)";

void CheckOffsets(const std::string &text, const std::vector<TokenSpan> &spans) {
  size_t prev_end = 0;
  for (const TokenSpan &t : spans) {
    REQUIRE(t.start < t.end);
    REQUIRE(t.end <= text.size());
    REQUIRE(t.start >= prev_end);
    REQUIRE(text.substr(t.start, t.end - t.start) == t.token);
    prev_end = t.end;
  }
}

}  // namespace

TEST_CASE("minimal XML with one body paragraph") {
  Document doc = ParseDocument(
      "<TEI><text><body><p>Cases were enrolled.</p></body></text></TEI>",
      SourceFormat::kXml, "1");
  REQUIRE(doc.sections.size() == 1);
  CHECK(doc.sections[0].text == "Cases were enrolled.");
  CHECK_FALSE(doc.sections[0].excluded);
}

TEST_CASE("abstract is flagged excluded and tables are dropped") {
  Document doc = ParseDocument(kTei, SourceFormat::kXml, "29922827");
  REQUIRE(doc.sections.size() == 3);
  CHECK(doc.sections[0].excluded);
  CHECK(doc.sections[0].text == "We studied carriers. Risk was high.");
  CHECK(doc.sections[1].title == "Methods");
  CHECK(doc.sections[1].text ==
        "Cases were enrolled from the registry.\n\nControls were matched on age.");
  CHECK(doc.sections[2].title == "Results");
  for (const Section &s : doc.sections) {
    CHECK(s.text.find("99.9") == std::string::npos);
    CHECK(s.title != "Table 2");
  }
}

TEST_CASE("a section headed Abstract is excluded") {
  Document doc = ParseDocument(
      "<TEI><body><div><head>Abstract</head><p>Summary here.</p></div>"
      "<div><head>Intro</head><p>Body text.</p></div></body></TEI>",
      SourceFormat::kXml, "7");
  REQUIRE(doc.sections.size() == 2);
  CHECK(doc.sections[0].excluded);
  CHECK_FALSE(doc.sections[1].excluded);
}

TEST_CASE("nested sections keep reading order") {
  Document doc = ParseDocument(
      "<body><div><head>A</head><p>one.</p><div><head>B</head><p>two.</p></div>"
      "<p>three.</p></div></body>",
      SourceFormat::kXml, "9");
  REQUIRE(doc.sections.size() == 3);
  CHECK(doc.sections[0].text == "one.");
  CHECK(doc.sections[1].text == "two.");
  CHECK(doc.sections[2].title == "A");
  CHECK(doc.sections[2].text == "three.");
}

TEST_CASE("malformed XML reports a byte offset") {
  std::string raw = "<TEI><body><p>Cases</body></TEI>";
  try {
    ParseDocument(raw, SourceFormat::kXml, "1");
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(e.byte_offset() > 0);
    CHECK(e.byte_offset() <= raw.size());
  }
}

TEST_CASE("invalid UTF-8 is rejected with its offset") {
  std::string raw = "<p>ok \xff bad</p>";
  try {
    ParseDocument(raw, SourceFormat::kXml, "1");
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(e.byte_offset() == 6);
  }
}

TEST_CASE("empty body is an EmptyDocument") {
  CHECK_THROWS_AS(ParseDocument("<TEI><body></body></TEI>", SourceFormat::kXml, "1"),
                  EmptyDocument);
  CHECK_THROWS_AS(
      ParseDocument("<TEI><abstract><p>Only abstract.</p></abstract></TEI>",
                    SourceFormat::kXml, "1"),
      EmptyDocument);
  CHECK_THROWS_AS(ParseDocument("  \n ", SourceFormat::kText, "1"), EmptyDocument);
}

TEST_CASE("plain-text fallback with headings") {
  Document doc = ParseDocument("# Abstract\nShort summary.\n\n# Methods\nWe did it.\n",
                               SourceFormat::kText, "5");
  REQUIRE(doc.sections.size() == 2);
  CHECK(doc.sections[0].excluded);
  CHECK(doc.sections[1].title == "Methods");
  CHECK(doc.sections[1].text == "We did it.");
  auto sentences = SegmentAndTokenize(doc);
  REQUIRE(sentences.size() == 1);
  CHECK(sentences[0].sentence.text == "We did it.");
}

TEST_CASE("numeric predicate") {
  CHECK(IsNumericToken("3.39"));
  CHECK(IsNumericToken("0.49"));
  CHECK(IsNumericToken("12330"));
  CHECK(IsNumericToken("-0.5"));
  CHECK_FALSE(IsNumericToken("0.30%"));
  CHECK_FALSE(IsNumericToken("3,399"));
  CHECK_FALSE(IsNumericToken("BRCA2"));
  CHECK_FALSE(IsNumericToken("1."));
}

TEST_CASE("tokenizer on a risk-estimate clause") {
  std::string s = "OR, 12.33; 95% CI, 5.43-25.61";
  auto spans = Tokenize(s);
  std::vector<std::string> words;
  for (auto &t : spans) words.push_back(t.token);
  CHECK(words == std::vector<std::string>{"OR", ",", "12.33", ";", "95%", "CI", ",",
                                          "5.43", "-", "25.61"});
  CHECK(spans[2].is_numeric);
  CHECK_FALSE(spans[4].is_numeric);
  CHECK(spans[7].is_numeric);
  CHECK(spans[9].is_numeric);
  CheckOffsets(s, spans);
}

TEST_CASE("tokenizer keeps gene symbols and hyphenated words whole") {
  auto spans = Tokenize("CDKN2A, early-onset cases (n=3,399) with -1.5 shift");
  std::vector<std::string> words;
  for (auto &t : spans) words.push_back(t.token);
  CHECK(words == std::vector<std::string>{"CDKN2A", ",", "early-onset", "cases", "(",
                                          "n", "=", "3,399", ")", "with", "-1.5",
                                          "shift"});
  CHECK(spans[10].is_numeric);
}

TEST_CASE("two-sentence paragraph gets dense ids") {
  Document doc;
  doc.pmid = "1";
  doc.sections.push_back({"", "A. B.", false});
  auto out = SegmentAndTokenize(doc);
  REQUIRE(out.size() == 2);
  CHECK(out[0].sentence.sent_id == 0);
  CHECK(out[1].sentence.sent_id == 1);
  CHECK(out[0].sentence.text == "A.");
  CHECK(out[1].sentence.text == "B.");
}

TEST_CASE("empty document body yields no sentences") {
  Document doc;
  doc.pmid = "1";
  doc.sections.push_back({"Body", "   ", false});
  CHECK(SegmentAndTokenize(doc).empty());
  Document none;
  none.pmid = "2";
  CHECK(SegmentAndTokenize(none).empty());
}

TEST_CASE("abbreviations and decimals do not split sentences") {
  auto s = SplitSentences(
      "As shown by Smith et al. in 2019, risk rose vs. baseline (Fig. 2). "
      "The OR was 3.39. Next sentence here.");
  REQUIRE(s.size() == 3);
  CHECK(s[0] == "As shown by Smith et al. in 2019, risk rose vs. baseline (Fig. 2).");
  CHECK(s[1] == "The OR was 3.39.");
}

TEST_CASE("blank lines are hard sentence boundaries") {
  auto s = SplitSentences("First paragraph without period\n\nsecond one");
  REQUIRE(s.size() == 2);
}

TEST_CASE("no sentence originates from the abstract") {
  Document doc = ParseDocument(kTei, SourceFormat::kXml, "29922827");
  auto out = SegmentAndTokenize(doc);
  REQUIRE(out.size() == 3);
  for (const auto &s : out) {
    CHECK(s.sentence.section != "");
    CHECK(s.sentence.text.find("We studied carriers") == std::string::npos);
  }
}

TEST_CASE("offset round trip and determinism on random text") {
  Rng rng(42);
  const std::string alphabet =
      "abcXYZ0123456789 .,;:-+%()[]'\"\n\t=/\xc3\xa9";
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    int len = static_cast<int>(rng.UniformInt(0, 80));
    for (int i = 0; i < len; ++i) {
      size_t k = static_cast<size_t>(rng.UniformInt(0, alphabet.size() - 3));
      if (alphabet[k] == '\xc3') {
        s += "\xc3\xa9";
      } else {
        s.push_back(alphabet[k]);
      }
    }
    Document doc;
    doc.pmid = "r";
    doc.sections.push_back({"", s, false});
    auto first = SegmentAndTokenize(doc);
    auto second = SegmentAndTokenize(doc);
    REQUIRE(first.size() == second.size());
    for (size_t i = 0; i < first.size(); ++i) {
      CHECK(first[i].sentence.text == second[i].sentence.text);
      CHECK(!Trim(first[i].sentence.text).empty());
      CHECK(first[i].sentence.sent_id == static_cast<int>(i));
      CheckOffsets(first[i].sentence.text, first[i].tokens);
      REQUIRE(first[i].tokens.size() == second[i].tokens.size());
      for (size_t k = 0; k < first[i].tokens.size(); ++k) {
        CHECK(first[i].tokens[k].token == second[i].tokens[k].token);
        CHECK(first[i].tokens[k].is_numeric == IsNumericToken(first[i].tokens[k].token));
      }
    }
  }
}

TEST_CASE("load_corpus collects per-record errors and rejects duplicates") {
  kbc::testing::TempDir dir;
  WriteFile(dir.File("a.xml"), "<TEI><body><p>Alpha text.</p></body></TEI>");
  WriteFile(dir.File("b.xml"), "<TEI><body><p>Beta text.</p></body></TEI>");
  WriteFile(dir.File("c.txt"), "Gamma text.");

  WriteFile(dir.File("ok.jsonl"),
            R"({"pmid": "1", "path": "a.xml", "format": "xml"}
{"pmid": "2", "path": "b.xml", "format": "xml"}
{"pmid": "3", "path": "c.txt", "format": "text"}
)");
  Corpus ok = LoadCorpus(dir.File("ok.jsonl"));
  CHECK(ok.size() == 3);
  CHECK(ok.errors().empty());
  CHECK(ok.Find("3")->source_format == SourceFormat::kText);

  WriteFile(dir.File("missing.jsonl"),
            R"({"pmid": "1", "path": "a.xml", "format": "xml"}
{"pmid": "2", "path": "nope.xml", "format": "xml"}
{"pmid": "3", "path": "c.txt", "format": "text"}
)");
  Corpus partial = LoadCorpus(dir.File("missing.jsonl"));
  CHECK(partial.size() == 2);
  REQUIRE(partial.errors().size() == 1);
  CHECK(partial.errors()[0].pmid == "2");

  WriteFile(dir.File("dup.jsonl"),
            R"({"pmid": "1", "path": "a.xml", "format": "xml"}
{"pmid": "1", "path": "b.xml", "format": "xml"}
)");
  CHECK_THROWS_AS(LoadCorpus(dir.File("dup.jsonl")), ConfigError);
}

TEST_CASE("document and sentence JSON round trip") {
  Document doc = ParseDocument(kTei, SourceFormat::kXml, "29922827");
  Document back = DocumentFromJson(DocumentToJson(doc));
  REQUIRE(back.sections.size() == doc.sections.size());
  for (size_t i = 0; i < doc.sections.size(); ++i) {
    CHECK(back.sections[i].text == doc.sections[i].text);
    CHECK(back.sections[i].excluded == doc.sections[i].excluded);
  }
  auto sentences = SegmentAndTokenize(doc);
  TokenizedSentence s = SentenceFromJson(SentenceToJson(sentences[2]));
  CHECK(s.sentence.text == sentences[2].sentence.text);
  CHECK(s.tokens.size() == sentences[2].tokens.size());
}
