#include "kbc/rod/synthetic.h"

#include <algorithm>
#include <cstdio>
#include <set>

#include "kbc/base/errors.h"
#include "kbc/base/jsonl.h"
#include "kbc/base/rng.h"
#include "kbc/base/strings.h"
#include "kbc/rod/rod_csv.h"
#include "kbc/text/corpus_io.h"
#include "kbc/text/segmenter.h"

namespace kbc::rod {
namespace {

const std::vector<std::string> kCancers = {
    "breast", "pancreatic", "colorectal", "ovarian", "prostate",
    "endometrial", "gastric", "melanoma"};
const std::vector<std::string> kRaces = {"White", "Multiple", "Asian", "Black",
                                         "Hispanic"};
const std::vector<std::string> kRegistries = {
    "Danish Civil Registration System", "national cancer registry",
    "regional tumor registry", "hospital-based cohort",
    "community-based prospective cohort"};
const std::vector<std::string> kCountries = {
    "Denmark", "the United States", "Finland", "Canada", "Australia", "Japan"};
const std::vector<std::string> kSoftware = {"R", "SAS", "Stata", "SPSS"};

// Text under construction with the character ranges of gold mentions.
struct Mention {
  size_t start = 0;
  size_t end = 0;
  er::EntityType type = er::EntityType::kNone;
};

struct Builder {
  std::string text;
  std::vector<Mention> mentions;

  Builder &Add(const std::string &s) {
    text += s;
    return *this;
  }
  size_t Mark(const std::string &s, er::EntityType type) {
    mentions.push_back({text.size(), text.size() + s.size(), type});
    text += s;
    return mentions.size() - 1;
  }
};

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

struct GeneRisk {
  std::string gene;
  std::string metric;  // OR, RR or HR
  std::string estimate;
};

class Generator {
 public:
  explicit Generator(const SyntheticSpec &spec) : spec_(spec), rng_(spec.seed) {}

  SyntheticCorpus Run() {
    if (spec_.n_docs < 0 || spec_.min_genes_per_doc < 1 ||
        spec_.max_genes_per_doc < spec_.min_genes_per_doc ||
        spec_.negative_pair_rate < 0 || spec_.negative_pair_rate > 1 ||
        spec_.min_estimate <= 0 || spec_.max_estimate <= spec_.min_estimate) {
      throw ConfigError("invalid synthetic corpus spec");
    }
    SyntheticCorpus out;
    std::set<std::string> pmids;
    for (int d = 0; d < spec_.n_docs; ++d) {
      std::string pmid;
      do {
        pmid = std::to_string(rng_.UniformInt(20000000, 34999999));
      } while (!pmids.insert(pmid).second);
      MakeDocument(pmid, out);
    }
    return out;
  }

 private:
  // Reported precision varies between papers: one to three decimals, two
  // most often.
  std::string Estimate() {
    static const int kPlaces[] = {1, 2, 2, 3};
    const int places = kPlaces[rng_.UniformInt(0, 3)];
    return Fixed(rng_.Uniform(spec_.min_estimate, spec_.max_estimate), places);
  }

  static int Places(const std::string &literal) {
    size_t dot = literal.find('.');
    return dot == std::string::npos ? 0 : static_cast<int>(literal.size() - dot - 1);
  }

  // Appends "; 95% CI, lo-hi)" around `estimate`.
  void AddInterval(Builder &b, const std::string &estimate) {
    double e = std::stod(estimate);
    double lo = e * rng_.Uniform(0.35, 0.85);
    double hi = e * rng_.Uniform(1.2, 2.6);
    const int places = std::max(2, Places(estimate));
    b.Add("; 95% CI, " + Fixed(lo, places) + "-" + Fixed(hi, places) + ")");
  }

  std::string AscertainmentSentence(int which, const std::string &cancer,
                                    const std::string &race) {
    switch (which % 7) {
      case 0:
        return "Cases were recruited from the " + rng_.Pick(kRegistries) +
               " between " + std::to_string(rng_.UniformInt(1975, 1995)) +
               " and " + std::to_string(rng_.UniformInt(1998, 2016)) + ".";
      case 1:
        return "A total of " + std::to_string(rng_.UniformInt(200, 9000)) +
               " patients and " + std::to_string(rng_.UniformInt(200, 9000)) +
               " controls were enrolled at " +
               std::to_string(rng_.UniformInt(2, 40)) + " centers in " +
               rng_.Pick(kCountries) + ".";
      case 2:
        return "Inclusion criteria required a diagnosis of " + cancer +
               " cancer before age " + std::to_string(rng_.UniformInt(40, 70)) +
               " years.";
      case 3:
        return "Controls were matched on sex and year of birth using the " +
               rng_.Pick(kRegistries) + ".";
      case 4:
        return "Families were ascertained through high-risk clinics in " +
               rng_.Pick(kCountries) + " with a strong family history of " +
               cancer + " cancer.";
      case 5:
        return "Participants were excluded if they had a prior diagnosis of " +
               rng_.Pick(kCancers) + " cancer or incomplete pedigree data.";
      default:
        return "The study population comprised " +
               std::to_string(rng_.UniformInt(300, 5000)) + " " + race +
               " individuals identified through the " + rng_.Pick(kRegistries) +
               ".";
    }
  }

  Builder FillerSentence(int which) {
    Builder b;
    switch (which % 8) {
      case 0: b.Add("Genomic DNA was extracted from peripheral blood samples."); break;
      case 1: b.Add("Sequencing libraries were prepared with a targeted capture panel."); break;
      case 2: b.Add("Variants were classified according to published guidelines."); break;
      case 3:
        b.Add("Statistical analyses were performed using " + rng_.Pick(kSoftware) +
              " version " + Fixed(rng_.Uniform(1.0, 9.9), 1) + ".");
        break;
      case 4: b.Add("All reported P values are two-sided."); break;
      case 5: b.Add("These findings are consistent with previous reports."); break;
      case 6:
        b.Add("A total of " + std::to_string(rng_.UniformInt(20, 900)) +
              " variants were identified in " + std::to_string(rng_.UniformInt(5, 60)) +
              " genes.");
        break;
      default:
        b.Add("Median follow-up was " + Fixed(rng_.Uniform(2.0, 20.0), 1) +
              " years in both groups.");
    }
    return b;
  }

  Builder SingleRisk(const GeneRisk &g, const std::string &cancer, int variant) {
    Builder b;
    switch (variant % 4) {
      case 0:
        b.Mark(g.gene, er::EntityType::kGermlineMutation);
        b.Add(" carriers had an elevated risk (" + g.metric + ", ");
        b.Mark(g.estimate, er::EntityType::kRiskEstimate);
        AddInterval(b, g.estimate);
        b.Add(".");
        break;
      case 1:
        b.Add("Mutations in ");
        b.Mark(g.gene, er::EntityType::kGermlineMutation);
        b.Add(" were associated with " + cancer + " cancer (" + g.metric + ", ");
        b.Mark(g.estimate, er::EntityType::kRiskEstimate);
        AddInterval(b, g.estimate);
        b.Add(".");
        break;
      case 2:
        b.Mark(g.gene, er::EntityType::kGermlineMutation);
        b.Add(", with mutations in " + Fixed(rng_.Uniform(0.01, 3.0), 2) +
              "% of cases (" + g.metric + ", ");
        b.Mark(g.estimate, er::EntityType::kRiskEstimate);
        AddInterval(b, g.estimate);
        b.Add(".");
        break;
      default:
        b.Add("The estimated " + g.metric + " for ");
        b.Mark(g.gene, er::EntityType::kGermlineMutation);
        b.Add(" was ");
        b.Mark(g.estimate, er::EntityType::kRiskEstimate);
        b.Add(" (95% CI, ");
        double e = std::stod(g.estimate);
        const int places = std::max(2, Places(g.estimate));
        b.Add(Fixed(e * rng_.Uniform(0.35, 0.85), places) + "-" +
              Fixed(e * rng_.Uniform(1.2, 2.6), places) + ").");
    }
    return b;
  }

  Builder PairRisk(const GeneRisk &a, const GeneRisk &c, int variant) {
    Builder b;
    if (variant % 2 == 0) {
      b.Mark(a.gene, er::EntityType::kGermlineMutation);
      b.Add(" (" + a.metric + ", ");
      b.Mark(a.estimate, er::EntityType::kRiskEstimate);
      b.Add(") and ");
      b.Mark(c.gene, er::EntityType::kGermlineMutation);
      b.Add(" (" + c.metric + ", ");
      b.Mark(c.estimate, er::EntityType::kRiskEstimate);
      b.Add(") were both associated with risk.");
    } else {
      b.Add("Risk was higher for ");
      b.Mark(a.gene, er::EntityType::kGermlineMutation);
      b.Add(" (" + a.metric + ", ");
      b.Mark(a.estimate, er::EntityType::kRiskEstimate);
      b.Add(") than for ");
      b.Mark(c.gene, er::EntityType::kGermlineMutation);
      b.Add(" (" + c.metric + ", ");
      b.Mark(c.estimate, er::EntityType::kRiskEstimate);
      b.Add(").");
    }
    return b;
  }

  er::ERExample ToExample(const std::string &pmid, int sent_id, const Builder &b,
                          bool paired) {
    text::TokenizedSentence ts = text::MakeSentence(pmid, sent_id, b.text);
    er::ERExample ex;
    ex.pmid = pmid;
    ex.sent_id = sent_id;
    ex.text = b.text;
    ex.tokens = ts.tokens;
    for (const Mention &m : b.mentions) {
      int first = -1, last = -1;
      for (size_t i = 0; i < ex.tokens.size(); ++i) {
        if (ex.tokens[i].start == m.start) first = static_cast<int>(i);
        if (ex.tokens[i].end == m.end) last = static_cast<int>(i);
      }
      if (first < 0 || last < first) {
        throw Error("synthetic mention does not align with tokens: " + b.text);
      }
      ex.entities.push_back({first, last + 1, m.type});
    }
    if (!paired) {
      ex.relations.push_back({0, 1, er::Polarity::kPositive});
    } else {
      // Mentions are gene0, est0, gene1, est1.
      ex.relations.push_back({0, 1, er::Polarity::kPositive});
      ex.relations.push_back({2, 3, er::Polarity::kPositive});
      ex.relations.push_back({0, 3, er::Polarity::kNegative});
      ex.relations.push_back({2, 1, er::Polarity::kNegative});
    }
    er::Validate(ex);
    return ex;
  }

  void MakeDocument(const std::string &pmid, SyntheticCorpus &out) {
    std::string cancer = rng_.Pick(kCancers);
    std::string race = rng_.Pick(kRaces);

    std::vector<std::string> planted;
    int n_planted = static_cast<int>(rng_.UniformInt(2, 3));
    std::vector<int> kinds = {0, 1, 2, 3, 4, 5, 6};
    rng_.Shuffle(kinds);
    for (int i = 0; i < n_planted; ++i) {
      planted.push_back(AscertainmentSentence(kinds[i], cancer, race));
    }

    // Methods: planted ascertainment sentences among fillers.
    std::vector<std::pair<std::string, bool>> methods;
    for (const std::string &s : planted) methods.push_back({s, true});
    for (int i = 0; i < spec_.filler_sentences; ++i) {
      methods.push_back({FillerSentence(static_cast<int>(rng_.UniformInt(0, 7))).text, false});
    }
    rng_.Shuffle(methods);

    // Results: risk sentences plus a number-bearing filler.
    int n_genes = static_cast<int>(
        rng_.UniformInt(spec_.min_genes_per_doc, spec_.max_genes_per_doc));
    std::vector<std::string> genes = SyntheticGenes();
    rng_.Shuffle(genes);
    std::vector<GeneRisk> risks;
    for (int i = 0; i < n_genes; ++i) {
      const char *metrics[] = {"OR", "OR", "RR", "HR"};
      GeneRisk g{genes[i % genes.size()], metrics[rng_.UniformInt(0, 3)], Estimate()};
      risks.push_back(g);
    }
    for (size_t i = 1; i < risks.size(); ++i) {
      while (risks[i].estimate == risks[i - 1].estimate) risks[i].estimate = Estimate();
    }

    struct ResultSentence {
      Builder builder;
      bool er = false;
      bool paired = false;
    };
    std::vector<ResultSentence> results;
    for (size_t i = 0; i < risks.size();) {
      if (i + 1 < risks.size() && rng_.Bernoulli(spec_.negative_pair_rate)) {
        results.push_back({PairRisk(risks[i], risks[i + 1],
                                    static_cast<int>(rng_.UniformInt(0, 1))),
                           true, true});
        i += 2;
      } else {
        results.push_back({SingleRisk(risks[i], cancer,
                                      static_cast<int>(rng_.UniformInt(0, 3))),
                           true, false});
        i += 1;
      }
    }
    results.push_back({FillerSentence(rng_.Bernoulli(0.5) ? 6 : 7), true, false});

    text::Document doc;
    doc.pmid = pmid;
    doc.source_format = text::SourceFormat::kXml;
    doc.sections.push_back({"Abstract",
                            "We report germline risk estimates in " + cancer +
                                " cancer. " + planted[0],
                            true});
    std::vector<std::string> method_texts;
    for (auto &m : methods) method_texts.push_back(m.first);
    doc.sections.push_back({"Methods", Join(method_texts, " "), false});
    std::vector<std::string> result_texts;
    for (auto &r : results) result_texts.push_back(r.builder.text);
    doc.sections.push_back({"Results", Join(result_texts, " "), false});

    // The segmenter must reproduce the generated sentences exactly.
    std::vector<text::TokenizedSentence> segmented = text::SegmentAndTokenize(doc);
    if (segmented.size() != methods.size() + results.size()) {
      throw Error("synthetic document " + pmid + " segments unexpectedly");
    }
    int sent_id = 0;
    for (auto &m : methods) {
      if (segmented[sent_id].sentence.text != m.first) {
        throw Error("synthetic sentence mismatch: " + m.first);
      }
      out.ascertainment_labels.push_back({pmid, sent_id, m.first, m.second});
      ++sent_id;
    }
    for (auto &r : results) {
      if (segmented[sent_id].sentence.text != r.builder.text) {
        throw Error("synthetic sentence mismatch: " + r.builder.text);
      }
      out.ascertainment_labels.push_back({pmid, sent_id, r.builder.text, false});
      if (r.er) {
        if (r.builder.mentions.empty()) {
          er::ERExample ex;
          ex.pmid = pmid;
          ex.sent_id = sent_id;
          ex.text = r.builder.text;
          ex.tokens = segmented[sent_id].tokens;
          out.er_examples.push_back(std::move(ex));
        } else {
          out.er_examples.push_back(ToExample(pmid, sent_id, r.builder, r.paired));
        }
      }
      ++sent_id;
    }

    for (const GeneRisk &g : risks) {
      RiskRecord rec;
      rec.pmid = pmid;
      rec.gene = g.gene;
      rec.cancer = cancer;
      rec.cancer[0] = static_cast<char>(std::toupper(rec.cancer[0]));
      rec.race = race;
      auto value = Decimal::Parse(g.estimate);
      if (g.metric == "OR") rec.odds_ratio = value;
      if (g.metric == "RR") rec.relative_risk = value;
      if (g.metric == "HR") rec.hazard_ratio = value;
      if (rng_.Bernoulli(0.5)) rec.max_age = static_cast<int>(rng_.UniformInt(50, 85));
      rec.total_carriers = static_cast<int>(rng_.UniformInt(5, 400));
      rec.ascertainment_snippets = planted;
      out.rod.push_back(std::move(rec));
    }
    out.corpus.Add(std::move(doc));
  }

  SyntheticSpec spec_;
  Rng rng_;
};

std::string XmlEscape(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string ToTei(const text::Document &doc) {
  std::string xml =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<TEI xmlns=\"http://www.tei-c.org/ns/1.0\">\n<teiHeader>\n"
      "<fileDesc><titleStmt><title>Synthetic article " + doc.pmid +
      "</title></titleStmt></fileDesc>\n<profileDesc>\n";
  for (const auto &s : doc.sections) {
    if (s.excluded) xml += "<abstract><div><p>" + XmlEscape(s.text) + "</p></div></abstract>\n";
  }
  xml += "</profileDesc>\n</teiHeader>\n<text><body>\n";
  for (const auto &s : doc.sections) {
    if (s.excluded) continue;
    xml += "<div><head>" + XmlEscape(s.title) + "</head>\n<p>" + XmlEscape(s.text) + "</p>\n";
    if (s.title == "Results") {
      xml += "<figure type=\"table\"><head>Table 1</head><table><row><cell>"
             "OR 99.99</cell></row></table></figure>\n";
    }
    xml += "</div>\n";
  }
  xml += "</body></text>\n</TEI>\n";
  return xml;
}

}  // namespace

const std::vector<std::string> &SyntheticGenes() {
  static const std::vector<std::string> kGenes = {
      "BRCA1", "BRCA2", "TP53", "CHEK2", "ATM", "MLH1", "MSH2", "MSH6",
      "PMS2", "CDKN2A", "PALB2", "APC", "MUTYH", "STK11", "PTEN", "CDH1",
      "RAD51C", "RAD51D", "BRIP1", "NBN", "BARD1", "EPCAM", "SMAD4",
      "BMPR1A", "RET"};
  return kGenes;
}

SyntheticCorpus GenerateSyntheticCorpus(const SyntheticSpec &spec) {
  return Generator(spec).Run();
}

void WriteSyntheticCorpus(const SyntheticCorpus &corpus, const std::string &dir) {
  std::vector<Json> manifest;
  for (const auto &doc : corpus.corpus.documents()) {
    std::string rel = "docs/" + doc.pmid + ".xml";
    WriteFile(dir + "/" + rel, ToTei(doc));
    manifest.push_back({{"pmid", doc.pmid}, {"path", rel}, {"format", "xml"}});
  }
  WriteJsonl(dir + "/manifest.jsonl", manifest);
  WriteFile(dir + "/rod.csv", FormatRod(corpus.rod));
  er::WriteExamples(dir + "/er.jsonl", corpus.er_examples);
  std::vector<Json> direct;
  for (const auto &l : corpus.ascertainment_labels) {
    direct.push_back({{"pmid", l.pmid}, {"sent_id", l.sent_id}, {"text", l.text},
                      {"label", l.positive ? "positive" : "negative"},
                      {"score", nullptr}, {"provenance", "direct"},
                      {"repr_mode", nullptr}});
  }
  WriteJsonl(dir + "/ascertainment_direct.jsonl", direct);
}

std::string SerializeSynthetic(const SyntheticCorpus &corpus) {
  std::vector<Json> rows;
  for (const auto &doc : corpus.corpus.documents()) rows.push_back(text::DocumentToJson(doc));
  for (const auto &ex : corpus.er_examples) rows.push_back(er::ToJson(ex));
  for (const auto &l : corpus.ascertainment_labels) {
    rows.push_back({{"pmid", l.pmid}, {"sent_id", l.sent_id}, {"positive", l.positive}});
  }
  return DumpJsonl(rows) + FormatRod(corpus.rod);
}

}  // namespace kbc::rod
