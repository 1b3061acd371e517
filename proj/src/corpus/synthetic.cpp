#include "lexrisk/synthetic.hpp"

#include <algorithm>
#include <numeric>

#include "lexrisk/error.hpp"

namespace lexrisk::synthetic {

const std::vector<std::string>& topic_a_words() {
  static const std::vector<std::string> words{
      "terminate", "termination", "notice", "breach", "written", "expiry", "cure",
      "cancel", "period", "default", "days", "dissolved", "insolvency", "convenience",
      "remedy", "lapse", "forthwith", "revoke", "suspension", "withdraw"};
  return words;
}

const std::vector<std::string>& topic_b_words() {
  static const std::vector<std::string> words{
      "indemnify", "indemnified", "claims", "losses", "damages", "infringement",
      "defend", "harmless", "costs", "copyright", "patent", "trademark", "attorney",
      "suits", "proceedings", "judgment", "settlement", "negligence", "injury", "reimburse"};
  return words;
}

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words{
      "the", "shall", "of", "and", "to", "any", "agreement", "by", "such", "this"};
  return words;
}

std::string topic_paragraph(bool topic_a, std::size_t length, double filler_share, Rng& rng) {
  const auto& topic = topic_a ? topic_a_words() : topic_b_words();
  const auto& filler = filler_words();
  std::string text;
  for (std::size_t i = 0; i < length; ++i) {
    const auto& pool = rng.uniform() < filler_share ? filler : topic;
    if (!text.empty()) text.push_back(' ');
    text += pool[rng.below(pool.size())];
  }
  return text;
}

std::vector<Paragraph> two_topic_corpus(const TwoTopicOptions& o) {
  require(o.min_length >= 1 && o.min_length <= o.max_length, "bad paragraph length range");
  Rng rng(o.seed);
  std::vector<Paragraph> out;
  out.reserve(o.paragraphs);
  for (std::size_t i = 0; i < o.paragraphs; ++i) {
    const bool a = i % 2 == 0;
    const auto length = o.min_length + rng.below(o.max_length - o.min_length + 1);
    Paragraph p;
    p.doc_id = o.doc_prefix + "-doc-" + std::to_string(i / 10);
    p.paragraph_id = o.doc_prefix + "-p" + std::to_string(i);
    p.raw_text = topic_paragraph(a, length, o.filler_share, rng);
    p.categories = {a ? o.category_a : o.category_b};
    out.push_back(std::move(p));
  }
  return out;
}

PlantedDocument planted_document(std::size_t total, std::size_t planted, std::uint64_t seed) {
  require(planted <= total, "cannot plant more paragraphs than the document holds");
  Rng rng(seed);
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order.begin(), order.end());
  PlantedDocument doc;
  doc.planted.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(planted));
  std::sort(doc.planted.begin(), doc.planted.end());
  for (std::size_t i = 0; i < total; ++i) {
    const bool a = std::binary_search(doc.planted.begin(), doc.planted.end(), i);
    doc.paragraphs.push_back(topic_paragraph(a, 25 + rng.below(16), 0.3, rng));
    if (!doc.text.empty()) doc.text += "\n\n";
    doc.text += doc.paragraphs.back();
  }
  return doc;
}

}  // namespace lexrisk::synthetic
