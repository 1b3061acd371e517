#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "lexrisk/corpus.hpp"
#include "lexrisk/error.hpp"

namespace lexrisk {

bool Paragraph::has_category(std::string_view category) const {
  return std::find(categories.begin(), categories.end(), category) != categories.end();
}

CategoryRegistry::CategoryRegistry(std::vector<std::string> names) : names_(std::move(names)) {
  std::set<std::string> seen;
  for (const auto& n : names_) {
    require(!n.empty(), "category names must be non-empty");
    require(seen.insert(n).second, "duplicate category: " + n);
  }
}

CategoryRegistry CategoryRegistry::parse(std::istream& in) {
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    names.push_back(line.substr(first, last - first + 1));
  }
  return CategoryRegistry(std::move(names));
}

bool CategoryRegistry::contains(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::string_view to_string(SplitPart part) noexcept {
  switch (part) {
    case SplitPart::train: return "train";
    case SplitPart::validation: return "validation";
    case SplitPart::test: return "test";
  }
  return "train";
}

SplitPart split_part_from_string(std::string_view name) {
  if (name == "train") return SplitPart::train;
  if (name == "validation") return SplitPart::validation;
  if (name == "test") return SplitPart::test;
  fail(ErrorCode::bad_format, "unknown split part: " + std::string(name));
}

const std::vector<LabeledRecord>& DatasetSplit::part(SplitPart p) const {
  switch (p) {
    case SplitPart::train: return train;
    case SplitPart::validation: return validation;
    case SplitPart::test: return test;
  }
  return train;
}

std::vector<std::size_t> DatasetSplit::paragraphs_in(SplitPart p) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < paragraphs.size(); ++i)
    if (assignment[i] == p) out.push_back(i);
  return out;
}

std::vector<LabeledRecord> DatasetSplit::records_for(SplitPart p, std::string_view category) const {
  std::vector<LabeledRecord> out;
  for (const auto& r : part(p))
    if (r.category == category) out.push_back(r);
  return out;
}

DatasetSplit ingest_labeled(std::vector<Paragraph> records, const CategoryRegistry& registry,
                            SplitRatios ratios, std::uint64_t seed) {
  require(ratios.train >= 0 && ratios.validation >= 0 && ratios.test >= 0,
          "split ratios must be non-negative");
  require(std::abs(ratios.train + ratios.validation + ratios.test - 1.0) < 1e-9,
          "split ratios must sum to 1");

  std::unordered_set<std::string> ids;
  for (const auto& p : records) {
    if (!ids.insert(p.paragraph_id).second)
      fail(ErrorCode::duplicate_id, "duplicate paragraph_id: " + p.paragraph_id);
    for (const auto& c : p.categories)
      if (!registry.contains(c))
        fail(ErrorCode::unknown_category,
             "paragraph " + p.paragraph_id + " uses undeclared category: " + c);
  }

  DatasetSplit split;
  split.categories = registry;
  const auto n = records.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());

  const auto n_train = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(ratios.train * static_cast<double>(n))));
  const auto n_val = std::min<std::size_t>(n - n_train, static_cast<std::size_t>(std::llround(ratios.validation * static_cast<double>(n))));
  split.assignment.assign(n, SplitPart::test);
  for (std::size_t k = 0; k < n; ++k) {
    split.assignment[order[k]] = k < n_train             ? SplitPart::train
                                 : k < n_train + n_val ? SplitPart::validation
                                                       : SplitPart::test;
  }

  split.paragraphs = std::move(records);
  for (std::size_t i = 0; i < n; ++i) {
    auto& bucket = split.assignment[i] == SplitPart::train        ? split.train
                   : split.assignment[i] == SplitPart::validation ? split.validation
                                                                  : split.test;
    for (const auto& category : registry.names())
      bucket.push_back({i, category, split.paragraphs[i].has_category(category)});
  }
  return split;
}

void encode_paragraphs(std::vector<Paragraph>& paragraphs, const Vocabulary& vocab, bool lowercase) {
  for (auto& p : paragraphs) p.tokens = vocab.encode(tokenize(p.raw_text, lowercase));
}

std::vector<Paragraph> read_corpus_jsonl(std::istream& in) {
  std::vector<Paragraph> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Paragraph p;
      p.doc_id = j.at("doc_id").get<std::string>();
      p.paragraph_id = j.at("paragraph_id").get<std::string>();
      p.raw_text = j.at("text").get<std::string>();
      if (j.contains("categories")) p.categories = j.at("categories").get<std::vector<std::string>>();
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::bad_format, "corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_corpus_jsonl(std::ostream& out, const std::vector<Paragraph>& paragraphs) {
  for (const auto& p : paragraphs) {
    nlohmann::json j{{"doc_id", p.doc_id},
                     {"paragraph_id", p.paragraph_id},
                     {"text", p.raw_text},
                     {"categories", p.categories}};
    out << j.dump() << '\n';
  }
}

}  // namespace lexrisk
