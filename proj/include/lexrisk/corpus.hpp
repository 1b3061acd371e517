#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lexrisk/random.hpp"

namespace lexrisk {

using TokenId = std::uint32_t;

/// Splits text on Unicode whitespace and breaks every ASCII punctuation
/// character out as a token of its own. Letters, digits and any non-ASCII code
/// point form word runs. Lowercasing is ASCII-only.
std::vector<std::string> tokenize(std::string_view raw_text, bool lowercase = true);

/// Token index with raw counts.
///
/// Tokens are ordered by descending count, ties broken lexicographically, so
/// the index assignment is a pure function of the counted corpus.
/// `total_tokens` counts every token seen before min-count filtering and is
/// the denominator for relative frequencies.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Builds from already-tokenized text.
  static Vocabulary from_tokens(const std::vector<std::vector<std::string>>& token_lists,
                                std::uint64_t min_count);

  /// Rebuilds from stored (token, count) entries, e.g. when loading a model.
  static Vocabulary from_entries(std::vector<std::pair<std::string, std::uint64_t>> entries,
                                 std::uint64_t total_tokens, std::uint64_t min_count);

  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }

  std::optional<TokenId> find(std::string_view token) const;
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::uint64_t count(TokenId id) const { return counts_.at(id); }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  std::uint64_t total_tokens() const noexcept { return total_tokens_; }
  std::uint64_t min_count() const noexcept { return min_count_; }

  /// count / total_tokens.
  double relative_frequency(TokenId id) const;

  /// Maps tokens to indices, dropping anything out of vocabulary.
  std::vector<TokenId> encode(const std::vector<std::string>& tokens) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.counts_ == b.counts_ &&
           a.total_tokens_ == b.total_tokens_ && a.min_count_ == b.min_count_;
  }

 private:
  void index();

  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, TokenId> lookup_;
  std::uint64_t total_tokens_ = 0;
  std::uint64_t min_count_ = 1;
};

/// Tokenizes every text and counts.
Vocabulary build_vocabulary(const std::vector<std::string>& texts, std::uint64_t min_count,
                            bool lowercase = true);

/// Unigram distribution raised to `exponent`, with a Walker alias table for
/// constant-time draws.
class NoiseTable {
 public:
  NoiseTable() = default;
  NoiseTable(const Vocabulary& vocab, double exponent);

  std::size_t size() const noexcept { return probabilities_.size(); }
  double exponent() const noexcept { return exponent_; }
  const std::vector<double>& probabilities() const noexcept { return probabilities_; }
  double probability(TokenId id) const { return probabilities_.at(id); }

  TokenId draw(Rng& rng) const;

 private:
  std::vector<double> probabilities_;
  std::vector<double> accept_;
  std::vector<TokenId> alias_;
  double exponent_ = 0.75;
};

inline constexpr double kDefaultNoiseExponent = 0.75;

NoiseTable build_noise_table(const Vocabulary& vocab, double exponent = kDefaultNoiseExponent);

/// Probability that an occurrence of a word with relative frequency `f` is
/// dropped: max(0, 1 - sqrt(t / f)). A threshold of zero disables dropping.
double discard_probability(double f, double t);

// ---------------------------------------------------------------------------
// Labeled paragraphs and splits

struct Paragraph {
  std::string paragraph_id;
  std::string doc_id;
  std::string raw_text;
  std::vector<TokenId> tokens;  // filled by encode_paragraphs
  std::vector<std::string> categories;

  bool has_category(std::string_view category) const;
};

/// Declared risk categories, in declaration order.
class CategoryRegistry {
 public:
  CategoryRegistry() = default;
  explicit CategoryRegistry(std::vector<std::string> names);

  /// One category per line; blank lines and surrounding whitespace ignored.
  static CategoryRegistry parse(std::istream& in);

  bool contains(std::string_view name) const;
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t size() const noexcept { return names_.size(); }

 private:
  std::vector<std::string> names_;
};

struct LabeledRecord {
  std::size_t paragraph;  // index into DatasetSplit::paragraphs
  std::string category;
  bool label = false;
};

enum class SplitPart { train, validation, test };

std::string_view to_string(SplitPart part) noexcept;
SplitPart split_part_from_string(std::string_view name);

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

/// Binary per-category records over a seeded paragraph-level split.
struct DatasetSplit {
  std::vector<Paragraph> paragraphs;
  std::vector<SplitPart> assignment;  // parallel to paragraphs
  CategoryRegistry categories;
  std::vector<LabeledRecord> train;
  std::vector<LabeledRecord> validation;
  std::vector<LabeledRecord> test;

  const std::vector<LabeledRecord>& part(SplitPart p) const;
  /// Indices of paragraphs assigned to `p`, in input order.
  std::vector<std::size_t> paragraphs_in(SplitPart p) const;
  /// Records of `p` restricted to one category.
  std::vector<LabeledRecord> records_for(SplitPart p, std::string_view category) const;
};

/// Validates ids and categories, assigns each paragraph to a split part by a
/// seeded shuffle, and expands every paragraph into one record per registered
/// category (positive when tagged, negative otherwise).
DatasetSplit ingest_labeled(std::vector<Paragraph> records, const CategoryRegistry& registry,
                            SplitRatios ratios, std::uint64_t seed);

/// Fills Paragraph::tokens against `vocab`.
void encode_paragraphs(std::vector<Paragraph>& paragraphs, const Vocabulary& vocab,
                       bool lowercase = true);

/// Newline-delimited JSON, one flat object per paragraph with fields doc_id,
/// paragraph_id, text, categories.
std::vector<Paragraph> read_corpus_jsonl(std::istream& in);
void write_corpus_jsonl(std::ostream& out, const std::vector<Paragraph>& paragraphs);

}  // namespace lexrisk
