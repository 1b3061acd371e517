#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "lexrisk/corpus.hpp"
#include "lexrisk/error.hpp"

namespace lexrisk {

Vocabulary Vocabulary::from_tokens(const std::vector<std::vector<std::string>>& token_lists,
                                   std::uint64_t min_count) {
  require(min_count >= 1, "min_count must be at least 1");
  std::unordered_map<std::string, std::uint64_t> counts;
  std::uint64_t total = 0;
  for (const auto& list : token_lists) {
    for (const auto& token : list) {
      ++counts[token];
      ++total;
    }
  }
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  for (auto& [token, count] : counts)
    if (count >= min_count) entries.emplace_back(token, count);
  return from_entries(std::move(entries), total, min_count);
}

Vocabulary Vocabulary::from_entries(std::vector<std::pair<std::string, std::uint64_t>> entries,
                                    std::uint64_t total_tokens, std::uint64_t min_count) {
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  Vocabulary v;
  v.min_count_ = min_count;
  v.total_tokens_ = total_tokens;
  for (auto& [token, count] : entries) {
    if (count < min_count)
      fail(ErrorCode::bad_format, "vocabulary entry below min_count: " + token);
    v.tokens_.push_back(std::move(token));
    v.counts_.push_back(count);
  }
  const auto kept = std::accumulate(v.counts_.begin(), v.counts_.end(), std::uint64_t{0});
  if (kept > total_tokens) fail(ErrorCode::bad_format, "vocabulary counts exceed total_tokens");
  v.index();
  return v;
}

void Vocabulary::index() {
  lookup_.clear();
  lookup_.reserve(tokens_.size());
  for (TokenId i = 0; i < tokens_.size(); ++i) {
    if (!lookup_.emplace(tokens_[i], i).second)
      fail(ErrorCode::bad_format, "duplicate vocabulary token: " + tokens_[i]);
  }
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = lookup_.find(std::string(token));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

double Vocabulary::relative_frequency(TokenId id) const {
  return static_cast<double>(counts_.at(id)) / static_cast<double>(total_tokens_);
}

std::vector<TokenId> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens)
    if (auto id = find(t)) ids.push_back(*id);
  return ids;
}

Vocabulary build_vocabulary(const std::vector<std::string>& texts, std::uint64_t min_count,
                            bool lowercase) {
  std::vector<std::vector<std::string>> lists;
  lists.reserve(texts.size());
  for (const auto& text : texts) lists.push_back(tokenize(text, lowercase));
  return Vocabulary::from_tokens(lists, min_count);
}

double discard_probability(double f, double t) {
  if (!(f > 0.0) || f > 1.0) fail(ErrorCode::invalid_argument, "relative frequency must be in (0, 1]");
  require(t >= 0.0, "subsample threshold must be non-negative");
  if (t == 0.0) return 0.0;
  return std::max(0.0, 1.0 - std::sqrt(t / f));
}

}  // namespace lexrisk
