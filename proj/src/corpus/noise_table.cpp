#include <cmath>
#include <vector>

#include "lexrisk/corpus.hpp"
#include "lexrisk/error.hpp"

namespace lexrisk {

NoiseTable::NoiseTable(const Vocabulary& vocab, double exponent) : exponent_(exponent) {
  if (vocab.empty()) fail(ErrorCode::empty_vocabulary, "nothing to sample: vocabulary is empty");
  require(exponent > 0.0, "noise exponent must be positive");

  // The normalizer cancels, so raw counts stand in for relative frequencies.
  const auto n = vocab.size();
  probabilities_.resize(n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    probabilities_[i] = std::pow(static_cast<double>(vocab.counts()[i]), exponent);
    z += probabilities_[i];
  }
  for (auto& p : probabilities_) p /= z;

  // Vose's alias method.
  accept_.assign(n, 1.0);
  alias_.resize(n);
  std::vector<double> scaled(n);
  std::vector<TokenId> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    alias_[i] = static_cast<TokenId>(i);
    scaled[i] = probabilities_[i] * static_cast<double>(n);
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<TokenId>(i));
  }
  while (!small.empty() && !large.empty()) {
    const TokenId s = small.back();
    small.pop_back();
    const TokenId l = large.back();
    accept_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding.
  for (TokenId i : small) accept_[i] = 1.0;
  for (TokenId i : large) accept_[i] = 1.0;
}

TokenId NoiseTable::draw(Rng& rng) const {
  const auto column = static_cast<TokenId>(rng.below(accept_.size()));
  return rng.uniform() < accept_[column] ? column : alias_[column];
}

NoiseTable build_noise_table(const Vocabulary& vocab, double exponent) {
  return NoiseTable(vocab, exponent);
}

}  // namespace lexrisk
