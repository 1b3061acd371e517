#include <algorithm>
#include <cmath>
#include <string>

#include "lexrisk/embedding.hpp"
#include "lexrisk/error.hpp"

namespace lexrisk {

double cosine(std::span<const float> a, std::span<const float> b) {
  require(a.size() == b.size(), "cosine of vectors with different sizes");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += static_cast<double>(a[i]) * b[i];
    aa += static_cast<double>(a[i]) * a[i];
    bb += static_cast<double>(b[i]) * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
}

std::vector<Neighbor> most_similar(const EmbeddingModel& model, std::string_view query, std::size_t k) {
  const auto id = model.vocab().find(query);
  if (!id) fail(ErrorCode::not_found, "query token not in vocabulary: " + std::string(query));
  require(k < model.vocab().size(), "k must be smaller than the vocabulary");

  const auto q = model.words().row(*id);
  std::vector<Neighbor> all;
  all.reserve(model.vocab().size());
  for (TokenId w = 0; w < model.vocab().size(); ++w) {
    if (w == *id) continue;
    all.push_back({model.vocab().token(w), cosine(q, model.words().row(w))});
  }
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(),
                    [](const Neighbor& a, const Neighbor& b) {
                      return a.cosine != b.cosine ? a.cosine > b.cosine : a.token < b.token;
                    });
  all.resize(k);
  return all;
}

}  // namespace lexrisk
