#include <algorithm>
#include <cmath>
#include <numeric>

#include "lexrisk/error.hpp"
#include "lexrisk/eval.hpp"

namespace lexrisk {

Confusion confusion(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> labels) {
  require(predictions.size() == labels.size(), "predictions and labels differ in length");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(predictions[i] <= 1 && labels[i] <= 1, "predictions and labels must be 0 or 1");
    if (predictions[i])
      ++(labels[i] ? c.tp : c.fp);
    else
      ++(labels[i] ? c.fn : c.tn);
  }
  return c;
}

Metrics metrics(const Confusion& c) {
  require(c.total() > 0, "metrics of an empty confusion matrix");
  Metrics m;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  if (c.tp + c.fp > 0) m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (m.precision && m.recall)
    m.f1 = 2.0 * static_cast<double>(c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn);
  return m;
}

// Mann-Whitney U from average ranks. Ranks are multiples of 1/2, so the sum is
// exact and the result equals the pairwise count.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  require(scores.size() == labels.size(), "scores and labels differ in length");
  for (double s : scores) require(!std::isnan(s), "AUC scores must not be NaN");
  double positives = 0.0;
  for (auto l : labels) positives += l ? 1.0 : 0.0;
  const double negatives = static_cast<double>(labels.size()) - positives;
  require(positives > 0.0 && negatives > 0.0, "AUC needs both classes");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]]) rank_sum += rank;
    i = j;
  }
  const double u = rank_sum - positives * (positives + 1.0) / 2.0;
  return u / (positives * negatives);
}

}  // namespace lexrisk
