#include <cmath>

#include "lexrisk/classify.hpp"
#include "lexrisk/error.hpp"

namespace lexrisk {

FeatureVector FeatureVector::raw(std::vector<double> values) {
  FeatureVector f;
  double ss = 0.0;
  for (double v : values) ss += v * v;
  f.values_ = std::move(values);
  f.norm_ = std::sqrt(ss);
  return f;
}

FeatureVector normalize(std::span<const double> raw) {
  double ss = 0.0;
  for (double v : raw) ss += v * v;
  const double norm = std::sqrt(ss);
  if (!(norm > 0.0) || !std::isfinite(norm)) fail(ErrorCode::invalid_argument, "cannot normalize a zero or non-finite vector");
  std::vector<double> unit(raw.begin(), raw.end());
  for (auto& v : unit) v /= norm;
  return FeatureVector::raw(std::move(unit));
}

FeatureVector normalize(std::span<const float> raw) {
  const std::vector<double> widened(raw.begin(), raw.end());
  return normalize(std::span<const double>(widened));
}

}  // namespace lexrisk
