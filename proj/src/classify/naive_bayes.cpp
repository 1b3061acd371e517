#include <cmath>
#include <numbers>

#include "lexrisk/error.hpp"
#include "solvers.hpp"

namespace lexrisk::detail {

GaussianNb fit_gaussian_nb(const std::vector<FeatureVector>& x, const Labels& y, const ClassifierParams& params) {
  require(params.variance_floor > 0.0, "variance floor must be positive");
  const std::size_t d = x.front().size();
  GaussianNb m;
  std::array<double, 2> count{};
  for (int c = 0; c < 2; ++c) {
    m.means[c].assign(d, 0.0);
    m.variances[c].assign(d, 0.0);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int c = y[i] ? 1 : 0;
    count[c] += 1.0;
    for (std::size_t j = 0; j < d; ++j) m.means[c][j] += x[i][j];
  }
  for (int c = 0; c < 2; ++c)
    for (auto& v : m.means[c]) v /= count[c];
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int c = y[i] ? 1 : 0;
    for (std::size_t j = 0; j < d; ++j) {
      const double t = x[i][j] - m.means[c][j];
      m.variances[c][j] += t * t;
    }
  }
  for (int c = 0; c < 2; ++c) {
    for (auto& v : m.variances[c]) v = std::max(v / count[c], params.variance_floor);
    m.priors[c] = count[c] / static_cast<double>(x.size());
  }
  return m;
}

std::array<double, 2> class_log_joint(const GaussianNb& m, std::span<const double> x) {
  std::array<double, 2> out{};
  for (int c = 0; c < 2; ++c) {
    double s = std::log(m.priors[c]);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double var = m.variances[c][j];
      const double t = x[j] - m.means[c][j];
      s -= 0.5 * (std::log(2.0 * std::numbers::pi * var) + t * t / var);
    }
    out[c] = s;
  }
  return out;
}

BernoulliNb fit_bernoulli_nb(const std::vector<FeatureVector>& x, const Labels& y, const ClassifierParams& params) {
  require(params.smoothing > 0.0, "Laplace smoothing must be positive");
  const std::size_t d = x.front().size();
  BernoulliNb m;
  std::array<double, 2> count{};
  for (int c = 0; c < 2; ++c) m.rates[c].assign(d, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int c = y[i] ? 1 : 0;
    count[c] += 1.0;
    for (std::size_t j = 0; j < d; ++j)
      if (x[i][j] > 0.0) m.rates[c][j] += 1.0;
  }
  const double a = params.smoothing;
  for (int c = 0; c < 2; ++c) {
    for (auto& r : m.rates[c]) r = (r + a) / (count[c] + 2.0 * a);
    m.priors[c] = count[c] / static_cast<double>(x.size());
  }
  return m;
}

std::array<double, 2> class_log_joint(const BernoulliNb& m, std::span<const double> x) {
  std::array<double, 2> out{};
  for (int c = 0; c < 2; ++c) {
    double s = std::log(m.priors[c]);
    for (std::size_t j = 0; j < x.size(); ++j)
      s += x[j] > 0.0 ? std::log(m.rates[c][j]) : std::log1p(-m.rates[c][j]);
    out[c] = s;
  }
  return out;
}

}  // namespace lexrisk::detail
