#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lexrisk/error.hpp"
#include "lexrisk/random.hpp"
#include "solvers.hpp"

namespace lexrisk::detail {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double projected_gradient(double g, double alpha, double c) {
  if (alpha <= 0.0) return std::min(g, 0.0);
  if (alpha >= c) return std::max(g, 0.0);
  return g;
}

}  // namespace

// Dual coordinate descent for the L1-loss SVM. The bias is an extra feature
// fixed at 1, so it is regularized along with the weights.
LinearSvm fit_linear_svm(const std::vector<FeatureVector>& x, const Labels& y, const ClassifierParams& params) {
  const std::size_t n = x.size();
  const std::size_t d = x.front().size();
  const double c = params.c;

  LinearSvm m;
  m.weights.assign(d, 0.0);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> qii(n);
  for (std::size_t i = 0; i < n; ++i) qii[i] = dot(x[i].values(), x[i].values()) + 1.0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(params.seed);

  for (std::uint32_t sweep = 0; sweep < params.max_sweeps; ++sweep) {
    rng.shuffle(order.begin(), order.end());
    double max_pg = -std::numeric_limits<double>::infinity();
    double min_pg = std::numeric_limits<double>::infinity();
    for (auto i : order) {
      const double yi = y[i] ? 1.0 : -1.0;
      const auto xi = x[i].values();
      const double g = yi * (dot(m.weights, xi) + m.bias) - 1.0;
      const double pg = projected_gradient(g, alpha[i], c);
      max_pg = std::max(max_pg, pg);
      min_pg = std::min(min_pg, pg);
      if (pg == 0.0) continue;
      const double old = alpha[i];
      alpha[i] = std::clamp(old - g / qii[i], 0.0, c);
      const double step = (alpha[i] - old) * yi;
      if (step == 0.0) continue;
      for (std::size_t j = 0; j < d; ++j) m.weights[j] += step * xi[j];
      m.bias += step;
    }
    if (max_pg - min_pg <= params.tolerance) break;
  }
  return m;
}

double linear_margin(const LinearSvm& m, std::span<const double> x) { return dot(m.weights, x) + m.bias; }

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    d2 += t * t;
  }
  return std::exp(-gamma * d2);
}

// Same solver in kernel form; the constant feature turns into K + 1.
RbfSvm fit_rbf_svm(const std::vector<FeatureVector>& x, const Labels& y, const ClassifierParams& params) {
  const std::size_t n = x.size();
  const std::size_t d = x.front().size();
  const double c = params.c;
  const double gamma = params.gamma.value_or(1.0 / static_cast<double>(d));
  require(gamma > 0.0, "RBF gamma must be positive");

  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      k[i * n + j] = k[j * n + i] = rbf_kernel(x[i].values(), x[j].values(), gamma) + 1.0;

  std::vector<double> alpha(n, 0.0);
  std::vector<double> f(n, 0.0);  // sum_j alpha_j y_j K(j, i)
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(params.seed);

  for (std::uint32_t sweep = 0; sweep < params.max_sweeps; ++sweep) {
    rng.shuffle(order.begin(), order.end());
    double max_pg = -std::numeric_limits<double>::infinity();
    double min_pg = std::numeric_limits<double>::infinity();
    for (auto i : order) {
      const double yi = y[i] ? 1.0 : -1.0;
      const double g = yi * f[i] - 1.0;
      const double pg = projected_gradient(g, alpha[i], c);
      max_pg = std::max(max_pg, pg);
      min_pg = std::min(min_pg, pg);
      if (pg == 0.0) continue;
      const double old = alpha[i];
      alpha[i] = std::clamp(old - g / k[i * n + i], 0.0, c);
      const double step = (alpha[i] - old) * yi;
      if (step == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) f[j] += step * k[i * n + j];
    }
    if (max_pg - min_pg <= params.tolerance) break;
  }

  RbfSvm m;
  m.gamma = gamma;
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] <= 0.0) continue;
    const double coef = alpha[i] * (y[i] ? 1.0 : -1.0);
    m.support.emplace_back(x[i].values().begin(), x[i].values().end());
    m.coefficients.push_back(coef);
    m.bias += coef;
  }
  return m;
}

double rbf_margin(const RbfSvm& m, std::span<const double> x) {
  double s = m.bias;
  for (std::size_t i = 0; i < m.support.size(); ++i) s += m.coefficients[i] * rbf_kernel(m.support[i], x, m.gamma);
  return s;
}

}  // namespace lexrisk::detail
