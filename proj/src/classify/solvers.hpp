#pragma once

#include <vector>

#include "lexrisk/classify.hpp"

namespace lexrisk::detail {

LinearSvm fit_linear_svm(const std::vector<FeatureVector>& x, const Labels& y, const ClassifierParams& params);
RbfSvm fit_rbf_svm(const std::vector<FeatureVector>& x, const Labels& y, const ClassifierParams& params);
GaussianNb fit_gaussian_nb(const std::vector<FeatureVector>& x, const Labels& y, const ClassifierParams& params);
BernoulliNb fit_bernoulli_nb(const std::vector<FeatureVector>& x, const Labels& y, const ClassifierParams& params);

double linear_margin(const LinearSvm& m, std::span<const double> x);
double rbf_margin(const RbfSvm& m, std::span<const double> x);
std::array<double, 2> class_log_joint(const GaussianNb& m, std::span<const double> x);
std::array<double, 2> class_log_joint(const BernoulliNb& m, std::span<const double> x);

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

}  // namespace lexrisk::detail
