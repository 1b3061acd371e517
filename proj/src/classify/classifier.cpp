#include <cmath>

#include "lexrisk/error.hpp"
#include "solvers.hpp"

namespace lexrisk {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double stable_sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

bool is_svm(ClassifierKind kind) { return kind == ClassifierKind::svm_linear || kind == ClassifierKind::svm_rbf; }

void check_threshold(double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) fail(ErrorCode::invalid_argument, "threshold must lie in [0, 1]");
}

void check_dim(const CategoryClassifier& c, const FeatureVector& x) {
  if (x.size() != c.dim())
    fail(ErrorCode::invalid_argument,
         "feature dimension " + std::to_string(x.size()) + " does not match classifier dimension " +
             std::to_string(c.dim()));
}

}  // namespace

std::string_view to_string(ClassifierKind kind) noexcept {
  switch (kind) {
    case ClassifierKind::svm_linear: return "svm-linear";
    case ClassifierKind::svm_rbf: return "svm-rbf";
    case ClassifierKind::nb_gaussian: return "nb-gaussian";
    case ClassifierKind::nb_bernoulli: return "nb-bernoulli";
  }
  return "unknown";
}

ClassifierKind classifier_kind_from_string(std::string_view s) {
  if (s == "svm-linear" || s == "svm" || s == "linear") return ClassifierKind::svm_linear;
  if (s == "svm-rbf" || s == "rbf") return ClassifierKind::svm_rbf;
  if (s == "nb-gaussian" || s == "gaussian") return ClassifierKind::nb_gaussian;
  if (s == "nb-bernoulli" || s == "bernoulli") return ClassifierKind::nb_bernoulli;
  fail(ErrorCode::invalid_argument, "unknown classifier kind: " + std::string(s));
}

CategoryClassifier::CategoryClassifier(std::string category, ClassifierKind kind, std::size_t dim, Params params,
                                       Calibrator calibrator, double threshold, double c)
    : category_(std::move(category)),
      kind_(kind),
      dim_(dim),
      params_(std::move(params)),
      calibrator_(calibrator),
      threshold_(threshold),
      c_(c) {
  check_threshold(threshold);
  require(calibrator.slope > 0.0, "calibrator slope must be positive");
}

CategoryClassifier CategoryClassifier::degenerate(std::string category, ClassifierKind kind, std::size_t dim,
                                                  bool label, double threshold, double c) {
  check_threshold(threshold);
  CategoryClassifier out;
  out.category_ = std::move(category);
  out.kind_ = kind;
  out.dim_ = dim;
  out.threshold_ = threshold;
  out.c_ = c;
  out.constant_ = label;
  switch (kind) {
    case ClassifierKind::svm_linear: out.params_ = LinearSvm{}; break;
    case ClassifierKind::svm_rbf: out.params_ = RbfSvm{}; break;
    case ClassifierKind::nb_gaussian: out.params_ = GaussianNb{}; break;
    case ClassifierKind::nb_bernoulli: out.params_ = BernoulliNb{}; break;
  }
  return out;
}

// A constant classifier has no margin; it scores 0 and its probability is
// pinned to the label.
double CategoryClassifier::score(const FeatureVector& x) const {
  check_dim(*this, x);
  if (constant_) return 0.0;
  const auto v = x.values();
  return std::visit(
      overloaded{
          [&](const LinearSvm& m) { return detail::linear_margin(m, v); },
          [&](const RbfSvm& m) { return detail::rbf_margin(m, v); },
          [&](const GaussianNb& m) {
            const auto l = detail::class_log_joint(m, v);
            return l[1] - l[0];
          },
          [&](const BernoulliNb& m) {
            const auto l = detail::class_log_joint(m, v);
            return l[1] - l[0];
          },
      },
      params_);
}

CategoryClassifier train_classifier(ClassifierKind kind, std::string category, const std::vector<FeatureVector>& x,
                                    const Labels& y, const ClassifierParams& params,
                                    const LabeledFeatures* calibration) {
  require(!x.empty(), "cannot train a classifier on no examples");
  require(x.size() == y.size(), "features and labels differ in length");
  const std::size_t dim = x.front().size();
  require(dim > 0, "feature vectors are empty");
  for (const auto& f : x) require(f.size() == dim, "feature vectors differ in dimension");
  require(params.c > 0.0, "C must be positive");
  check_threshold(params.threshold);

  std::size_t positives = 0;
  for (auto l : y) positives += l ? 1 : 0;
  if (positives == 0 || positives == y.size())
    return CategoryClassifier::degenerate(std::move(category), kind, dim, positives > 0, params.threshold, params.c);

  CategoryClassifier::Params fitted;
  switch (kind) {
    case ClassifierKind::svm_linear: fitted = detail::fit_linear_svm(x, y, params); break;
    case ClassifierKind::svm_rbf: fitted = detail::fit_rbf_svm(x, y, params); break;
    case ClassifierKind::nb_gaussian: fitted = detail::fit_gaussian_nb(x, y, params); break;
    case ClassifierKind::nb_bernoulli: fitted = detail::fit_bernoulli_nb(x, y, params); break;
  }
  CategoryClassifier out(std::move(category), kind, dim, std::move(fitted), Calibrator{}, params.threshold, params.c);
  if (!is_svm(kind)) return out;

  const std::vector<FeatureVector>* cx = &x;
  const Labels* cy = &y;
  if (calibration != nullptr) {
    require(calibration->x.size() == calibration->y.size(), "calibration features and labels differ in length");
    std::size_t cal_pos = 0;
    for (auto l : calibration->y) cal_pos += l ? 1 : 0;
    if (cal_pos > 0 && cal_pos < calibration->y.size()) {
      cx = &calibration->x;
      cy = &calibration->y;
    }
  }
  std::vector<double> scores;
  scores.reserve(cx->size());
  for (const auto& f : *cx) scores.push_back(out.score(f));
  return CategoryClassifier(out.category(), kind, dim, out.params(), fit_calibrator(scores, *cy), params.threshold,
                            params.c);
}

std::array<double, 2> class_posteriors(const CategoryClassifier& classifier, const FeatureVector& x) {
  check_dim(classifier, x);
  if (auto label = classifier.constant_label()) return *label ? std::array{0.0, 1.0} : std::array{1.0, 0.0};
  const double s = classifier.score(x);
  if (is_svm(classifier.kind())) {
    const double p = classifier.calibrator()(s);
    return {1.0 - p, p};
  }
  return {stable_sigmoid(-s), stable_sigmoid(s)};
}

double predict_proba(const CategoryClassifier& classifier, const FeatureVector& x) {
  return class_posteriors(classifier, x)[1];
}

Decision decide(const CategoryClassifier& classifier, const FeatureVector& x, double threshold) {
  check_threshold(threshold);
  return predict_proba(classifier, x) >= threshold ? Decision::flagged : Decision::not_flagged;
}

Decision decide(const CategoryClassifier& classifier, const FeatureVector& x) {
  return decide(classifier, x, classifier.threshold());
}

double hinge_loss(const CategoryClassifier& classifier, const std::vector<FeatureVector>& x, const Labels& y) {
  require(is_svm(classifier.kind()), "hinge loss is defined for SVM classifiers only");
  require(x.size() == y.size(), "features and labels differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double yi = y[i] ? 1.0 : -1.0;
    total += std::max(0.0, 1.0 - yi * classifier.score(x[i]));
  }
  return total;
}

}  // namespace lexrisk
