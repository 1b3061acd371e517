#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lexrisk {

/// Feature values with their cached Euclidean norm.
class FeatureVector {
 public:
  FeatureVector() = default;

  /// Wraps values as given, without normalizing.
  static FeatureVector raw(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double norm() const noexcept { return norm_; }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
  double norm_ = 0.0;
};

/// Scales to unit Euclidean norm. Throws on the zero vector.
FeatureVector normalize(std::span<const double> raw);
FeatureVector normalize(std::span<const float> raw);

enum class ClassifierKind : std::uint8_t { svm_linear = 0, svm_rbf = 1, nb_gaussian = 2, nb_bernoulli = 3 };

std::string_view to_string(ClassifierKind kind) noexcept;
ClassifierKind classifier_kind_from_string(std::string_view s);

struct ClassifierParams {
  double c = 1.0;                       // SVM hinge penalty weight
  std::optional<double> gamma;          // RBF width, defaults to 1/dim
  double tolerance = 1e-6;              // SVM projected-gradient stopping gap
  std::uint32_t max_sweeps = 2000;      // SVM passes over the data
  std::uint64_t seed = 1;               // SVM coordinate order
  double variance_floor = 1e-9;         // Gaussian NB
  double smoothing = 1.0;               // Bernoulli NB Laplace alpha
  double threshold = 0.5;
};

using Labels = std::vector<std::uint8_t>;  // 1 = category applies

struct LinearSvm {
  std::vector<double> weights;
  double bias = 0.0;
};

struct RbfSvm {
  std::vector<std::vector<double>> support;
  std::vector<double> coefficients;  // alpha_i * y_i
  double bias = 0.0;
  double gamma = 1.0;
};

struct GaussianNb {
  std::array<double, 2> priors{};  // index 0 = negative class
  std::array<std::vector<double>, 2> means;
  std::array<std::vector<double>, 2> variances;
};

struct BernoulliNb {
  std::array<double, 2> priors{};
  std::array<std::vector<double>, 2> rates;  // P(feature > 0 | class)
};

/// p = sigmoid(slope * score + intercept), slope > 0.
struct Calibrator {
  double slope = 1.0;
  double intercept = 0.0;

  double operator()(double score) const;
};

/// Platt-style sigmoid fit (Newton with backtracking on smoothed targets). A
/// fit that comes out non-increasing is replaced by a near-flat increasing
/// map at the smoothed base rate.
Calibrator fit_calibrator(std::span<const double> scores, std::span<const std::uint8_t> labels);

class CategoryClassifier {
 public:
  using Params = std::variant<LinearSvm, RbfSvm, GaussianNb, BernoulliNb>;

  CategoryClassifier() = default;
  CategoryClassifier(std::string category, ClassifierKind kind, std::size_t dim, Params params,
                     Calibrator calibrator, double threshold, double c);

  /// Constant classifier for single-class training data.
  static CategoryClassifier degenerate(std::string category, ClassifierKind kind, std::size_t dim,
                                       bool label, double threshold, double c);

  const std::string& category() const noexcept { return category_; }
  ClassifierKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  const Params& params() const noexcept { return params_; }
  const Calibrator& calibrator() const noexcept { return calibrator_; }
  double threshold() const noexcept { return threshold_; }
  double c() const noexcept { return c_; }
  bool is_degenerate() const noexcept { return constant_.has_value(); }
  std::optional<bool> constant_label() const noexcept { return constant_; }

  /// Raw decision value: SVM margin, NB posterior log-odds.
  double score(const FeatureVector& x) const;

 private:
  std::string category_;
  ClassifierKind kind_ = ClassifierKind::svm_linear;
  std::size_t dim_ = 0;
  Params params_;
  Calibrator calibrator_;
  double threshold_ = 0.5;
  double c_ = 1.0;
  std::optional<bool> constant_;
};

struct LabeledFeatures {
  std::vector<FeatureVector> x;
  Labels y;
};

/// Trains one binary classifier. SVM calibrators are fit on `calibration`
/// margins when it holds both classes, otherwise on the training margins. NB
/// posteriors are exact, so their calibrator is the identity on log-odds.
CategoryClassifier train_classifier(ClassifierKind kind, std::string category,
                                    const std::vector<FeatureVector>& x, const Labels& y,
                                    const ClassifierParams& params = {},
                                    const LabeledFeatures* calibration = nullptr);

double predict_proba(const CategoryClassifier& classifier, const FeatureVector& x);

/// {P(not category), P(category)}.
std::array<double, 2> class_posteriors(const CategoryClassifier& classifier, const FeatureVector& x);

enum class Decision { not_flagged, flagged };

Decision decide(const CategoryClassifier& classifier, const FeatureVector& x, double threshold);
Decision decide(const CategoryClassifier& classifier, const FeatureVector& x);

/// Sum of max(0, 1 - y f(x)) with y in {-1, +1}. SVM kinds only.
double hinge_loss(const CategoryClassifier& classifier, const std::vector<FeatureVector>& x, const Labels& y);

// Classifier container: "LXRCLASS", format version, kind, category, dim,
// threshold, C, calibrator, degenerate flag, then kind-specific parameters as
// little-endian float64.
inline constexpr std::uint32_t kClassifierFormatVersion = 1;

std::string serialize_classifier(const CategoryClassifier& classifier);
CategoryClassifier deserialize_classifier(std::string_view bytes);

}  // namespace lexrisk
