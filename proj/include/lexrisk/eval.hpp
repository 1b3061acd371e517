#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lexrisk/classify.hpp"
#include "lexrisk/corpus.hpp"
#include "lexrisk/embedding.hpp"

namespace lexrisk {

struct Confusion {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

Confusion confusion(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> labels);

/// Ratios with a zero denominator are left empty and print as "-".
struct Metrics {
  double accuracy = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;  // present only when precision and recall are
};

Metrics metrics(const Confusion& c);

/// Probability that a random positive outscores a random negative, ties
/// counted as one half. Computed from average ranks.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// ---------------------------------------------------------------------------
// End-to-end training: paragraph vectors, then one classifier on top.

struct TrainingExample {
  std::string paragraph_id;
  std::string text;
  bool label = false;
};

struct CategoryData {
  std::string category;
  std::vector<TrainingExample> train;
  std::vector<TrainingExample> validation;
  std::vector<TrainingExample> test;

  const std::vector<TrainingExample>& part(SplitPart p) const;
};

/// Per-category view of a split. Throws unknown_category when the category is
/// not registered in the dataset.
CategoryData category_data(const DatasetSplit& split, std::string_view category);

struct EndToEndConfig {
  Hyperparams embedding;
  ClassifierKind classifier = ClassifierKind::svm_linear;
  ClassifierParams classifier_params;
};

struct EndToEndModel {
  EmbeddingModel embedding;
  CategoryClassifier classifier;
  std::size_t train_positives = 0;
  std::size_t train_negatives = 0;
  std::size_t calibration_examples = 0;
};

/// Inference seed for a paragraph: depends on the text and the model seed
/// only, so a paragraph gets the same vector wherever it is scored.
std::uint64_t inference_seed(const EmbeddingModel& model, std::string_view text);

/// Inferred and normalized feature vector. Throws uninferable when no token of
/// `text` is in the vocabulary.
FeatureVector embed_text(const EmbeddingModel& model, std::string_view text);

/// Builds the vocabulary from the distinct training texts, trains paragraph
/// vectors over them, fits the classifier on the normalized trained rows, and
/// calibrates on inferred validation vectors.
EndToEndModel train_end_to_end(std::string category, const std::vector<TrainingExample>& train,
                               const std::vector<TrainingExample>& validation, const EndToEndConfig& config);

struct Evaluation {
  Confusion confusion;
  Metrics metrics;
  std::optional<double> auc;  // empty when the scored set holds one class
  std::vector<double> probabilities;
  std::vector<std::uint8_t> labels;
  std::size_t skipped = 0;  // uninferable paragraphs
};

Evaluation evaluate(const EndToEndModel& model, const std::vector<TrainingExample>& examples,
                    double threshold = 0.5);

// ---------------------------------------------------------------------------
// Hyperparameter sweeps

/// Sets one named parameter from its text form. Names: k, subsample (t),
/// window, dim, arch, objective, combine, min_count, epochs, lr, seed, c,
/// classifier, gamma.
void apply_parameter(EndToEndConfig& config, std::string_view name, std::string_view value);

struct SweepAxis {
  std::string name;
  std::vector<std::string> values;
};

struct SweepRow {
  std::vector<std::string> assignment;  // parallel to SweepReport::parameters
  std::optional<double> auc;
  Metrics metrics;
  Confusion confusion;
  std::size_t skipped = 0;
};

struct SweepReport {
  std::string category;
  SplitPart split = SplitPart::validation;
  std::vector<std::string> parameters;
  std::vector<SweepRow> rows;

  /// Aligned table: parameters, AUC, Accuracy, Precision, Recall, F1.
  std::string to_text() const;
  /// Tab-separated with a header line; values at full precision.
  std::string to_tsv() const;
};

struct SweepOptions {
  SplitPart split = SplitPart::validation;
  double threshold = 0.5;
};

/// One row per point of the cartesian product of the axes, first axis
/// slowest. Every point starts from `base` with the same seeds, so a row
/// depends only on its own assignment.
SweepReport sweep(const std::vector<SweepAxis>& grid, const DatasetSplit& dataset, std::string_view category,
                  const EndToEndConfig& base, const SweepOptions& options = {});
SweepReport sweep(const std::vector<SweepAxis>& grid, const CategoryData& data, const EndToEndConfig& base,
                  const SweepOptions& options = {});

}  // namespace lexrisk
