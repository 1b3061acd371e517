#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "lexrisk/classify.hpp"
#include "lexrisk/corpus.hpp"
#include "lexrisk/embedding.hpp"
#include "lexrisk/eval.hpp"

namespace lexrisk {

/// Milliseconds since the Unix epoch. Injectable so tests control time.
using Clock = std::function<std::int64_t()>;
Clock system_clock();

// ---------------------------------------------------------------------------
// Training store

enum class Origin : std::uint8_t { seed_data, review_accept, review_reject, manual_add };

std::string_view to_string(Origin o) noexcept;
Origin origin_from_string(std::string_view s);

struct StoreRecord {
  std::uint64_t seq = 0;
  std::string paragraph_id;
  std::string doc_id;
  std::string text;
  std::string category;
  bool label = false;
  Origin origin = Origin::seed_data;
  SplitPart split = SplitPart::train;
  std::int64_t timestamp = 0;
  std::string finding_id;  // set for review records only

  friend bool operator==(const StoreRecord&, const StoreRecord&) = default;
};

struct LabelCounts {
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// Append-only labeled-example log. With a path, every append is written as
/// one JSON line before it becomes visible, and opening replays the file.
class TrainingStore {
 public:
  TrainingStore() = default;
  explicit TrainingStore(std::filesystem::path path);

  /// Assigns the next sequence number and appends.
  StoreRecord append(StoreRecord record);

  /// Appends one seed record per (paragraph, registered category) of the split.
  std::size_t seed(const DatasetSplit& split, std::int64_t timestamp);

  std::size_t size() const;
  std::vector<StoreRecord> records() const;
  std::vector<TrainingExample> examples(std::string_view category, SplitPart part) const;
  LabelCounts counts(std::string_view category, SplitPart part = SplitPart::train) const;
  std::size_t count_for(std::string_view category) const;

 private:
  mutable std::shared_mutex mutex_;
  std::optional<std::filesystem::path> path_;
  std::vector<StoreRecord> records_;
};

std::string store_record_to_json(const StoreRecord& r);
StoreRecord store_record_from_json(std::string_view line);

// ---------------------------------------------------------------------------
// Model registry

struct ModelBundle {
  std::string category;
  std::uint64_t version = 0;
  std::int64_t created_at = 0;
  EmbeddingModel embedding;
  CategoryClassifier classifier;
  std::size_t train_positives = 0;
  std::size_t train_negatives = 0;

  /// "<category>@v<version>", the tag carried by findings.
  std::string tag() const;
  std::size_t training_examples() const { return train_positives + train_negatives; }
};

/// Published bundles are immutable; publishing adds version n+1 for the
/// category. With a root directory each version is stored as
/// <root>/<category>/v<n>.model, .classifier and .json.
class ModelRegistry {
 public:
  ModelRegistry() = default;
  explicit ModelRegistry(std::filesystem::path root);

  std::shared_ptr<const ModelBundle> publish(std::string category, EndToEndModel model, std::int64_t created_at);

  /// Latest version when `version` is empty. Throws no_model.
  std::shared_ptr<const ModelBundle> get(std::string_view category,
                                         std::optional<std::uint64_t> version = std::nullopt) const;
  bool has_model(std::string_view category) const;
  std::vector<std::uint64_t> versions(std::string_view category) const;
  std::vector<std::string> categories() const;

 private:
  void load();

  mutable std::shared_mutex mutex_;
  std::optional<std::filesystem::path> root_;
  std::map<std::string, std::vector<std::shared_ptr<const ModelBundle>>, std::less<>> bundles_;
};

/// Percent-escapes everything but [A-Za-z0-9_-] so a category name is a safe
/// directory name.
std::string escape_path_component(std::string_view name);

// ---------------------------------------------------------------------------
// Findings

enum class FindingStatus : std::uint8_t { pending, accepted, rejected };
enum class Verdict : std::uint8_t { accept, reject };

std::string_view to_string(FindingStatus s) noexcept;
std::string_view to_string(Verdict v) noexcept;
FindingStatus finding_status_from_string(std::string_view s);
Verdict verdict_from_string(std::string_view s);  // "decline" reads as reject

struct Finding {
  std::string finding_id;
  std::string doc_id;
  std::string paragraph_id;
  std::size_t paragraph_index = 0;
  std::string paragraph_text;
  std::string category;
  double probability = 0.0;
  FindingStatus status = FindingStatus::pending;
  std::string comment;
  std::string model_version;

  friend bool operator==(const Finding&, const Finding&) = default;
};

struct DocumentParagraph {
  std::string paragraph_id;
  std::string text;
};

struct AnalysisWarning {
  std::string paragraph_id;
  std::size_t paragraph_index = 0;
  std::string category;
  std::string message;

  friend bool operator==(const AnalysisWarning&, const AnalysisWarning&) = default;
};

struct ScoredCategory {
  std::string category;
  std::string model_version;

  friend bool operator==(const ScoredCategory&, const ScoredCategory&) = default;
};

struct Analysis {
  std::string doc_id;
  std::vector<ScoredCategory> scored;  // one per model, in request order
  std::vector<Finding> findings;  // by category in request order, then descending probability
  std::vector<AnalysisWarning> warnings;

  friend bool operator==(const Analysis&, const Analysis&) = default;
};

/// Stable id for one (document, paragraph, category, model version).
std::string finding_id_for(std::string_view doc_id, std::string_view paragraph_id, std::string_view model_tag);

/// Pure scoring of a document against the given bundles. Paragraphs with no
/// in-vocabulary token produce a warning instead of findings.
Analysis analyze_document(std::string_view doc_id, const std::vector<DocumentParagraph>& paragraphs,
                          const std::vector<std::shared_ptr<const ModelBundle>>& models, double threshold);

/// Findings and review state, persisted as an append-only event log.
class FindingStore {
 public:
  FindingStore() = default;
  explicit FindingStore(std::filesystem::path path);

  /// Records the findings of an analysis as the current set for its document.
  /// Findings already known keep their review state.
  std::vector<Finding> put_analysis(const Analysis& analysis);

  Finding get(std::string_view finding_id) const;
  std::vector<Finding> for_document(std::string_view doc_id) const;
  bool analyzed(std::string_view doc_id) const;

  /// pending -> accepted | rejected. Throws not_found or already_reviewed.
  Finding review(std::string_view finding_id, Verdict verdict, std::string comment);

 private:
  void write_event(const std::string& line);
  void load();

  mutable std::shared_mutex mutex_;
  std::optional<std::filesystem::path> path_;
  std::map<std::string, Finding, std::less<>> findings_;
  std::map<std::string, std::vector<std::string>, std::less<>> by_document_;
};

// ---------------------------------------------------------------------------
// Reports

enum class ReportFormat { tsv, text };

std::string_view to_string(ReportFormat f) noexcept;
ReportFormat report_format_from_string(std::string_view s);

struct Report {
  std::string doc_id;
  std::string title;
  std::vector<Finding> findings;

  friend bool operator==(const Report&, const Report&) = default;
};

/// TSV: a "#document" header line, a column header, then one row per finding.
/// Tabs, newlines, carriage returns and backslashes in fields are escaped.
std::string export_report(const Report& report, ReportFormat format);
Report parse_report(std::string_view tsv);

// ---------------------------------------------------------------------------
// Orchestration

struct PipelineOptions {
  EndToEndConfig config;
  std::optional<std::filesystem::path> state_dir;  // in-memory when empty
  Clock clock;                                     // system clock when empty
};

/// The feedback loop: training store, model registry and findings, with the
/// operations that move data between them.
class Pipeline {
 public:
  Pipeline(CategoryRegistry categories, PipelineOptions options);

  const CategoryRegistry& categories() const noexcept { return categories_; }
  const EndToEndConfig& config() const noexcept { return options_.config; }
  std::int64_t now() const { return clock_(); }

  TrainingStore& store() noexcept { return *store_; }
  const TrainingStore& store() const noexcept { return *store_; }
  const ModelRegistry& registry() const noexcept { return *registry_; }
  const FindingStore& findings() const noexcept { return *findings_; }

  std::size_t seed(const DatasetSplit& split);

  /// Full retraining from the store, published as the next version.
  /// Throws unknown_category, or insufficient_data when the store holds no
  /// training records for the category.
  std::shared_ptr<const ModelBundle> retrain(std::string_view category);

  /// Scores against the latest models and records the findings. An empty
  /// category list means every registered category that has a model.
  Analysis analyze(std::string_view doc_id, const std::vector<DocumentParagraph>& paragraphs,
                   std::vector<std::string> categories, double threshold = 0.5);

  /// Updates the finding and appends exactly one store record.
  Finding record_review(std::string_view finding_id, Verdict verdict, std::string comment = {});

  StoreRecord add_manual_example(std::string text, std::string_view category, bool label,
                                 std::string doc_id = {});

 private:
  std::mutex& retrain_lock(std::string_view category);

  CategoryRegistry categories_;
  PipelineOptions options_;
  Clock clock_;
  std::unique_ptr<TrainingStore> store_;
  std::unique_ptr<ModelRegistry> registry_;
  std::unique_ptr<FindingStore> findings_;
  std::mutex review_mutex_;
  std::mutex lock_map_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>, std::less<>> retrain_locks_;
};

}  // namespace lexrisk
