#include "lexrisk/pipeline.hpp"

#include "lexrisk/error.hpp"

namespace lexrisk {

Pipeline::Pipeline(CategoryRegistry categories, PipelineOptions options)
    : categories_(std::move(categories)),
      options_(std::move(options)),
      clock_(options_.clock ? options_.clock : system_clock()) {
  if (const auto& dir = options_.state_dir) {
    std::filesystem::create_directories(*dir);
    store_ = std::make_unique<TrainingStore>(*dir / "store.jsonl");
    registry_ = std::make_unique<ModelRegistry>(*dir / "models");
    findings_ = std::make_unique<FindingStore>(*dir / "findings.jsonl");
  } else {
    store_ = std::make_unique<TrainingStore>();
    registry_ = std::make_unique<ModelRegistry>();
    findings_ = std::make_unique<FindingStore>();
  }
}

std::size_t Pipeline::seed(const DatasetSplit& split) {
  for (const auto& name : split.categories.names())
    if (!categories_.contains(name)) fail(ErrorCode::unknown_category, "seed data uses unregistered category " + name);
  return store_->seed(split, clock_());
}

std::mutex& Pipeline::retrain_lock(std::string_view category) {
  std::lock_guard guard(lock_map_mutex_);
  auto it = retrain_locks_.find(category);
  if (it == retrain_locks_.end())
    it = retrain_locks_.emplace(std::string(category), std::make_unique<std::mutex>()).first;
  return *it->second;
}

std::shared_ptr<const ModelBundle> Pipeline::retrain(std::string_view category) {
  if (!categories_.contains(category))
    fail(ErrorCode::unknown_category, "unregistered category " + std::string(category));
  std::lock_guard guard(retrain_lock(category));
  const auto train = store_->examples(category, SplitPart::train);
  if (train.empty())
    fail(ErrorCode::insufficient_data, "the training store holds no training records for " + std::string(category));
  const auto validation = store_->examples(category, SplitPart::validation);
  auto model = train_end_to_end(std::string(category), train, validation, options_.config);
  return registry_->publish(std::string(category), std::move(model), clock_());
}

Analysis Pipeline::analyze(std::string_view doc_id, const std::vector<DocumentParagraph>& paragraphs,
                           std::vector<std::string> categories, double threshold) {
  require(threshold >= 0.0 && threshold <= 1.0, "threshold must lie in [0, 1]");
  if (categories.empty()) {
    for (const auto& c : categories_.names())
      if (registry_->has_model(c)) categories.push_back(c);
    if (categories.empty()) fail(ErrorCode::no_model, "no category has a published model");
  }
  std::vector<std::shared_ptr<const ModelBundle>> models;
  for (const auto& c : categories) {
    if (!categories_.contains(c)) fail(ErrorCode::unknown_category, "unregistered category " + c);
    models.push_back(registry_->get(c));
  }
  auto analysis = analyze_document(doc_id, paragraphs, models, threshold);
  analysis.findings = findings_->put_analysis(analysis);
  return analysis;
}

Finding Pipeline::record_review(std::string_view finding_id, Verdict verdict, std::string comment) {
  // One writer at a time so the pending check, the store append and the status
  // change cannot interleave with another review of the same finding.
  std::lock_guard guard(review_mutex_);
  const auto finding = findings_->get(finding_id);
  if (finding.status != FindingStatus::pending)
    fail(ErrorCode::already_reviewed, "finding " + finding.finding_id + " is already " +
                                          std::string(to_string(finding.status)));
  StoreRecord rec;
  rec.paragraph_id = finding.paragraph_id;
  rec.doc_id = finding.doc_id;
  rec.text = finding.paragraph_text;
  rec.category = finding.category;
  rec.label = verdict == Verdict::accept;
  rec.origin = verdict == Verdict::accept ? Origin::review_accept : Origin::review_reject;
  rec.split = SplitPart::train;
  rec.timestamp = clock_();
  rec.finding_id = finding.finding_id;
  store_->append(std::move(rec));
  return findings_->review(finding_id, verdict, std::move(comment));
}

StoreRecord Pipeline::add_manual_example(std::string text, std::string_view category, bool label,
                                         std::string doc_id) {
  if (!categories_.contains(category))
    fail(ErrorCode::unknown_category, "unregistered category " + std::string(category));
  if (tokenize(text).empty()) fail(ErrorCode::empty_document, "manual example has no text");
  StoreRecord rec;
  rec.doc_id = std::move(doc_id);
  rec.text = std::move(text);
  rec.category = std::string(category);
  rec.label = label;
  rec.origin = Origin::manual_add;
  rec.split = SplitPart::train;
  rec.timestamp = clock_();
  return store_->append(std::move(rec));
}

}  // namespace lexrisk
