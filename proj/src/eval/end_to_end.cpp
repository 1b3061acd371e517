#include <unordered_map>

#include "lexrisk/error.hpp"
#include "lexrisk/eval.hpp"

namespace lexrisk {

const std::vector<TrainingExample>& CategoryData::part(SplitPart p) const {
  switch (p) {
    case SplitPart::train: return train;
    case SplitPart::validation: return validation;
    case SplitPart::test: return test;
  }
  return train;
}

CategoryData category_data(const DatasetSplit& split, std::string_view category) {
  if (!split.categories.contains(category))
    fail(ErrorCode::unknown_category, "category not in dataset: " + std::string(category));
  CategoryData out;
  out.category = std::string(category);
  for (auto p : {SplitPart::train, SplitPart::validation, SplitPart::test}) {
    auto& dest = p == SplitPart::train ? out.train : p == SplitPart::validation ? out.validation : out.test;
    for (const auto& r : split.records_for(p, category)) {
      const auto& para = split.paragraphs[r.paragraph];
      dest.push_back({para.paragraph_id, para.raw_text, r.label});
    }
  }
  return out;
}

std::uint64_t inference_seed(const EmbeddingModel& model, std::string_view text) {
  return derive_seed(model.hyperparams().seed, fnv1a(text));
}

FeatureVector embed_text(const EmbeddingModel& model, std::string_view text) {
  const auto tokens = model.vocab().encode(tokenize(text, model.hyperparams().lowercase));
  InferOptions opts;
  opts.seed = inference_seed(model, text);
  const auto v = infer_vector(model, tokens, opts);
  return normalize(std::span<const float>(v));
}

EndToEndModel train_end_to_end(std::string category, const std::vector<TrainingExample>& train,
                               const std::vector<TrainingExample>& validation, const EndToEndConfig& config) {
  require(!train.empty(), "no training examples for " + category);
  const auto& hp = config.embedding;
  hp.validate();

  // One doc vector per distinct text; repeated texts share it.
  std::unordered_map<std::string, std::size_t> row_of;
  std::vector<std::string> texts;
  std::vector<std::string> ids;
  std::vector<std::size_t> rows;
  rows.reserve(train.size());
  for (const auto& ex : train) {
    auto [it, fresh] = row_of.try_emplace(ex.text, texts.size());
    if (fresh) {
      texts.push_back(ex.text);
      ids.push_back(ex.paragraph_id);
    }
    rows.push_back(it->second);
  }

  std::vector<std::vector<std::string>> token_lists;
  token_lists.reserve(texts.size());
  for (const auto& t : texts) token_lists.push_back(tokenize(t, hp.lowercase));
  auto vocab = Vocabulary::from_tokens(token_lists, hp.min_count);
  if (vocab.empty()) fail(ErrorCode::empty_vocabulary, "no token reaches min_count in the training texts");
  std::vector<std::vector<TokenId>> docs;
  docs.reserve(texts.size());
  for (const auto& tl : token_lists) docs.push_back(vocab.encode(tl));

  EndToEndModel out;
  out.embedding = init_model(std::move(vocab), texts.size(), hp);
  out.embedding.set_doc_ids(std::move(ids));
  lexrisk::train(out.embedding, docs);

  std::vector<FeatureVector> features;
  Labels labels;
  features.reserve(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    features.push_back(normalize(out.embedding.docs().row(rows[i])));
    labels.push_back(train[i].label);
    (train[i].label ? out.train_positives : out.train_negatives) += 1;
  }

  LabeledFeatures calibration;
  for (const auto& ex : validation) {
    try {
      calibration.x.push_back(embed_text(out.embedding, ex.text));
      calibration.y.push_back(ex.label);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::uninferable) throw;
    }
  }
  out.calibration_examples = calibration.x.size();
  out.classifier = train_classifier(config.classifier, std::move(category), features, labels,
                                    config.classifier_params, &calibration);
  return out;
}

Evaluation evaluate(const EndToEndModel& model, const std::vector<TrainingExample>& examples, double threshold) {
  require(threshold >= 0.0 && threshold <= 1.0, "threshold must lie in [0, 1]");
  Evaluation ev;
  std::vector<std::uint8_t> predictions;
  for (const auto& ex : examples) {
    FeatureVector x;
    try {
      x = embed_text(model.embedding, ex.text);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::uninferable) throw;
      ++ev.skipped;
      continue;
    }
    const double p = predict_proba(model.classifier, x);
    ev.probabilities.push_back(p);
    ev.labels.push_back(ex.label);
    predictions.push_back(p >= threshold);
  }
  ev.confusion = confusion(predictions, ev.labels);
  ev.metrics = metrics(ev.confusion);
  if (ev.confusion.tp + ev.confusion.fn > 0 && ev.confusion.fp + ev.confusion.tn > 0)
    ev.auc = auc(ev.probabilities, ev.labels);
  return ev;
}

}  // namespace lexrisk
