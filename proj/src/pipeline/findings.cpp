#include <fmt/format.h>

#include <algorithm>
#include <fstream>

#include "lexrisk/error.hpp"
#include "lexrisk/pipeline.hpp"
#include "lexrisk/wire.hpp"

namespace lexrisk {

std::string_view to_string(FindingStatus s) noexcept {
  switch (s) {
    case FindingStatus::pending: return "pending";
    case FindingStatus::accepted: return "accepted";
    case FindingStatus::rejected: return "rejected";
  }
  return "pending";
}

std::string_view to_string(Verdict v) noexcept { return v == Verdict::accept ? "accept" : "reject"; }

FindingStatus finding_status_from_string(std::string_view s) {
  if (s == "pending") return FindingStatus::pending;
  if (s == "accepted") return FindingStatus::accepted;
  if (s == "rejected") return FindingStatus::rejected;
  fail(ErrorCode::bad_format, "unknown finding status: " + std::string(s));
}

Verdict verdict_from_string(std::string_view s) {
  if (s == "accept") return Verdict::accept;
  if (s == "reject" || s == "decline") return Verdict::reject;
  fail(ErrorCode::invalid_argument, "verdict must be accept or reject, got: " + std::string(s));
}

void to_json(nlohmann::json& j, const Finding& f) {
  j = nlohmann::json{{"finding_id", f.finding_id},
                     {"doc_id", f.doc_id},
                     {"paragraph_id", f.paragraph_id},
                     {"paragraph_index", f.paragraph_index},
                     {"paragraph_text", f.paragraph_text},
                     {"category", f.category},
                     {"probability", f.probability},
                     {"status", to_string(f.status)},
                     {"comment", f.comment},
                     {"model_version", f.model_version}};
}

void from_json(const nlohmann::json& j, Finding& f) {
  f.finding_id = j.at("finding_id").get<std::string>();
  f.doc_id = j.at("doc_id").get<std::string>();
  f.paragraph_id = j.at("paragraph_id").get<std::string>();
  f.paragraph_index = j.at("paragraph_index").get<std::size_t>();
  f.paragraph_text = j.at("paragraph_text").get<std::string>();
  f.category = j.at("category").get<std::string>();
  f.probability = j.at("probability").get<double>();
  f.status = finding_status_from_string(j.at("status").get<std::string>());
  f.comment = j.value("comment", std::string{});
  f.model_version = j.at("model_version").get<std::string>();
}

void to_json(nlohmann::json& j, const AnalysisWarning& w) {
  j = nlohmann::json{{"paragraph_id", w.paragraph_id},
                     {"paragraph_index", w.paragraph_index},
                     {"category", w.category},
                     {"message", w.message}};
}

void from_json(const nlohmann::json& j, AnalysisWarning& w) {
  w.paragraph_id = j.at("paragraph_id").get<std::string>();
  w.paragraph_index = j.at("paragraph_index").get<std::size_t>();
  w.category = j.at("category").get<std::string>();
  w.message = j.at("message").get<std::string>();
}

std::string finding_id_for(std::string_view doc_id, std::string_view paragraph_id, std::string_view model_tag) {
  std::uint64_t h = fnv1a(doc_id);
  h = fnv1a("\x1f", h);
  h = fnv1a(paragraph_id, h);
  h = fnv1a("\x1f", h);
  h = fnv1a(model_tag, h);
  return fmt::format("f-{:016x}", h);
}

Analysis analyze_document(std::string_view doc_id, const std::vector<DocumentParagraph>& paragraphs,
                          const std::vector<std::shared_ptr<const ModelBundle>>& models, double threshold) {
  require(threshold >= 0.0 && threshold <= 1.0, "threshold must lie in [0, 1]");
  Analysis out;
  out.doc_id = std::string(doc_id);
  for (const auto& model : models) {
    require(model != nullptr, "missing model bundle");
    const auto tag = model->tag();
    out.scored.push_back({model->category, tag});
    std::vector<Finding> found;
    for (std::size_t i = 0; i < paragraphs.size(); ++i) {
      const auto& para = paragraphs[i];
      FeatureVector x;
      try {
        x = embed_text(model->embedding, para.text);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::uninferable) throw;
        out.warnings.push_back({para.paragraph_id, i, model->category,
                                "no token of this paragraph is in the " + tag + " vocabulary"});
        continue;
      }
      const double p = predict_proba(model->classifier, x);
      if (p < threshold) continue;
      Finding f;
      f.finding_id = finding_id_for(doc_id, para.paragraph_id, tag);
      f.doc_id = out.doc_id;
      f.paragraph_id = para.paragraph_id;
      f.paragraph_index = i;
      f.paragraph_text = para.text;
      f.category = model->category;
      f.probability = p;
      f.model_version = tag;
      found.push_back(std::move(f));
    }
    std::stable_sort(found.begin(), found.end(),
                     [](const Finding& a, const Finding& b) { return a.probability > b.probability; });
    for (auto& f : found) out.findings.push_back(std::move(f));
  }
  return out;
}

FindingStore::FindingStore(std::filesystem::path path) : path_(std::move(path)) { load(); }

void FindingStore::write_event(const std::string& line) {
  if (!path_) return;
  std::ofstream out(*path_, std::ios::binary | std::ios::app);
  out << line << '\n';
  out.flush();
  if (!out) fail(ErrorCode::io, "cannot append to " + path_->string());
}

void FindingStore::load() {
  std::ifstream in(*path_, std::ios::binary);
  if (!in) return;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto event = j.at("event").get<std::string>();
      if (event == "analysis") {
        auto& ids = by_document_[j.at("doc_id").get<std::string>()];
        ids.clear();
        for (const auto& fj : j.at("findings")) {
          auto f = fj.get<Finding>();
          ids.push_back(f.finding_id);
          findings_.try_emplace(f.finding_id, std::move(f));
        }
      } else if (event == "review") {
        auto& f = findings_.at(j.at("finding_id").get<std::string>());
        f.status = finding_status_from_string(j.at("status").get<std::string>());
        f.comment = j.at("comment").get<std::string>();
      } else {
        fail(ErrorCode::bad_format, "unknown finding event " + event);
      }
    } catch (const std::exception& e) {
      fail(ErrorCode::bad_format, fmt::format("{}:{}: {}", path_->string(), n, e.what()));
    }
  }
}

std::vector<Finding> FindingStore::put_analysis(const Analysis& analysis) {
  std::unique_lock lock(mutex_);
  write_event(nlohmann::json{{"event", "analysis"}, {"doc_id", analysis.doc_id}, {"findings", analysis.findings}}
                  .dump());
  auto& ids = by_document_[analysis.doc_id];
  ids.clear();
  std::vector<Finding> out;
  for (const auto& f : analysis.findings) {
    ids.push_back(f.finding_id);
    out.push_back(findings_.try_emplace(f.finding_id, f).first->second);
  }
  return out;
}

Finding FindingStore::get(std::string_view finding_id) const {
  std::shared_lock lock(mutex_);
  const auto it = findings_.find(finding_id);
  if (it == findings_.end()) fail(ErrorCode::not_found, "unknown finding " + std::string(finding_id));
  return it->second;
}

std::vector<Finding> FindingStore::for_document(std::string_view doc_id) const {
  std::shared_lock lock(mutex_);
  std::vector<Finding> out;
  if (const auto it = by_document_.find(doc_id); it != by_document_.end())
    for (const auto& id : it->second) out.push_back(findings_.find(id)->second);
  return out;
}

bool FindingStore::analyzed(std::string_view doc_id) const {
  std::shared_lock lock(mutex_);
  return by_document_.find(doc_id) != by_document_.end();
}

Finding FindingStore::review(std::string_view finding_id, Verdict verdict, std::string comment) {
  std::unique_lock lock(mutex_);
  const auto it = findings_.find(finding_id);
  if (it == findings_.end()) fail(ErrorCode::not_found, "unknown finding " + std::string(finding_id));
  auto& f = it->second;
  if (f.status != FindingStatus::pending)
    fail(ErrorCode::already_reviewed, fmt::format("finding {} is already {}", f.finding_id, to_string(f.status)));
  const auto status = verdict == Verdict::accept ? FindingStatus::accepted : FindingStatus::rejected;
  write_event(nlohmann::json{{"event", "review"},
                             {"finding_id", f.finding_id},
                             {"status", to_string(status)},
                             {"comment", comment}}
                  .dump());
  f.status = status;
  f.comment = std::move(comment);
  return f;
}

}  // namespace lexrisk
