#include <chrono>
#include <fstream>

#include "lexrisk/error.hpp"
#include "lexrisk/pipeline.hpp"
#include "lexrisk/wire.hpp"

namespace lexrisk {

Clock system_clock() {
  return [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
}

std::string_view to_string(Origin o) noexcept {
  switch (o) {
    case Origin::seed_data: return "seed-data";
    case Origin::review_accept: return "review-accept";
    case Origin::review_reject: return "review-reject";
    case Origin::manual_add: return "manual-add";
  }
  return "seed-data";
}

Origin origin_from_string(std::string_view s) {
  if (s == "seed-data") return Origin::seed_data;
  if (s == "review-accept") return Origin::review_accept;
  if (s == "review-reject") return Origin::review_reject;
  if (s == "manual-add") return Origin::manual_add;
  fail(ErrorCode::bad_format, "unknown record origin: " + std::string(s));
}

void to_json(nlohmann::json& j, const StoreRecord& r) {
  j = nlohmann::json{{"seq", r.seq},
                     {"paragraph_id", r.paragraph_id},
                     {"doc_id", r.doc_id},
                     {"text", r.text},
                     {"category", r.category},
                     {"label", r.label},
                     {"origin", to_string(r.origin)},
                     {"split", to_string(r.split)},
                     {"timestamp", r.timestamp},
                     {"finding_id", r.finding_id}};
}

void from_json(const nlohmann::json& j, StoreRecord& r) {
  r.seq = j.at("seq").get<std::uint64_t>();
  r.paragraph_id = j.at("paragraph_id").get<std::string>();
  r.doc_id = j.at("doc_id").get<std::string>();
  r.text = j.at("text").get<std::string>();
  r.category = j.at("category").get<std::string>();
  r.label = j.at("label").get<bool>();
  r.origin = origin_from_string(j.at("origin").get<std::string>());
  r.split = split_part_from_string(j.at("split").get<std::string>());
  r.timestamp = j.at("timestamp").get<std::int64_t>();
  r.finding_id = j.value("finding_id", std::string{});
}

std::string store_record_to_json(const StoreRecord& r) { return nlohmann::json(r).dump(); }

StoreRecord store_record_from_json(std::string_view line) {
  try {
    return nlohmann::json::parse(line).get<StoreRecord>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::bad_format, std::string("bad store record: ") + e.what());
  }
}

TrainingStore::TrainingStore(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(*path_, std::ios::binary);
  if (!in) return;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto r = store_record_from_json(line);
    if (r.seq != records_.size())
      fail(ErrorCode::bad_format, path_->string() + ":" + std::to_string(n) + ": sequence gap in training store");
    records_.push_back(std::move(r));
  }
}

StoreRecord TrainingStore::append(StoreRecord record) {
  require(!record.category.empty(), "store record without a category");
  std::unique_lock lock(mutex_);
  record.seq = records_.size();
  if (record.paragraph_id.empty()) record.paragraph_id = "rec-" + std::to_string(record.seq);
  if (path_) {
    std::ofstream out(*path_, std::ios::binary | std::ios::app);
    out << store_record_to_json(record) << '\n';
    out.flush();
    if (!out) fail(ErrorCode::io, "cannot append to " + path_->string());
  }
  records_.push_back(record);
  return record;
}

std::size_t TrainingStore::seed(const DatasetSplit& split, std::int64_t timestamp) {
  std::size_t added = 0;
  for (auto part : {SplitPart::train, SplitPart::validation, SplitPart::test}) {
    for (const auto& r : split.part(part)) {
      const auto& p = split.paragraphs[r.paragraph];
      StoreRecord rec;
      rec.paragraph_id = p.paragraph_id;
      rec.doc_id = p.doc_id;
      rec.text = p.raw_text;
      rec.category = r.category;
      rec.label = r.label;
      rec.origin = Origin::seed_data;
      rec.split = part;
      rec.timestamp = timestamp;
      append(std::move(rec));
      ++added;
    }
  }
  return added;
}

std::size_t TrainingStore::size() const {
  std::shared_lock lock(mutex_);
  return records_.size();
}

std::vector<StoreRecord> TrainingStore::records() const {
  std::shared_lock lock(mutex_);
  return records_;
}

std::vector<TrainingExample> TrainingStore::examples(std::string_view category, SplitPart part) const {
  std::shared_lock lock(mutex_);
  std::vector<TrainingExample> out;
  for (const auto& r : records_)
    if (r.category == category && r.split == part) out.push_back({r.paragraph_id, r.text, r.label});
  return out;
}

LabelCounts TrainingStore::counts(std::string_view category, SplitPart part) const {
  std::shared_lock lock(mutex_);
  LabelCounts c;
  for (const auto& r : records_)
    if (r.category == category && r.split == part) ++(r.label ? c.positives : c.negatives);
  return c;
}

std::size_t TrainingStore::count_for(std::string_view category) const {
  std::shared_lock lock(mutex_);
  std::size_t n = 0;
  for (const auto& r : records_) n += r.category == category;
  return n;
}

}  // namespace lexrisk
