#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <nlohmann/json.hpp>

#include "lexrisk/binary_io.hpp"
#include "lexrisk/error.hpp"
#include "lexrisk/pipeline.hpp"

namespace lexrisk {

namespace fs = std::filesystem;

namespace {

// Write-then-rename so a reader never sees a partial file.
void write_atomically(const fs::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  io::write_file(tmp.string(), bytes);
  fs::rename(tmp, path);
}

}  // namespace

std::string ModelBundle::tag() const { return fmt::format("{}@v{}", category, version); }

std::string escape_path_component(std::string_view name) {
  std::string out;
  for (unsigned char c : name) {
    if (std::isalnum(c) || c == '_' || c == '-')
      out.push_back(static_cast<char>(c));
    else
      out += fmt::format("%{:02X}", c);
  }
  return out;
}

ModelRegistry::ModelRegistry(fs::path root) : root_(std::move(root)) {
  fs::create_directories(*root_);
  load();
}

void ModelRegistry::load() {
  for (const auto& dir : fs::directory_iterator(*root_)) {
    if (!dir.is_directory()) continue;
    for (const auto& entry : fs::directory_iterator(dir.path())) {
      if (entry.path().extension() != ".json") continue;
      nlohmann::json meta;
      try {
        meta = nlohmann::json::parse(io::read_file(entry.path().string()));
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::bad_format, entry.path().string() + ": " + e.what());
      }
      auto bundle = std::make_shared<ModelBundle>();
      bundle->category = meta.at("category").get<std::string>();
      bundle->version = meta.at("version").get<std::uint64_t>();
      bundle->created_at = meta.at("created_at").get<std::int64_t>();
      bundle->train_positives = meta.at("train_positives").get<std::size_t>();
      bundle->train_negatives = meta.at("train_negatives").get<std::size_t>();
      auto stem = entry.path();
      stem.replace_extension();
      bundle->embedding = deserialize_model(io::read_file(stem.string() + ".model"));
      bundle->classifier = deserialize_classifier(io::read_file(stem.string() + ".classifier"));
      bundles_[bundle->category].push_back(std::move(bundle));
    }
  }
  for (auto& [category, list] : bundles_) {
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a->version < b->version; });
    for (std::size_t i = 0; i < list.size(); ++i)
      if (list[i]->version != i + 1) fail(ErrorCode::bad_format, "model versions of " + category + " are not contiguous");
  }
}

std::shared_ptr<const ModelBundle> ModelRegistry::publish(std::string category, EndToEndModel model,
                                                          std::int64_t created_at) {
  std::unique_lock lock(mutex_);
  auto& list = bundles_[category];
  auto bundle = std::make_shared<ModelBundle>();
  bundle->category = std::move(category);
  bundle->version = list.size() + 1;
  bundle->created_at = created_at;
  bundle->embedding = std::move(model.embedding);
  bundle->classifier = std::move(model.classifier);
  bundle->train_positives = model.train_positives;
  bundle->train_negatives = model.train_negatives;

  if (root_) {
    const auto dir = *root_ / escape_path_component(bundle->category);
    fs::create_directories(dir);
    const auto stem = dir / fmt::format("v{}", bundle->version);
    write_atomically(stem.string() + ".model", serialize_model(bundle->embedding));
    write_atomically(stem.string() + ".classifier", serialize_classifier(bundle->classifier));
    const nlohmann::json meta{{"category", bundle->category},
                              {"version", bundle->version},
                              {"created_at", bundle->created_at},
                              {"train_positives", bundle->train_positives},
                              {"train_negatives", bundle->train_negatives},
                              {"classifier", to_string(bundle->classifier.kind())},
                              {"degenerate", bundle->classifier.is_degenerate()}};
    // Metadata last: a version exists once its .json does.
    write_atomically(stem.string() + ".json", meta.dump(2) + "\n");
  }
  list.push_back(bundle);
  return bundle;
}

std::shared_ptr<const ModelBundle> ModelRegistry::get(std::string_view category,
                                                      std::optional<std::uint64_t> version) const {
  std::shared_lock lock(mutex_);
  const auto it = bundles_.find(category);
  if (it == bundles_.end() || it->second.empty())
    fail(ErrorCode::no_model, "no model published for " + std::string(category));
  if (!version) return it->second.back();
  if (*version == 0 || *version > it->second.size())
    fail(ErrorCode::no_model, fmt::format("no version {} for {}", *version, category));
  return it->second[*version - 1];
}

bool ModelRegistry::has_model(std::string_view category) const {
  std::shared_lock lock(mutex_);
  const auto it = bundles_.find(category);
  return it != bundles_.end() && !it->second.empty();
}

std::vector<std::uint64_t> ModelRegistry::versions(std::string_view category) const {
  std::shared_lock lock(mutex_);
  std::vector<std::uint64_t> out;
  if (const auto it = bundles_.find(category); it != bundles_.end())
    for (const auto& b : it->second) out.push_back(b->version);
  return out;
}

std::vector<std::string> ModelRegistry::categories() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [name, list] : bundles_)
    if (!list.empty()) out.push_back(name);
  return out;
}

}  // namespace lexrisk
