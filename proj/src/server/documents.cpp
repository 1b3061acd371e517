#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>

#include "lexrisk/error.hpp"
#include "lexrisk/server.hpp"

namespace lexrisk {

namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(ws) - first + 1);
}

nlohmann::json to_json(const DocumentRecord& d) {
  nlohmann::json paras = nlohmann::json::array();
  for (const auto& p : d.paragraphs) paras.push_back({{"paragraph_id", p.paragraph_id}, {"text", p.text}});
  return {{"doc_id", d.doc_id}, {"title", d.title}, {"uploaded_at", d.uploaded_at}, {"text", d.text},
          {"paragraphs", paras}};
}

DocumentRecord from_json(const nlohmann::json& j) {
  DocumentRecord d;
  d.doc_id = j.at("doc_id").get<std::string>();
  d.title = j.at("title").get<std::string>();
  d.uploaded_at = j.at("uploaded_at").get<std::int64_t>();
  d.text = j.at("text").get<std::string>();
  for (const auto& p : j.at("paragraphs"))
    d.paragraphs.push_back({p.at("paragraph_id").get<std::string>(), p.at("text").get<std::string>()});
  return d;
}

}  // namespace

std::vector<std::string> split_paragraphs(std::string_view text, const std::optional<std::string>& delimiter) {
  std::vector<std::string> out;
  auto emit = [&](std::string_view chunk) {
    chunk = trim(chunk);
    if (!chunk.empty()) out.emplace_back(chunk);
  };
  if (delimiter) {
    require(!delimiter->empty(), "paragraph delimiter must be non-empty");
    std::size_t start = 0;
    while (true) {
      const auto at = text.find(*delimiter, start);
      emit(text.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
      if (at == std::string_view::npos) break;
      start = at + delimiter->size();
    }
    return out;
  }
  // Blank-line boundaries: a run of lines that are empty or whitespace-only.
  std::size_t para_start = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    if (trim(text.substr(pos, end - pos)).empty()) {
      emit(text.substr(para_start, pos - para_start));
      para_start = end + 1;
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  if (para_start < text.size()) emit(text.substr(para_start));
  return out;
}

DocumentStore::DocumentStore(std::filesystem::path path) : path_(std::move(path)) {
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
      if (event == "upload") {
        docs_.push_back(from_json(j.at("document")));
      } else if (event == "analyzed") {
        const auto id = j.at("doc_id").get<std::string>();
        for (auto& d : docs_)
          if (d.doc_id == id) d.analyzed = true;
      } else {
        fail(ErrorCode::bad_format, "unknown document event " + event);
      }
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::bad_format, path_->string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

void DocumentStore::write_line(const std::string& line) {
  if (!path_) return;
  std::ofstream out(*path_, std::ios::binary | std::ios::app);
  out << line << '\n';
  out.flush();
  if (!out) fail(ErrorCode::io, "cannot append to " + path_->string());
}

DocumentRecord DocumentStore::add(std::string text, std::string title, std::int64_t uploaded_at,
                                  const std::optional<std::string>& delimiter) {
  const auto parts = split_paragraphs(text, delimiter);
  if (parts.empty()) fail(ErrorCode::empty_document, "document has no text");
  std::unique_lock lock(mutex_);
  DocumentRecord d;
  d.doc_id = "doc-" + std::to_string(docs_.size() + 1);
  d.title = title.empty() ? d.doc_id : std::move(title);
  d.uploaded_at = uploaded_at;
  d.text = std::move(text);
  for (std::size_t i = 0; i < parts.size(); ++i) d.paragraphs.push_back({d.doc_id + "-p" + std::to_string(i), parts[i]});
  write_line(nlohmann::json{{"event", "upload"}, {"document", to_json(d)}}.dump());
  docs_.push_back(d);
  return d;
}

DocumentRecord DocumentStore::get(std::string_view doc_id) const {
  std::shared_lock lock(mutex_);
  for (const auto& d : docs_)
    if (d.doc_id == doc_id) return d;
  fail(ErrorCode::not_found, "unknown document " + std::string(doc_id));
}

std::vector<DocumentRecord> DocumentStore::list() const {
  std::shared_lock lock(mutex_);
  std::vector<DocumentRecord> out(docs_.rbegin(), docs_.rend());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.uploaded_at > b.uploaded_at; });
  return out;
}

void DocumentStore::mark_analyzed(std::string_view doc_id) {
  std::unique_lock lock(mutex_);
  for (auto& d : docs_) {
    if (d.doc_id != doc_id) continue;
    if (!d.analyzed) {
      write_line(nlohmann::json{{"event", "analyzed"}, {"doc_id", d.doc_id}}.dump());
      d.analyzed = true;
    }
    return;
  }
  fail(ErrorCode::not_found, "unknown document " + std::string(doc_id));
}

}  // namespace lexrisk
