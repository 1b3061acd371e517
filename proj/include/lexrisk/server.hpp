#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lexrisk/pipeline.hpp"

namespace lexrisk {

// ---------------------------------------------------------------------------
// Documents

struct DocumentRecord {
  std::string doc_id;
  std::string title;
  std::int64_t uploaded_at = 0;
  std::string text;  // verbatim upload
  std::vector<DocumentParagraph> paragraphs;
  bool analyzed = false;

  friend bool operator==(const DocumentRecord&, const DocumentRecord&) = default;
};

/// Paragraphs separated by blank (whitespace-only) lines, or by an explicit
/// delimiter string. Paragraphs are trimmed and empty ones dropped.
std::vector<std::string> split_paragraphs(std::string_view text,
                                          const std::optional<std::string>& delimiter = std::nullopt);

class DocumentStore {
 public:
  DocumentStore() = default;
  explicit DocumentStore(std::filesystem::path path);

  /// Throws empty_document when the text has no paragraph.
  DocumentRecord add(std::string text, std::string title, std::int64_t uploaded_at,
                     const std::optional<std::string>& delimiter = std::nullopt);
  DocumentRecord get(std::string_view doc_id) const;
  /// Newest upload first.
  std::vector<DocumentRecord> list() const;
  void mark_analyzed(std::string_view doc_id);

 private:
  void write_line(const std::string& line);

  mutable std::shared_mutex mutex_;
  std::optional<std::filesystem::path> path_;
  std::vector<DocumentRecord> docs_;  // upload order
};

// ---------------------------------------------------------------------------
// API errors

enum class ApiErrorCode {
  bad_request,
  empty_document,
  bad_threshold,
  not_found,
  unknown_category,
  no_model,
  already_reviewed,
  insufficient_data,
  bad_format,
  internal,
};

inline constexpr ApiErrorCode kAllApiErrorCodes[] = {
    ApiErrorCode::bad_request,      ApiErrorCode::empty_document,    ApiErrorCode::bad_threshold,
    ApiErrorCode::not_found,        ApiErrorCode::unknown_category,  ApiErrorCode::no_model,
    ApiErrorCode::already_reviewed, ApiErrorCode::insufficient_data, ApiErrorCode::bad_format,
    ApiErrorCode::internal,
};

std::string_view to_string(ApiErrorCode code) noexcept;
int http_status(ApiErrorCode code) noexcept;

class ApiError : public std::runtime_error {
 public:
  ApiError(ApiErrorCode code, const std::string& message, std::string detail = {})
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ApiErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ApiErrorCode code_;
  std::string detail_;
};

/// Library error to API error.
ApiErrorCode api_code(ErrorCode code) noexcept;

// ---------------------------------------------------------------------------
// Service

struct HttpRequest {
  std::string method;
  std::string path;  // already percent-decoded
  std::map<std::string, std::string> query;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

struct CategoryInfo {
  std::string name;
  std::optional<std::uint64_t> latest_version;
  std::size_t records = 0;
  LabelCounts train;
  bool degenerate = false;
};

struct RetrainResult {
  std::string category;
  std::uint64_t version = 0;
  std::string model_version;
  std::size_t train_positives = 0;
  std::size_t train_negatives = 0;
  bool degenerate = false;
};

/// Every operation of the HTTP API and the CLI goes through these methods.
/// All failures surface as ApiError.
class Service {
 public:
  Service(CategoryRegistry categories, PipelineOptions options);

  Pipeline& pipeline() noexcept { return *pipeline_; }
  const DocumentStore& documents() const noexcept { return *documents_; }

  DocumentRecord upload(std::string text, std::string title,
                        const std::optional<std::string>& delimiter = std::nullopt);
  std::vector<DocumentRecord> list_documents() const;
  DocumentRecord document(std::string_view doc_id) const;
  Analysis analyze(std::string_view doc_id, std::vector<std::string> categories,
                   std::optional<double> threshold = std::nullopt);
  std::vector<Finding> findings(std::string_view doc_id) const;
  Finding review(std::string_view finding_id, std::string_view verdict, std::string comment);
  RetrainResult retrain(std::string_view category);
  StoreRecord add_example(std::string_view category, std::string text, bool label);
  std::vector<CategoryInfo> categories() const;
  std::string export_report(std::string_view doc_id, std::string_view format) const;

  /// Routes one /v1 request. Never throws.
  HttpResponse handle(const HttpRequest& request);

 private:
  std::unique_ptr<Pipeline> pipeline_;
  std::unique_ptr<DocumentStore> documents_;
};

/// Blocks serving `service` over HTTP until the process is stopped.
void run_http_server(Service& service, const std::string& host, int port);

}  // namespace lexrisk
