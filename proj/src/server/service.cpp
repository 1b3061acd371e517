#include <cmath>

#include "lexrisk/error.hpp"
#include "lexrisk/server.hpp"
#include "lexrisk/wire.hpp"

namespace lexrisk {

using nlohmann::json;

std::string_view to_string(ApiErrorCode code) noexcept {
  switch (code) {
    case ApiErrorCode::bad_request: return "bad_request";
    case ApiErrorCode::empty_document: return "empty_document";
    case ApiErrorCode::bad_threshold: return "bad_threshold";
    case ApiErrorCode::not_found: return "not_found";
    case ApiErrorCode::unknown_category: return "unknown_category";
    case ApiErrorCode::no_model: return "no_model";
    case ApiErrorCode::already_reviewed: return "already_reviewed";
    case ApiErrorCode::insufficient_data: return "insufficient_data";
    case ApiErrorCode::bad_format: return "bad_format";
    case ApiErrorCode::internal: return "internal";
  }
  return "internal";
}

int http_status(ApiErrorCode code) noexcept {
  switch (code) {
    case ApiErrorCode::bad_request:
    case ApiErrorCode::empty_document:
    case ApiErrorCode::bad_threshold:
    case ApiErrorCode::bad_format: return 400;
    case ApiErrorCode::not_found:
    case ApiErrorCode::unknown_category: return 404;
    case ApiErrorCode::no_model:
    case ApiErrorCode::already_reviewed: return 409;
    case ApiErrorCode::insufficient_data: return 422;
    case ApiErrorCode::internal: return 500;
  }
  return 500;
}

ApiErrorCode api_code(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::uninferable:
    case ErrorCode::duplicate_id: return ApiErrorCode::bad_request;
    case ErrorCode::empty_vocabulary:
    case ErrorCode::insufficient_data: return ApiErrorCode::insufficient_data;
    case ErrorCode::unknown_category: return ApiErrorCode::unknown_category;
    case ErrorCode::not_found: return ApiErrorCode::not_found;
    case ErrorCode::already_reviewed: return ApiErrorCode::already_reviewed;
    case ErrorCode::no_model: return ApiErrorCode::no_model;
    case ErrorCode::empty_document: return ApiErrorCode::empty_document;
    case ErrorCode::bad_format: return ApiErrorCode::bad_format;
    case ErrorCode::io: return ApiErrorCode::internal;
  }
  return ApiErrorCode::internal;
}

namespace {

template <typename F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ApiError&) {
    throw;
  } catch (const Error& e) {
    throw ApiError(api_code(e.code()), e.what(), std::string(to_string(e.code())));
  } catch (const json::exception& e) {
    throw ApiError(ApiErrorCode::bad_request, e.what());
  } catch (const std::exception& e) {
    throw ApiError(ApiErrorCode::internal, e.what());
  }
}

json document_json(const DocumentRecord& d, bool full) {
  json j{{"doc_id", d.doc_id},
         {"title", d.title},
         {"uploaded_at", d.uploaded_at},
         {"paragraph_count", d.paragraphs.size()},
         {"status", d.analyzed ? "analyzed" : "uploaded"}};
  if (full) {
    j["text"] = d.text;
    json paras = json::array();
    for (const auto& p : d.paragraphs) paras.push_back({{"paragraph_id", p.paragraph_id}, {"text", p.text}});
    j["paragraphs"] = std::move(paras);
  }
  return j;
}

json category_json(const CategoryInfo& c) {
  return {{"name", c.name},
          {"latest_version", c.latest_version ? json(*c.latest_version) : json(nullptr)},
          {"records", c.records},
          {"train_positives", c.train.positives},
          {"train_negatives", c.train.negatives},
          {"degenerate", c.degenerate}};
}

HttpResponse json_response(int status, const json& body) { return {status, "application/json", body.dump()}; }

HttpResponse error_response(const ApiError& e) {
  json err{{"code", to_string(e.code())}, {"message", e.what()}};
  if (!e.detail().empty()) err["detail"] = e.detail();
  return json_response(http_status(e.code()), json{{"error", err}});
}

std::vector<std::string> path_segments(std::string_view path) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto slash = path.find('/', start);
    const auto seg = path.substr(start, slash == std::string_view::npos ? std::string_view::npos : slash - start);
    if (!seg.empty()) out.emplace_back(seg);
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  return out;
}

json parse_body(const std::string& body) {
  if (body.empty()) return json::object();
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw ApiError(ApiErrorCode::bad_request, std::string("request body is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw ApiError(ApiErrorCode::bad_request, "request body must be a JSON object");
  return j;
}

template <typename T>
T field(const json& j, const char* name, T fallback) {
  if (!j.contains(name) || j[name].is_null()) return fallback;
  try {
    return j[name].get<T>();
  } catch (const json::exception&) {
    throw ApiError(ApiErrorCode::bad_request, std::string("field '") + name + "' has the wrong type");
  }
}

}  // namespace

Service::Service(CategoryRegistry categories, PipelineOptions options) {
  const auto dir = options.state_dir;
  pipeline_ = std::make_unique<Pipeline>(std::move(categories), std::move(options));
  documents_ = dir ? std::make_unique<DocumentStore>(*dir / "documents.jsonl") : std::make_unique<DocumentStore>();
}

DocumentRecord Service::upload(std::string text, std::string title, const std::optional<std::string>& delimiter) {
  return guarded([&] { return documents_->add(std::move(text), std::move(title), pipeline_->now(), delimiter); });
}

std::vector<DocumentRecord> Service::list_documents() const {
  return guarded([&] { return documents_->list(); });
}

DocumentRecord Service::document(std::string_view doc_id) const {
  return guarded([&] { return documents_->get(doc_id); });
}

Analysis Service::analyze(std::string_view doc_id, std::vector<std::string> categories,
                          std::optional<double> threshold) {
  const double t = threshold.value_or(0.5);
  if (!(t >= 0.0 && t <= 1.0))
    throw ApiError(ApiErrorCode::bad_threshold, "threshold must lie in [0, 1]", std::to_string(t));
  return guarded([&] {
    const auto doc = documents_->get(doc_id);
    auto analysis = pipeline_->analyze(doc.doc_id, doc.paragraphs, std::move(categories), t);
    documents_->mark_analyzed(doc.doc_id);
    return analysis;
  });
}

std::vector<Finding> Service::findings(std::string_view doc_id) const {
  return guarded([&] {
    documents_->get(doc_id);
    return pipeline_->findings().for_document(doc_id);
  });
}

Finding Service::review(std::string_view finding_id, std::string_view verdict, std::string comment) {
  return guarded([&] { return pipeline_->record_review(finding_id, verdict_from_string(verdict), std::move(comment)); });
}

RetrainResult Service::retrain(std::string_view category) {
  return guarded([&] {
    const auto b = pipeline_->retrain(category);
    return RetrainResult{b->category, b->version, b->tag(), b->train_positives, b->train_negatives,
                         b->classifier.is_degenerate()};
  });
}

StoreRecord Service::add_example(std::string_view category, std::string text, bool label) {
  return guarded([&] { return pipeline_->add_manual_example(std::move(text), category, label); });
}

std::vector<CategoryInfo> Service::categories() const {
  return guarded([&] {
    std::vector<CategoryInfo> out;
    for (const auto& name : pipeline_->categories().names()) {
      CategoryInfo c;
      c.name = name;
      if (pipeline_->registry().has_model(name)) {
        const auto b = pipeline_->registry().get(name);
        c.latest_version = b->version;
        c.degenerate = b->classifier.is_degenerate();
      }
      c.records = pipeline_->store().count_for(name);
      c.train = pipeline_->store().counts(name);
      out.push_back(std::move(c));
    }
    return out;
  });
}

std::string Service::export_report(std::string_view doc_id, std::string_view format) const {
  return guarded([&] {
    const auto fmt = report_format_from_string(format);
    const auto doc = documents_->get(doc_id);
    return lexrisk::export_report({doc.doc_id, doc.title, pipeline_->findings().for_document(doc.doc_id)}, fmt);
  });
}

HttpResponse Service::handle(const HttpRequest& req) {
  try {
    const auto seg = path_segments(req.path);
    const auto& m = req.method;
    if (seg.empty() || seg[0] != "v1") throw ApiError(ApiErrorCode::not_found, "no such endpoint: " + req.path);
    const auto n = seg.size();

    if (n == 2 && seg[1] == "documents") {
      if (m == "POST") {
        const auto body = parse_body(req.body);
        std::optional<std::string> delimiter;
        if (body.contains("delimiter") && !body["delimiter"].is_null())
          delimiter = field<std::string>(body, "delimiter", "");
        const auto d = upload(field<std::string>(body, "text", ""), field<std::string>(body, "title", ""), delimiter);
        return json_response(201, document_json(d, true));
      }
      if (m == "GET") {
        json list = json::array();
        for (const auto& d : list_documents()) list.push_back(document_json(d, false));
        return json_response(200, json{{"documents", list}});
      }
    }
    if (n == 3 && seg[1] == "documents" && m == "GET") return json_response(200, document_json(document(seg[2]), true));
    if (n == 4 && seg[1] == "documents") {
      const auto& id = seg[2];
      if (seg[3] == "analyze" && m == "POST") {
        const auto body = parse_body(req.body);
        const auto cats = field<std::vector<std::string>>(body, "categories", {});
        std::optional<double> threshold;
        if (body.contains("threshold") && !body["threshold"].is_null()) {
          if (!body["threshold"].is_number())
            throw ApiError(ApiErrorCode::bad_threshold, "threshold must be a number");
          threshold = body["threshold"].get<double>();
        }
        const auto a = analyze(id, cats, threshold);
        json groups = json::array();
        for (const auto& s : a.scored) {
          json found = json::array();
          for (const auto& f : a.findings)
            if (f.category == s.category) found.push_back(f);
          groups.push_back({{"category", s.category}, {"model_version", s.model_version}, {"findings", found}});
        }
        return json_response(200, json{{"doc_id", a.doc_id},
                                       {"threshold", threshold.value_or(0.5)},
                                       {"categories", groups},
                                       {"warnings", a.warnings}});
      }
      if (seg[3] == "findings" && m == "GET")
        return json_response(200, json{{"doc_id", id}, {"findings", findings(id)}});
      if (seg[3] == "export" && m == "GET") {
        const auto it = req.query.find("format");
        const std::string format = it == req.query.end() ? "tsv" : it->second;
        auto body = export_report(id, format);
        return {200, format == "tsv" ? "text/tab-separated-values; charset=utf-8" : "text/plain; charset=utf-8",
                std::move(body)};
      }
    }
    if (n == 4 && seg[1] == "findings" && seg[3] == "review" && m == "POST") {
      const auto body = parse_body(req.body);
      return json_response(200, json(review(seg[2], field<std::string>(body, "verdict", ""),
                                            field<std::string>(body, "comment", ""))));
    }
    if (n == 2 && seg[1] == "categories" && m == "GET") {
      json list = json::array();
      for (const auto& c : categories()) list.push_back(category_json(c));
      return json_response(200, json{{"categories", list}});
    }
    if (n == 4 && seg[1] == "categories" && m == "POST") {
      if (seg[3] == "retrain") {
        const auto r = retrain(seg[2]);
        return json_response(200, json{{"category", r.category},
                                       {"version", r.version},
                                       {"model_version", r.model_version},
                                       {"train_positives", r.train_positives},
                                       {"train_negatives", r.train_negatives},
                                       {"degenerate", r.degenerate}});
      }
      if (seg[3] == "examples") {
        const auto body = parse_body(req.body);
        if (!body.contains("label") || !body["label"].is_boolean())
          throw ApiError(ApiErrorCode::bad_request, "field 'label' must be true or false");
        return json_response(201, json(add_example(seg[2], field<std::string>(body, "text", ""),
                                                   body["label"].get<bool>())));
      }
    }
    throw ApiError(ApiErrorCode::not_found, "no such endpoint: " + m + " " + req.path);
  } catch (const ApiError& e) {
    return error_response(e);
  } catch (const std::exception& e) {
    return error_response(ApiError(ApiErrorCode::internal, e.what()));
  }
}

}  // namespace lexrisk
