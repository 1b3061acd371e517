#include <fmt/format.h>

#include <charconv>

#include "lexrisk/error.hpp"
#include "lexrisk/pipeline.hpp"

namespace lexrisk {

namespace {

constexpr std::string_view kColumns =
    "finding_id\tparagraph_id\tparagraph_index\tcategory\tprobability\tstatus\tmodel_version\tcomment\tparagraph_text";

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out.push_back(s[i]);
      continue;
    }
    if (++i == s.size()) fail(ErrorCode::bad_format, "dangling escape in report field");
    switch (s[i]) {
      case '\\': out.push_back('\\'); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default: fail(ErrorCode::bad_format, "unknown escape in report field");
    }
  }
  return out;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) return out;
    start = tab + 1;
  }
}

template <typename T>
T number(std::string_view field) {
  T v{};
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || end != field.data() + field.size())
    fail(ErrorCode::bad_format, "bad number in report: " + std::string(field));
  return v;
}

std::string to_tsv(const Report& report) {
  std::string out = fmt::format("#document\t{}\t{}\n{}\n", escape(report.doc_id), escape(report.title), kColumns);
  for (const auto& f : report.findings)
    out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", escape(f.finding_id), escape(f.paragraph_id),
                       f.paragraph_index, escape(f.category), f.probability, to_string(f.status),
                       escape(f.model_version), escape(f.comment), escape(f.paragraph_text));
  return out;
}

std::string to_text(const Report& report) {
  std::string out = fmt::format("Risk report: {}\nDocument: {}\nFindings: {}\n", report.title.empty() ? "-" : report.title,
                                report.doc_id, report.findings.size());
  std::size_t n = 0;
  for (const auto& f : report.findings) {
    out += fmt::format("\n[{}] {}  probability {:.4f}  {}  ({})\n", ++n, f.category, f.probability,
                       to_string(f.status), f.model_version);
    out += fmt::format("    paragraph {} ({})\n", f.paragraph_index + 1, f.paragraph_id);
    std::string_view text = f.paragraph_text;
    while (!text.empty()) {
      const auto nl = text.find('\n');
      out += fmt::format("    | {}\n", text.substr(0, nl));
      if (nl == std::string_view::npos) break;
      text.remove_prefix(nl + 1);
    }
    if (!f.comment.empty()) out += fmt::format("    comment: {}\n", f.comment);
  }
  return out;
}

}  // namespace

std::string_view to_string(ReportFormat f) noexcept { return f == ReportFormat::tsv ? "tsv" : "text"; }

ReportFormat report_format_from_string(std::string_view s) {
  if (s == "tsv") return ReportFormat::tsv;
  if (s == "text" || s == "txt") return ReportFormat::text;
  fail(ErrorCode::invalid_argument, "report format must be tsv or text, got: " + std::string(s));
}

std::string export_report(const Report& report, ReportFormat format) {
  return format == ReportFormat::tsv ? to_tsv(report) : to_text(report);
}

Report parse_report(std::string_view tsv) {
  std::vector<std::string_view> lines;
  while (!tsv.empty()) {
    const auto nl = tsv.find('\n');
    if (nl == std::string_view::npos) fail(ErrorCode::bad_format, "report does not end with a newline");
    lines.push_back(tsv.substr(0, nl));
    tsv.remove_prefix(nl + 1);
  }
  if (lines.size() < 2) fail(ErrorCode::bad_format, "report is missing its header");
  const auto head = split_tabs(lines[0]);
  if (head.size() != 3 || head[0] != "#document") fail(ErrorCode::bad_format, "bad report document line");
  if (lines[1] != kColumns) fail(ErrorCode::bad_format, "bad report column header");

  Report r;
  r.doc_id = unescape(head[1]);
  r.title = unescape(head[2]);
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const auto cells = split_tabs(lines[i]);
    if (cells.size() != 9) fail(ErrorCode::bad_format, fmt::format("report row {} has {} fields", i + 1, cells.size()));
    Finding f;
    f.finding_id = unescape(cells[0]);
    f.doc_id = r.doc_id;
    f.paragraph_id = unescape(cells[1]);
    f.paragraph_index = number<std::size_t>(cells[2]);
    f.category = unescape(cells[3]);
    f.probability = number<double>(cells[4]);
    f.status = finding_status_from_string(cells[5]);
    f.model_version = unescape(cells[6]);
    f.comment = unescape(cells[7]);
    f.paragraph_text = unescape(cells[8]);
    r.findings.push_back(std::move(f));
  }
  return r;
}

}  // namespace lexrisk
