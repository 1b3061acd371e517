#include "lexrisk/error.hpp"

#include <fstream>
#include <sstream>

#include "lexrisk/binary_io.hpp"

namespace lexrisk {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::empty_vocabulary: return "empty_vocabulary";
    case ErrorCode::uninferable: return "uninferable";
    case ErrorCode::duplicate_id: return "duplicate_id";
    case ErrorCode::unknown_category: return "unknown_category";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::already_reviewed: return "already_reviewed";
    case ErrorCode::no_model: return "no_model";
    case ErrorCode::empty_document: return "empty_document";
    case ErrorCode::bad_format: return "bad_format";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::io: return "io";
  }
  return "invalid_argument";
}

namespace io {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) fail(ErrorCode::io, "short write to " + path);
}

}  // namespace io
}  // namespace lexrisk
