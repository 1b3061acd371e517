#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lexrisk {

enum class ErrorCode {
  invalid_argument,
  empty_vocabulary,
  uninferable,
  duplicate_id,
  unknown_category,
  not_found,
  already_reviewed,
  no_model,
  empty_document,
  bad_format,
  insufficient_data,
  io,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries a machine-readable code so the
// service layer can map it onto a stable API error without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::invalid_argument, message);
}

}  // namespace lexrisk
