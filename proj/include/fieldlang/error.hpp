#pragma once

#include <stdexcept>
#include <string>

namespace fieldlang {

enum class ErrorKind {
  BadMagic,
  Truncated,
  NonFinite,
  DimensionMismatch,
  Io,
  Parse,
  InvalidArgument,
  OutOfRange,
  InvalidRecord,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::BadMagic: return "bad-magic";
    case ErrorKind::Truncated: return "truncated";
    case ErrorKind::NonFinite: return "non-finite";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::Io: return "io";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::InvalidRecord: return "invalid-record";
  }
  return "unknown";
}

/// Every failure raised by the library carries a kind so callers (and the
/// CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fieldlang
