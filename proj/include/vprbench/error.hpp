#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vpr {

enum class ErrorCode {
  NotFound,
  DecodeError,
  InvalidSize,
  InvalidRegion,
  GridMismatch,
  DimMismatch,
  EmptyDescriptorSet,
  KindMismatch,
  InvalidParam,
  ProtocolError,
  ParseError,
  EmptyLog,
  EmptyWindow,
  LayoutError,
  GroundTruthError,
  AlignmentError,
  FormatError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::InvalidSize: return "InvalidSize";
    case ErrorCode::InvalidRegion: return "InvalidRegion";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::EmptyDescriptorSet: return "EmptyDescriptorSet";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::InvalidParam: return "InvalidParam";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyLog: return "EmptyLog";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::LayoutError: return "LayoutError";
    case ErrorCode::GroundTruthError: return "GroundTruthError";
    case ErrorCode::AlignmentError: return "AlignmentError";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

// Configuration problems (bad parameters, protocol misuse) versus problems
// with the data being benchmarked. The CLI maps these to exit codes 2 and 3.
constexpr bool is_config_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParam:
    case ErrorCode::InvalidSize:
    case ErrorCode::GridMismatch:
    case ErrorCode::ProtocolError:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Error raised while parsing a line-oriented file; carries the 1-based line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace vpr
