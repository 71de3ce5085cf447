#pragma once

#include <stdexcept>
#include <string>

namespace basisrisk {

// Every failure the library raises carries one of these kinds so callers
// (notably the CLI) can map problems to exit codes without string matching.
enum class ErrorKind {
  config,             // bad configuration or flag value
  parse,              // malformed input file
  validation,         // data violates a structural invariant
  insufficient_data,  // too few observations for the requested operation
  degenerate,         // zero-variance or otherwise undefined statistic
  domain,             // numeric argument outside the defined domain
  not_offered,        // contract/subsidy combination that does not exist
  io,                 // filesystem trouble
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::config: return "config";
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
    case ErrorKind::insufficient_data: return "insufficient_data";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::domain: return "domain";
    case ErrorKind::not_offered: return "not_offered";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

}  // namespace basisrisk
