#pragma once

#include <stdexcept>
#include <string>

namespace padyn {

enum class ErrorKind {
  Configuration,
  Usage,
  NonUnit,
  Unsupported,
  PrecisionExhausted,
  UncontrolledTruncation,
  NotFlowable,
  NotRescalable,
  DegreeOverflow,
  NotInvariant,
  ChartSingular,
  Budget,
  Parse,
  InternalInvariant,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so the CLI can map it
/// to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace padyn
