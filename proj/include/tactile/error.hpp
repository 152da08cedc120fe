#pragma once

#include <stdexcept>
#include <string>

namespace tactile {

/// Failure categories; the CLI maps each one to a distinct exit code.
enum class ErrorKind {
  kInvalidArgument = 3,
  kMissingInput = 4,
  kDigestMismatch = 5,
  kVersionMismatch = 6,
  kNumerical = 7,
  kIo = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::kInvalidArgument, what);
}

}  // namespace tactile
