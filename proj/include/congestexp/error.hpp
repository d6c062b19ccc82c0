#pragma once

#include <stdexcept>
#include <string>

namespace congestexp {

// Failure categories. The numeric values are shared with the C API status
// codes and the CLI exit codes.
enum class ErrorCode : int {
  kValidation = 1,  // malformed game, config or argument
  kBudget = 2,      // enumeration would exceed the configured budget
  kIo = 3,          // file could not be read or written
  kInvariant = 4,   // internal invariant violated
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail_validation(const std::string& what) {
  throw Error(ErrorCode::kValidation, what);
}

[[noreturn]] inline void fail_invariant(const std::string& what) {
  throw Error(ErrorCode::kInvariant, what);
}

}  // namespace congestexp
