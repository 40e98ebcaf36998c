#pragma once

#include <stdexcept>
#include <string>

namespace tgfuse {

// Bad command line or config file. CLI exit code 1.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or missing input data. CLI exit code 2.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// A property check found a violated invariant. CLI exit code 3.
struct VerifyError : std::runtime_error {
  explicit VerifyError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tgfuse
