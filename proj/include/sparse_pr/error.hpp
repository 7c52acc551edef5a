#pragma once

#include <stdexcept>
#include <string>

namespace spr {

enum class ErrorCode {
  invalid_parameter,
  numeric_domain,
  numeric_overflow,
  degenerate_data,
  diverged,
  sweep_failure,
  io,
};

const char* to_string(ErrorCode code) noexcept;

/// Base of every exception thrown by the library. The code is what the C API
/// maps onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidParameter : public Error {
 public:
  explicit InvalidParameter(const std::string& what) : Error(ErrorCode::invalid_parameter, what) {}
};

class DegenerateData : public Error {
 public:
  explicit DegenerateData(const std::string& what) : Error(ErrorCode::degenerate_data, what) {}
};

}  // namespace spr
