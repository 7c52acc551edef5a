#include "sparse_pr/error.hpp"

namespace spr {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_parameter: return "invalid_parameter";
    case ErrorCode::numeric_domain: return "numeric_domain";
    case ErrorCode::numeric_overflow: return "numeric_overflow";
    case ErrorCode::degenerate_data: return "degenerate_data";
    case ErrorCode::diverged: return "diverged";
    case ErrorCode::sweep_failure: return "sweep_failure";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace spr
