#pragma once

#include <stdexcept>
#include <string>

namespace senstir {

enum class ErrorCode {
  invalid_config,
  dimension_mismatch,
  non_finite_feature,
  negative_relevance,
  non_finite_score,
  length_mismatch,
  size_mismatch,
  too_large,
  too_short,
  single_class,
  no_convergence,
  singular_system,
  degenerate_span,
  stale_plan,
  baseline_needs_samples,
  shape_mismatch,
  missing_groups,
  non_binary_relevance,
  empty_pool,
  parse_error,
  empty_after_filter,
  io_error,
  schema_version_mismatch,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + msg), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool ok, ErrorCode code, const std::string& msg) {
  if (!ok) fail(code, msg);
}

}  // namespace senstir
