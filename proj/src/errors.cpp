#include "senstir/errors.hpp"

namespace senstir {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_config: return "invalid_config";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::non_finite_feature: return "non_finite_feature";
    case ErrorCode::negative_relevance: return "negative_relevance";
    case ErrorCode::non_finite_score: return "non_finite_score";
    case ErrorCode::length_mismatch: return "length_mismatch";
    case ErrorCode::size_mismatch: return "size_mismatch";
    case ErrorCode::too_large: return "too_large";
    case ErrorCode::too_short: return "too_short";
    case ErrorCode::single_class: return "single_class";
    case ErrorCode::no_convergence: return "no_convergence";
    case ErrorCode::singular_system: return "singular_system";
    case ErrorCode::degenerate_span: return "degenerate_span";
    case ErrorCode::stale_plan: return "stale_plan";
    case ErrorCode::baseline_needs_samples: return "baseline_needs_samples";
    case ErrorCode::shape_mismatch: return "shape_mismatch";
    case ErrorCode::missing_groups: return "missing_groups";
    case ErrorCode::non_binary_relevance: return "non_binary_relevance";
    case ErrorCode::empty_pool: return "empty_pool";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::empty_after_filter: return "empty_after_filter";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::schema_version_mismatch: return "schema_version_mismatch";
  }
  return "unknown";
}

}  // namespace senstir
