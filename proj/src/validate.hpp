#pragma once

#include <cmath>
#include <string>

#include "llmroi/errors.hpp"

namespace llmroi::detail {

inline void require_finite(const std::string& field, double v) {
  if (!std::isfinite(v)) throw ValidationError(field, "must be a finite number");
}

inline void require_nonneg(const std::string& field, double v) {
  require_finite(field, v);
  if (v < 0.0) throw ValidationError(field, "must be nonnegative, got " + std::to_string(v));
}

inline void require_probability(const std::string& field, double v) {
  require_finite(field, v);
  if (v < 0.0 || v > 1.0) {
    throw ValidationError(field, "must lie in [0, 1], got " + std::to_string(v));
  }
}

}  // namespace llmroi::detail
