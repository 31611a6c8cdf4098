#pragma once

// Point-wise model functions over flat parameter vectors. These are the
// adapters shared by the local derivative checks and the Sobol analysis.
//
// The sampled C is a price; the transaction cost is cost_scale * C * T, so
// cost_scale = 1 treats C as currency per token and cost_scale = 1e-6 as
// currency per million tokens.

#include <array>
#include <span>
#include <string_view>

#include "llmroi/econ.hpp"

namespace llmroi::models {

inline constexpr double kPerToken = 1.0;
inline constexpr double kPerMillion = 1.0e-6;

// Fixed variable orders; index i always refers to the same variable.
inline constexpr std::array<std::string_view, 5> kSingleVariables{"G", "L", "C", "P", "T"};
inline constexpr std::array<std::string_view, 8> kBinaryVariables{"G",    "L_FP", "L_FN", "C",
                                                                  "P_FP", "P_FN", "P_TP", "T"};

namespace single {
inline constexpr std::size_t G = 0, L = 1, C = 2, P = 3, T = 4;
}
namespace binary {
inline constexpr std::size_t G = 0, L_FP = 1, L_FN = 2, C = 3, P_FP = 4, P_FN = 5, P_TP = 6,
                             T = 7;
}

inline double single_earnings(std::span<const double> x, double cost_scale) {
  using namespace single;
  return x[G] * x[P] - x[L] * (1.0 - x[P]) - cost_scale * x[C] * x[T];
}

inline double single_roi(std::span<const double> x, double cost_scale) {
  using namespace single;
  return (x[G] * x[P] - x[L] * (1.0 - x[P])) / (cost_scale * x[C] * x[T]) - 1.0;
}

inline double binary_earnings(std::span<const double> x, BinaryVariant variant,
                              double cost_scale) {
  using namespace binary;
  const double ct = cost_scale * x[C] * x[T];
  if (variant == BinaryVariant::Canonical) {
    const double p_tn = 1.0 - (x[P_TP] + x[P_FP] + x[P_FN]);
    return (x[G] - ct) * x[P_TP] - ct * p_tn - (x[L_FN] + ct) * x[P_FN] -
           (x[L_FP] + ct) * x[P_FP];
  }
  return (x[G] - 2.0 * ct) * x[P_TP] - (x[L_FN] + 2.0 * ct) * x[P_FN] -
         (x[L_FP] + 2.0 * ct) * x[P_FP] - ct;
}

inline double binary_roi(std::span<const double> x, BinaryVariant variant, double cost_scale) {
  using namespace binary;
  const double ct = cost_scale * x[C] * x[T];
  if (variant == BinaryVariant::Canonical) {
    return (x[G] * x[P_TP] - x[L_FN] * x[P_FN] - x[L_FP] * x[P_FP]) / ct - 1.0;
  }
  return binary_earnings(x, variant, cost_scale) / ct;
}

}  // namespace llmroi::models
