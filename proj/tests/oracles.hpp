#pragma once

// Reference implementations written independently of the library, used by
// the unit tests and the acceptance run.

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "llmroi/local_sensitivity.hpp"

namespace oracles {

using llmroi::LocalModel;
using llmroi::Target;

/// Models in the printed per-outcome form. Variable orders:
/// single (G, L, C, P, T); binary (G, L_FP, L_FN, C, P_FP, P_FN, P_TP, T).
inline double model(LocalModel m, Target target, const std::vector<double>& x, double scale) {
  if (m == LocalModel::Single) {
    const double g = x[0], l = x[1], c = x[2], p = x[3], t = x[4];
    const double ct = scale * c * t;
    const double e = (g - ct) * p + (-l - ct) * (1.0 - p);
    return target == Target::Earnings ? e : (g * p - l * (1.0 - p)) / ct - 1.0;
  }
  const double g = x[0], lfp = x[1], lfn = x[2], c = x[3], pfp = x[4], pfn = x[5], ptp = x[6],
               t = x[7];
  const double ct = scale * c * t;
  const double a = g * ptp - lfn * pfn - lfp * pfp;
  if (m == LocalModel::BinaryCanonical) {
    return target == Target::Earnings ? a - ct : a / ct - 1.0;
  }
  const double e = (g - 2 * ct) * ptp - (lfn + 2 * ct) * pfn - (lfp + 2 * ct) * pfp - ct;
  return target == Target::Earnings ? e : e / ct;
}

/// Fourth-order central differences with step = rel * |x_i|.
inline std::vector<double> fd_gradient(LocalModel m, Target target, std::vector<double> x,
                                       double scale, double rel) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    const double h = rel * std::abs(x0);
    auto at = [&](double k) {
      x[i] = x0 + k * h;
      return model(m, target, x, scale);
    };
    const double m2 = at(-2), m1 = at(-1), p1 = at(1), p2 = at(2);
    x[i] = x0;
    g[i] = ((m2 - p2) + 8.0 * (p1 - m1)) / (12.0 * h);
  }
  return g;
}

/// Ishigami function on [-pi, pi]^3.
inline constexpr double kIshigamiA = 7.0;
inline constexpr double kIshigamiB = 0.1;

inline double ishigami(std::span<const double> x) {
  return std::sin(x[0]) + kIshigamiA * std::sin(x[1]) * std::sin(x[1]) +
         kIshigamiB * std::pow(x[2], 4) * std::sin(x[0]);
}

struct IshigamiIndices {
  double variance;
  double s[3];
  double st[3];
  double s12, s13, s23;
};

/// Closed-form variance decomposition of the Ishigami function.
inline IshigamiIndices ishigami_indices() {
  const double a = kIshigamiA, b = kIshigamiB;
  const double pi4 = std::pow(std::numbers::pi, 4), pi8 = std::pow(std::numbers::pi, 8);
  const double v1 = 0.5 * std::pow(1.0 + b * pi4 / 5.0, 2);
  const double v2 = a * a / 8.0;
  const double v13 = b * b * pi8 * (1.0 / 18.0 - 1.0 / 50.0);
  const double v = v1 + v2 + v13;
  return {v, {v1 / v, v2 / v, 0.0}, {(v1 + v13) / v, v2 / v, v13 / v}, 0.0, v13 / v, 0.0};
}

}  // namespace oracles
