#include "llmroi/local_sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "llmroi/errors.hpp"

namespace llmroi {

namespace {

template <std::size_t N>
bool has_layout(const std::vector<std::string>& names,
                const std::array<std::string_view, N>& layout) {
  if (names.size() != N) return false;
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] != layout[i]) return false;
  }
  return true;
}

void require_single(const ParameterVector& p) {
  if (!p.is_single_layout()) {
    throw ValidationError("point", "expected variables (G, L, C, P, T) in that order");
  }
}

void require_binary(const ParameterVector& p) {
  if (!p.is_binary_layout()) {
    throw ValidationError("point",
                          "expected variables (G, L_FP, L_FN, C, P_FP, P_FN, P_TP, T) in that order");
  }
  const double sum = p.at("P_TP") + p.at("P_FP") + p.at("P_FN");
  if (sum > 1.0 + 1e-12) {
    throw ValidationError("point", "P_TP + P_FP + P_FN must not exceed 1");
  }
}

double transaction_cost_at(double c, double t, double scale, Target target) {
  const double d = scale * c * t;
  if (target == Target::Roi && d == 0.0) {
    throw DomainError(error_code::kSingular, "RoI derivatives are singular where C * T = 0");
  }
  return d;
}

void set_sym(Matrix& h, std::size_t i, std::size_t j, double v) {
  h(i, j) = v;
  h(j, i) = v;
}

}  // namespace

// ---------------------------------------------------------------------------

ParameterVector::ParameterVector(std::vector<std::string> names, std::vector<double> values)
    : names_(std::move(names)), values_(std::move(values)) {
  if (names_.size() != values_.size()) {
    throw ValidationError("point", "names and values differ in length");
  }
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second) throw ValidationError("point", "duplicate variable '" + n + "'");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw ValidationError(names_[i], "must be finite");
  }
}

ParameterVector ParameterVector::single(double g, double l, double c, double p, double t) {
  return {{"G", "L", "C", "P", "T"}, {g, l, c, p, t}};
}

ParameterVector ParameterVector::binary(double g, double l_fp, double l_fn, double c, double p_fp,
                                        double p_fn, double p_tp, double t) {
  return {{"G", "L_FP", "L_FN", "C", "P_FP", "P_FN", "P_TP", "T"},
          {g, l_fp, l_fn, c, p_fp, p_fn, p_tp, t}};
}

std::size_t ParameterVector::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  throw ValidationError(std::string(name), "unknown variable");
}

double ParameterVector::at(std::string_view name) const { return values_[index_of(name)]; }

bool ParameterVector::is_single_layout() const {
  return has_layout(names_, models::kSingleVariables);
}
bool ParameterVector::is_binary_layout() const {
  return has_layout(names_, models::kBinaryVariables);
}

const char* to_string(Target t) { return t == Target::Earnings ? "earnings" : "roi"; }

const char* to_string(LocalModel m) {
  switch (m) {
    case LocalModel::Single: return "single";
    case LocalModel::BinaryCanonical: return "binary-canonical";
    case LocalModel::BinaryPaperCompat: return "binary-paper-compat";
  }
  return "?";
}

LocalModel parse_local_model(std::string_view text) {
  if (text == "single") return LocalModel::Single;
  if (text == "binary-canonical") return LocalModel::BinaryCanonical;
  if (text == "binary-paper-compat") return LocalModel::BinaryPaperCompat;
  throw ValidationError("model", "expected single, binary-canonical or binary-paper-compat; got '" +
                                     std::string(text) + "'");
}

Target parse_target(std::string_view text) {
  if (text == "earnings") return Target::Earnings;
  if (text == "roi") return Target::Roi;
  throw ValidationError("target", "expected earnings or roi; got '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Single-transaction model

std::vector<double> gradient_single(const ParameterVector& point, Target target,
                                    double cost_scale) {
  require_single(point);
  using namespace models::single;
  const auto x = point.values();
  const double d = transaction_cost_at(x[C], x[T], cost_scale, target);

  if (target == Target::Earnings) {
    return {x[P], x[P] - 1.0, -cost_scale * x[T], x[G] + x[L], -cost_scale * x[C]};
  }
  const double k = x[G] * x[P] - x[L] * (1.0 - x[P]);
  return {x[P] / d, -(1.0 - x[P]) / d, -k / (x[C] * d), (x[G] + x[L]) / d, -k / (x[T] * d)};
}

Matrix hessian_single(const ParameterVector& point, Target target, double cost_scale) {
  require_single(point);
  using namespace models::single;
  const auto x = point.values();
  const double d = transaction_cost_at(x[C], x[T], cost_scale, target);
  Matrix h(5, 5);

  if (target == Target::Earnings) {
    set_sym(h, G, P, 1.0);
    set_sym(h, L, P, 1.0);
    set_sym(h, C, T, -cost_scale);
    return h;
  }

  const double k = x[G] * x[P] - x[L] * (1.0 - x[P]);
  const double c = x[C];
  const double t = x[T];
  set_sym(h, G, C, -x[P] / (c * d));
  set_sym(h, G, P, 1.0 / d);
  set_sym(h, G, T, -x[P] / (t * d));
  set_sym(h, L, C, (1.0 - x[P]) / (c * d));
  set_sym(h, L, P, 1.0 / d);
  set_sym(h, L, T, (1.0 - x[P]) / (t * d));
  h(C, C) = 2.0 * k / (c * c * d);
  set_sym(h, C, P, -(x[G] + x[L]) / (c * d));
  set_sym(h, C, T, k / (c * t * d));
  set_sym(h, P, T, -(x[G] + x[L]) / (t * d));
  h(T, T) = 2.0 * k / (t * t * d);
  return h;
}

// ---------------------------------------------------------------------------
// Binary classification model
//
// Both variants share the shape E = A - m * D and R = A / D - m with
//   A = G*P_TP - L_FN*P_FN - L_FP*P_FP,  D = s*C*T,
//   m = 1 (canonical) or 1 + 2*(P_TP + P_FP + P_FN) (paper-compat).

namespace {

struct BinaryParts {
  double a = 0.0;
  std::vector<double> grad_a;
  Matrix hess_a;
  double d = 0.0;
  std::vector<double> grad_d;
  Matrix hess_d;
  double m = 1.0;
  std::vector<double> grad_m;
};

BinaryParts binary_parts(const ParameterVector& point, BinaryVariant variant, double s) {
  using namespace models::binary;
  const auto x = point.values();
  BinaryParts b;
  b.a = x[G] * x[P_TP] - x[L_FN] * x[P_FN] - x[L_FP] * x[P_FP];
  b.grad_a.assign(8, 0.0);
  b.grad_a[G] = x[P_TP];
  b.grad_a[L_FP] = -x[P_FP];
  b.grad_a[L_FN] = -x[P_FN];
  b.grad_a[P_FP] = -x[L_FP];
  b.grad_a[P_FN] = -x[L_FN];
  b.grad_a[P_TP] = x[G];
  b.hess_a = Matrix(8, 8);
  set_sym(b.hess_a, G, P_TP, 1.0);
  set_sym(b.hess_a, L_FP, P_FP, -1.0);
  set_sym(b.hess_a, L_FN, P_FN, -1.0);

  b.d = s * x[C] * x[T];
  b.grad_d.assign(8, 0.0);
  b.grad_d[C] = s * x[T];
  b.grad_d[T] = s * x[C];
  b.hess_d = Matrix(8, 8);
  set_sym(b.hess_d, C, T, s);

  b.grad_m.assign(8, 0.0);
  if (variant == BinaryVariant::PaperCompat) {
    b.m = 1.0 + 2.0 * (x[P_TP] + x[P_FP] + x[P_FN]);
    b.grad_m[P_TP] = b.grad_m[P_FP] = b.grad_m[P_FN] = 2.0;
  }
  return b;
}

}  // namespace

std::vector<double> gradient_binary(const ParameterVector& point, Target target,
                                    BinaryVariant variant, double cost_scale) {
  require_binary(point);
  using namespace models::binary;
  transaction_cost_at(point.values()[C], point.values()[T], cost_scale, target);
  const auto b = binary_parts(point, variant, cost_scale);
  std::vector<double> g(8);
  for (std::size_t i = 0; i < 8; ++i) {
    if (target == Target::Earnings) {
      g[i] = b.grad_a[i] - b.m * b.grad_d[i] - b.d * b.grad_m[i];
    } else {
      g[i] = b.grad_a[i] / b.d - b.a * b.grad_d[i] / (b.d * b.d) - b.grad_m[i];
    }
  }
  return g;
}

Matrix hessian_binary(const ParameterVector& point, Target target, BinaryVariant variant,
                      double cost_scale) {
  require_binary(point);
  using namespace models::binary;
  transaction_cost_at(point.values()[C], point.values()[T], cost_scale, target);
  const auto b = binary_parts(point, variant, cost_scale);
  Matrix h(8, 8);
  const double d = b.d;
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 8; ++j) {
      if (target == Target::Earnings) {
        h(i, j) = b.hess_a(i, j) - b.m * b.hess_d(i, j) -
                  (b.grad_d[i] * b.grad_m[j] + b.grad_m[i] * b.grad_d[j]);
      } else {
        h(i, j) = b.hess_a(i, j) / d -
                  (b.grad_a[i] * b.grad_d[j] + b.grad_d[i] * b.grad_a[j]) / (d * d) -
                  b.a * b.hess_d(i, j) / (d * d) +
                  2.0 * b.a * b.grad_d[i] * b.grad_d[j] / (d * d * d);
      }
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Finite differences

namespace {

double probe(const ScalarFunction& f, const std::vector<double>& x) {
  try {
    return f(x);
  } catch (const std::exception& e) {
    throw DomainError("evaluation_failed",
                      std::string("model evaluation failed at probe point: ") + e.what(),
                      std::nullopt, x);
  }
}

void check_step(double relative_step) {
  if (!(relative_step > 0.0 && relative_step <= 1e-2)) {
    throw ValidationError("relative_step", "must lie in (0, 1e-2]");
  }
}

// Relative step; absolute only at the origin.
double step_for(double x, double relative_step) {
  return x == 0.0 ? relative_step : relative_step * std::abs(x);
}

}  // namespace

std::vector<double> finite_difference_gradient(const ScalarFunction& f,
                                               std::span<const double> point,
                                               double relative_step) {
  check_step(relative_step);
  std::vector<double> x(point.begin(), point.end());
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = step_for(point[i], relative_step);
    auto at = [&](double k) {
      x[i] = point[i] + k * h;
      return probe(f, x);
    };
    // Fourth-order central stencil.
    const double m2 = at(-2.0), m1 = at(-1.0), p1 = at(1.0), p2 = at(2.0);
    g[i] = ((m2 - p2) + 8.0 * (p1 - m1)) / (12.0 * h);
    x[i] = point[i];
  }
  return g;
}

Matrix finite_difference_jacobian(const VectorFunction& f, std::span<const double> point,
                                  double relative_step) {
  check_step(relative_step);
  std::vector<double> x(point.begin(), point.end());
  const std::size_t m = f(x).size();
  Matrix jac(m, x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double h = step_for(point[j], relative_step);
    auto at = [&](double k) {
      x[j] = point[j] + k * h;
      return f(x);
    };
    const auto m2 = at(-2.0), m1 = at(-1.0), p1 = at(1.0), p2 = at(2.0);
    x[j] = point[j];
    for (std::size_t i = 0; i < m; ++i) {
      jac(i, j) = ((m2[i] - p2[i]) + 8.0 * (p1[i] - m1[i])) / (12.0 * h);
    }
  }
  return jac;
}

double max_relative_deviation(std::span<const double> analytic,
                              std::span<const double> reference) {
  double largest = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    largest = std::max({largest, std::abs(analytic[i]), std::abs(reference[i])});
  }
  const double negligible = 1e-12 * largest;
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double scale = std::max(std::abs(analytic[i]), std::abs(reference[i]));
    if (scale <= negligible) continue;
    worst = std::max(worst, std::abs(analytic[i] - reference[i]) / scale);
  }
  return worst;
}

ScalarFunction model_function(LocalModel model, Target target, double cost_scale) {
  switch (model) {
    case LocalModel::Single:
      if (target == Target::Earnings) {
        return [cost_scale](std::span<const double> x) {
          return models::single_earnings(x, cost_scale);
        };
      }
      return [cost_scale](std::span<const double> x) { return models::single_roi(x, cost_scale); };
    case LocalModel::BinaryCanonical:
    case LocalModel::BinaryPaperCompat: {
      const auto variant = model == LocalModel::BinaryCanonical ? BinaryVariant::Canonical
                                                                : BinaryVariant::PaperCompat;
      if (target == Target::Earnings) {
        return [cost_scale, variant](std::span<const double> x) {
          return models::binary_earnings(x, variant, cost_scale);
        };
      }
      return [cost_scale, variant](std::span<const double> x) {
        return models::binary_roi(x, variant, cost_scale);
      };
    }
  }
  throw ValidationError("model", "unknown model");
}

LocalSensitivity local_report(const ParameterVector& point, LocalModel model, Target target,
                              double cost_scale, double relative_step) {
  LocalSensitivity out{.gradient = {}, .hessian = {}, .evaluated_at = point, .fd_gradient = {}};
  out.target = target;
  out.model = model;
  out.cost_scale = cost_scale;

  VectorFunction grad_fn;
  if (model == LocalModel::Single) {
    out.gradient = gradient_single(point, target, cost_scale);
    out.hessian = hessian_single(point, target, cost_scale);
    grad_fn = [&](std::span<const double> x) {
      return gradient_single(ParameterVector(point.names(), {x.begin(), x.end()}), target,
                             cost_scale);
    };
  } else {
    const auto variant = model == LocalModel::BinaryCanonical ? BinaryVariant::Canonical
                                                              : BinaryVariant::PaperCompat;
    out.gradient = gradient_binary(point, target, variant, cost_scale);
    out.hessian = hessian_binary(point, target, variant, cost_scale);
    grad_fn = [&, variant](std::span<const double> x) {
      return gradient_binary(ParameterVector(point.names(), {x.begin(), x.end()}), target,
                             variant, cost_scale);
    };
  }

  out.fd_gradient = finite_difference_gradient(model_function(model, target, cost_scale),
                                               point.values(), relative_step);
  out.gradient_deviation = max_relative_deviation(out.gradient, out.fd_gradient);

  const auto fd_hessian = finite_difference_jacobian(grad_fn, point.values(), relative_step);
  out.hessian_deviation = max_relative_deviation(out.hessian.data(), fd_hessian.data());
  out.hessian_zero_count = static_cast<std::size_t>(
      std::count(out.hessian.data().begin(), out.hessian.data().end(), 0.0));
  return out;
}

}  // namespace llmroi
