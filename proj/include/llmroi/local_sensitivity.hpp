#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "llmroi/econ.hpp"
#include "llmroi/models.hpp"

namespace llmroi {

/// Dense row-major matrix, just enough for Hessians and second-order indices.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Named, ordered model parameters. Orders are fixed per model:
/// single = (G, L, C, P, T); binary = (G, L_FP, L_FN, C, P_FP, P_FN, P_TP, T).
class ParameterVector {
 public:
  ParameterVector(std::vector<std::string> names, std::vector<double> values);

  static ParameterVector single(double g, double l, double c, double p, double t);
  static ParameterVector binary(double g, double l_fp, double l_fn, double c, double p_fp,
                                double p_fn, double p_tp, double t);

  std::size_t size() const { return values_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  std::span<const double> values() const { return values_; }
  double at(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;

  bool is_single_layout() const;
  bool is_binary_layout() const;

  friend bool operator==(const ParameterVector&, const ParameterVector&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<double> values_;
};

enum class Target { Earnings, Roi };
enum class LocalModel { Single, BinaryCanonical, BinaryPaperCompat };

const char* to_string(Target t);
const char* to_string(LocalModel m);
Target parse_target(std::string_view text);
LocalModel parse_local_model(std::string_view text);

std::vector<double> gradient_single(const ParameterVector& point, Target target,
                                    double cost_scale = models::kPerToken);
Matrix hessian_single(const ParameterVector& point, Target target,
                      double cost_scale = models::kPerToken);

std::vector<double> gradient_binary(const ParameterVector& point, Target target,
                                    BinaryVariant variant, double cost_scale = models::kPerToken);
Matrix hessian_binary(const ParameterVector& point, Target target, BinaryVariant variant,
                      double cost_scale = models::kPerToken);

using ScalarFunction = std::function<double(std::span<const double>)>;
using VectorFunction = std::function<std::vector<double>(std::span<const double>)>;

/// Fourth-order central differences with step = relative_step * |x_i|
/// (relative_step itself where x_i = 0).
std::vector<double> finite_difference_gradient(const ScalarFunction& f,
                                               std::span<const double> point,
                                               double relative_step);

/// Central-difference Jacobian of a vector function; column j holds d f / d x_j.
/// Applied to an analytic gradient this gives an independent Hessian check.
Matrix finite_difference_jacobian(const VectorFunction& f, std::span<const double> point,
                                  double relative_step);

/// max_i |a_i - b_i| / max(|a_i|, |b_i|), treating pairs that are both
/// negligible against the largest entry as equal.
double max_relative_deviation(std::span<const double> analytic, std::span<const double> reference);

struct LocalSensitivity {
  std::vector<double> gradient;
  Matrix hessian;
  ParameterVector evaluated_at;
  Target target = Target::Earnings;
  LocalModel model = LocalModel::Single;
  double cost_scale = models::kPerToken;
  std::vector<double> fd_gradient;
  double gradient_deviation = 0.0;  // analytic vs finite-difference gradient
  double hessian_deviation = 0.0;   // analytic vs finite-difference of the gradient
  std::size_t hessian_zero_count = 0;
};

ScalarFunction model_function(LocalModel model, Target target, double cost_scale);

LocalSensitivity local_report(const ParameterVector& point, LocalModel model, Target target,
                              double cost_scale = models::kPerToken,
                              double relative_step = 1e-4);

}  // namespace llmroi
