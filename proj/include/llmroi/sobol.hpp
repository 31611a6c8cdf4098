#pragma once

// Variance-based global sensitivity analysis: Saltelli cross-matrix designs
// and first-, total- and second-order Sobol' index estimators.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "llmroi/econ.hpp"
#include "llmroi/local_sensitivity.hpp"

namespace llmroi {

struct SobolVariable {
  std::string name;
  double min = 0.0;
  double max = 1.0;

  friend bool operator==(const SobolVariable&, const SobolVariable&) = default;
};

enum class SamplerKind { ScrambledSobol, Uniform };

std::size_t saltelli_row_count(std::size_t base_samples, std::size_t dimensions,
                               bool second_order);

/// Matrices A and B (N x D each, uniform over the variable box) drawn from
/// one 2D-dimensional sequence. Cross rows are materialized on demand:
///   block 0: A, block 1: B, blocks 2..D+1: A_B^(i) (A with column i from B),
///   blocks D+2..2D+1: B_A^(i) (B with column i from A, second order only).
class SaltelliDesign {
 public:
  SaltelliDesign(std::vector<SobolVariable> variables, std::size_t base_samples,
                 bool second_order, std::vector<double> a, std::vector<double> b);

  std::size_t base_samples() const { return n_; }
  std::size_t dimensions() const { return variables_.size(); }
  bool second_order() const { return second_order_; }
  std::size_t row_count() const { return saltelli_row_count(n_, dimensions(), second_order_); }
  const std::vector<SobolVariable>& variables() const { return variables_; }

  std::span<const double> a_row(std::size_t j) const;
  std::span<const double> b_row(std::size_t j) const;

  /// Writes design row `row` (0 <= row < row_count()) into `out`.
  void row(std::size_t row, std::span<double> out) const;

  /// All rows, row-major. Intended for small designs.
  std::vector<double> materialize() const;

  friend bool operator==(const SaltelliDesign&, const SaltelliDesign&) = default;

 private:
  std::vector<SobolVariable> variables_;
  std::size_t n_;
  bool second_order_;
  std::vector<double> a_;
  std::vector<double> b_;
};

void validate_ranges(std::span<const SobolVariable> variables);

SaltelliDesign saltelli_sample(std::span<const SobolVariable> variables,
                               std::size_t base_samples, bool second_order, std::uint64_t seed,
                               SamplerKind sampler = SamplerKind::ScrambledSobol);

struct IndexInterval {
  double low = 0.0;
  double high = 0.0;

  friend bool operator==(const IndexInterval&, const IndexInterval&) = default;
};

struct SobolIndices {
  std::vector<std::string> names;
  std::vector<double> first_order;
  std::vector<double> total_order;
  std::optional<Matrix> second_order;  // upper triangle filled and mirrored
  double output_variance = 0.0;
  std::size_t evaluations_used = 0;
  std::vector<double> first_order_se;
  std::vector<double> total_order_se;
  /// Indices are raw estimates; S_Ti >= S_i - noise_bound is expected.
  double noise_bound = 0.0;
  std::optional<std::vector<IndexInterval>> first_order_ci;
  std::optional<std::vector<IndexInterval>> total_order_ci;
  std::size_t base_samples = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const SobolIndices&, const SobolIndices&) = default;
};

using ProgressCallback = std::function<void(double)>;

struct SobolOptions {
  std::size_t base_samples = 1u << 14;
  bool second_order = true;
  std::uint64_t seed = 0;
  unsigned bootstrap_resamples = 0;
  double confidence_level = 0.95;
  unsigned workers = 1;
  SamplerKind sampler = SamplerKind::ScrambledSobol;
  /// Called with the evaluated-row fraction; values are nondecreasing and the
  /// last call reports 1. May be invoked from worker threads (serialized).
  ProgressCallback progress;
};

/// Evaluates `model` over a Saltelli design and estimates the indices.
/// Throws DomainError(non_finite) carrying the offending row and
/// DomainError(degenerate_model) when the output variance is zero.
SobolIndices sobol_analyze(std::span<const SobolVariable> variables, const ScalarFunction& model,
                           const SobolOptions& options);

// ---------------------------------------------------------------------------
// Built-in economic models

enum class SobolModel { SingleEarnings, SingleRoi, BinaryEarnings, BinaryRoi };
enum class CostUnits { PerMillion, PerToken };

const char* to_string(SobolModel m);
const char* to_string(CostUnits u);
SobolModel parse_sobol_model(std::string_view text);
CostUnits parse_cost_units(std::string_view text);

double cost_scale(CostUnits units);
bool is_binary(SobolModel m);
std::span<const std::string_view> model_variables(SobolModel m);

struct SobolSpec {
  SobolModel model = SobolModel::SingleEarnings;
  BinaryVariant variant = BinaryVariant::PaperCompat;
  CostUnits cost_units = CostUnits::PerMillion;
  std::vector<SobolVariable> ranges;  // in model_variables(model) order
  unsigned samples_exponent = 14;
  bool second_order = true;
  std::uint64_t seed = 0;
  unsigned bootstrap = 0;

  std::size_t base_samples() const { return std::size_t{1} << samples_exponent; }
  std::size_t evaluations() const;

  /// Throws ValidationError for inverted ranges, wrong variable sets, or a
  /// binary box whose probabilities can sum past 1.
  void validate() const;

  friend bool operator==(const SobolSpec&, const SobolSpec&) = default;
};

/// Ranges for the single-transaction model (G, L, C, P, T).
std::vector<SobolVariable> commercial_operation_ranges();
/// Ranges for the binary classification model (G, L_FP, L_FN, C, P_FP, P_FN, P_TP, T).
std::vector<SobolVariable> binary_classification_ranges();

SobolSpec default_spec(SobolModel model);

ScalarFunction sobol_model_function(const SobolSpec& spec);

SobolIndices sobol_analyze(const SobolSpec& spec, unsigned workers = 1,
                           const ProgressCallback& progress = {});

}  // namespace llmroi
