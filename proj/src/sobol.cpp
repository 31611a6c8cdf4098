#include "llmroi/sobol.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "llmroi/errors.hpp"
#include "llmroi/models.hpp"
#include "llmroi/sobol_sequence.hpp"

namespace llmroi {

// ---------------------------------------------------------------------------
// Design

std::size_t saltelli_row_count(std::size_t base_samples, std::size_t dimensions,
                               bool second_order) {
  return base_samples * (second_order ? 2 * dimensions + 2 : dimensions + 2);
}

SaltelliDesign::SaltelliDesign(std::vector<SobolVariable> variables, std::size_t base_samples,
                               bool second_order, std::vector<double> a, std::vector<double> b)
    : variables_(std::move(variables)),
      n_(base_samples),
      second_order_(second_order),
      a_(std::move(a)),
      b_(std::move(b)) {
  const std::size_t expected = n_ * variables_.size();
  if (a_.size() != expected || b_.size() != expected) {
    throw ValidationError("design", "A and B must both be N x D");
  }
}

std::span<const double> SaltelliDesign::a_row(std::size_t j) const {
  return std::span<const double>(a_).subspan(j * dimensions(), dimensions());
}

std::span<const double> SaltelliDesign::b_row(std::size_t j) const {
  return std::span<const double>(b_).subspan(j * dimensions(), dimensions());
}

void SaltelliDesign::row(std::size_t row, std::span<double> out) const {
  const std::size_t d = dimensions();
  const std::size_t block = row / n_;
  const std::size_t j = row % n_;
  if (block == 0) {
    std::ranges::copy(a_row(j), out.begin());
  } else if (block == 1) {
    std::ranges::copy(b_row(j), out.begin());
  } else if (block < 2 + d) {
    const std::size_t i = block - 2;
    std::ranges::copy(a_row(j), out.begin());
    out[i] = b_row(j)[i];
  } else if (second_order_ && block < 2 + 2 * d) {
    const std::size_t i = block - 2 - d;
    std::ranges::copy(b_row(j), out.begin());
    out[i] = a_row(j)[i];
  } else {
    throw ValidationError("row", "row index beyond the design");
  }
}

std::vector<double> SaltelliDesign::materialize() const {
  const std::size_t d = dimensions();
  std::vector<double> all(row_count() * d);
  for (std::size_t r = 0; r < row_count(); ++r) {
    row(r, std::span<double>(all).subspan(r * d, d));
  }
  return all;
}

void validate_ranges(std::span<const SobolVariable> variables) {
  if (variables.empty()) throw ValidationError("ranges", "at least one variable is required");
  for (const auto& v : variables) {
    if (!std::isfinite(v.min) || !std::isfinite(v.max)) {
      throw ValidationError("ranges." + v.name, "bounds must be finite");
    }
    if (!(v.min < v.max)) throw ValidationError("ranges." + v.name, "min must be less than max");
  }
  for (std::size_t i = 0; i < variables.size(); ++i) {
    for (std::size_t k = i + 1; k < variables.size(); ++k) {
      if (variables[i].name == variables[k].name) {
        throw ValidationError("ranges." + variables[i].name, "duplicate variable");
      }
    }
  }
}

SaltelliDesign saltelli_sample(std::span<const SobolVariable> variables,
                               std::size_t base_samples, bool second_order, std::uint64_t seed,
                               SamplerKind sampler) {
  validate_ranges(variables);
  if (base_samples < 8) throw ValidationError("base_samples", "must be at least 8");
  const std::size_t d = variables.size();
  std::vector<double> a(base_samples * d);
  std::vector<double> b(base_samples * d);
  std::vector<double> unit(2 * d);

  auto scale_into = [&](std::size_t j) {
    for (std::size_t i = 0; i < d; ++i) {
      const double width = variables[i].max - variables[i].min;
      a[j * d + i] = variables[i].min + unit[i] * width;
      b[j * d + i] = variables[i].min + unit[d + i] * width;
    }
  };

  if (sampler == SamplerKind::ScrambledSobol) {
    if (2 * d > SobolSequence::kMaxDimensions) {
      throw ValidationError("ranges", "the Sobol sampler supports at most " +
                                          std::to_string(SobolSequence::kMaxDimensions / 2) +
                                          " variables; use the uniform sampler");
    }
    SobolSequence seq(2 * d, seed);
    for (std::size_t j = 0; j < base_samples; ++j) {
      seq.next(unit);
      scale_into(j);
    }
  } else {
    std::mt19937_64 rng(seed);
    for (std::size_t j = 0; j < base_samples; ++j) {
      for (auto& u : unit) u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      scale_into(j);
    }
  }
  return SaltelliDesign({variables.begin(), variables.end()}, base_samples, second_order,
                        std::move(a), std::move(b));
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

constexpr std::size_t kChunkRows = 2048;

class ProgressReporter {
 public:
  ProgressReporter(const ProgressCallback& cb, std::size_t total) : cb_(cb), total_(total) {}

  void advance(std::size_t rows) {
    const std::size_t done = done_.fetch_add(rows) + rows;
    if (!cb_) return;
    std::lock_guard lock(mutex_);
    if (done > reported_) {
      reported_ = done;
      cb_(static_cast<double>(done) / static_cast<double>(total_));
    }
  }

 private:
  const ProgressCallback& cb_;
  std::size_t total_;
  std::atomic<std::size_t> done_{0};
  std::mutex mutex_;
  std::size_t reported_ = 0;
};

std::vector<double> evaluate_design(const SaltelliDesign& design, const ScalarFunction& model,
                                    unsigned workers, const ProgressCallback& progress) {
  const std::size_t rows = design.row_count();
  const std::size_t d = design.dimensions();
  std::vector<double> y(rows);
  ProgressReporter reporter(progress, rows);

  const std::size_t chunks = (rows + kChunkRows - 1) / kChunkRows;
  std::atomic<std::size_t> next_chunk{0};
  std::mutex failure_mutex;
  std::size_t failed_row = std::numeric_limits<std::size_t>::max();
  std::exception_ptr failure;

  auto work = [&] {
    std::vector<double> x(d);
    for (;;) {
      const std::size_t c = next_chunk.fetch_add(1);
      if (c >= chunks) return;
      const std::size_t begin = c * kChunkRows;
      const std::size_t end = std::min(rows, begin + kChunkRows);
      for (std::size_t r = begin; r < end; ++r) {
        design.row(r, x);
        try {
          y[r] = model(x);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (r < failed_row) {
            failed_row = r;
            failure = std::current_exception();
          }
          y[r] = std::numeric_limits<double>::quiet_NaN();
        }
      }
      reporter.advance(end - begin);
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(chunks)));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }

  // Report the first bad row in design order, independent of scheduling.
  for (std::size_t r = 0; r < rows; ++r) {
    if (r == failed_row) std::rethrow_exception(failure);
    if (!std::isfinite(y[r])) {
      std::vector<double> x(d);
      design.row(r, x);
      throw DomainError(error_code::kNonFinite,
                        "model produced a non-finite output at design row " + std::to_string(r),
                        y[r], std::move(x));
    }
  }
  return y;
}

struct Moments {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
};

template <typename Term>
Moments moments(std::size_t n, Term term) {
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) sum += term(j);
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double dv = term(j) - mean;
    ss += dv * dv;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n > 1 ? n - 1 : 1));
  return {mean, sd / std::sqrt(static_cast<double>(n))};
}

// Centered outputs, grouped by design block.
struct Outputs {
  std::size_t n;
  std::size_t d;
  std::vector<double> y;

  double a(std::size_t j) const { return y[j]; }
  double b(std::size_t j) const { return y[n + j]; }
  double ab(std::size_t i, std::size_t j) const { return y[(2 + i) * n + j]; }
  double ba(std::size_t i, std::size_t j) const { return y[(2 + d + i) * n + j]; }
};

struct FirstTotal {
  std::vector<double> first;
  std::vector<double> total;
};

// First/total order on a (possibly resampled) set of row indices.
FirstTotal first_total_on(const Outputs& o, std::span<const std::size_t> rows) {
  const auto n = static_cast<double>(rows.size());
  double mean = 0.0;
  for (auto j : rows) mean += o.a(j) + o.b(j);
  mean /= 2.0 * n;
  double var = 0.0;
  for (auto j : rows) {
    var += (o.a(j) - mean) * (o.a(j) - mean) + (o.b(j) - mean) * (o.b(j) - mean);
  }
  var /= 2.0 * n;
  FirstTotal out{std::vector<double>(o.d), std::vector<double>(o.d)};
  for (std::size_t i = 0; i < o.d; ++i) {
    double s = 0.0;
    double t = 0.0;
    for (auto j : rows) {
      s += o.b(j) * (o.ab(i, j) - o.a(j));
      const double diff = o.a(j) - o.ab(i, j);
      t += 0.5 * diff * diff;
    }
    out.first[i] = s / n / var;
    out.total[i] = t / n / var;
  }
  return out;
}

IndexInterval percentile_interval(std::vector<double> values, double level) {
  std::ranges::sort(values);
  const double alpha = (1.0 - level) / 2.0;
  const auto last = static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(alpha * last));
  const auto hi = static_cast<std::size_t>(std::ceil((1.0 - alpha) * last));
  return {values[lo], values[hi]};
}

}  // namespace

SobolIndices sobol_analyze(std::span<const SobolVariable> variables, const ScalarFunction& model,
                           const SobolOptions& options) {
  if (!model) throw ValidationError("model", "no model function supplied");
  if (!(options.confidence_level > 0.0 && options.confidence_level < 1.0)) {
    throw ValidationError("confidence_level", "must lie in (0, 1)");
  }
  const auto design = saltelli_sample(variables, options.base_samples, options.second_order,
                                      options.seed, options.sampler);
  const std::size_t n = design.base_samples();
  const std::size_t d = design.dimensions();

  Outputs o{n, d, evaluate_design(design, model, options.workers, options.progress)};

  double lo = o.y[0];
  double hi = o.y[0];
  double mean = 0.0;
  for (std::size_t j = 0; j < 2 * n; ++j) {
    lo = std::min(lo, o.y[j]);
    hi = std::max(hi, o.y[j]);
    mean += o.y[j];
  }
  if (lo == hi) {
    throw DomainError(error_code::kDegenerateModel,
                      "model output is constant over the sample; indices are undefined");
  }
  mean /= static_cast<double>(2 * n);
  for (auto& v : o.y) v -= mean;

  double var = 0.0;
  for (std::size_t j = 0; j < 2 * n; ++j) var += o.y[j] * o.y[j];
  var /= static_cast<double>(2 * n);

  SobolIndices out;
  out.names.reserve(d);
  for (const auto& v : variables) out.names.push_back(v.name);
  out.output_variance = var;
  out.evaluations_used = design.row_count();
  out.base_samples = n;
  out.seed = options.seed;
  out.first_order.resize(d);
  out.total_order.resize(d);
  out.first_order_se.resize(d);
  out.total_order_se.resize(d);

  double worst_se = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const auto first =
        moments(n, [&](std::size_t j) { return o.b(j) * (o.ab(i, j) - o.a(j)); });
    const auto total = moments(n, [&](std::size_t j) {
      const double diff = o.a(j) - o.ab(i, j);
      return 0.5 * diff * diff;
    });
    out.first_order[i] = first.mean / var;
    out.total_order[i] = total.mean / var;
    out.first_order_se[i] = first.se / var;
    out.total_order_se[i] = total.se / var;
    worst_se = std::max(worst_se, out.first_order_se[i] + out.total_order_se[i]);
  }
  out.noise_bound = 3.0 * worst_se;

  if (options.second_order) {
    Matrix s2(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t k = i + 1; k < d; ++k) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += o.ba(i, j) * o.ab(k, j) - o.a(j) * o.b(j);
        const double v_ik = sum / static_cast<double>(n) / var;
        const double s = v_ik - out.first_order[i] - out.first_order[k];
        s2(i, k) = s;
        s2(k, i) = s;
      }
    }
    out.second_order = std::move(s2);
  }

  if (options.bootstrap_resamples > 0) {
    std::mt19937_64 rng(options.seed ^ 0x9E3779B97F4A7C15ull);
    std::vector<std::vector<double>> first(d), total(d);
    std::vector<std::size_t> rows(n);
    for (unsigned r = 0; r < options.bootstrap_resamples; ++r) {
      for (auto& j : rows) j = static_cast<std::size_t>(rng() % n);
      const auto ft = first_total_on(o, rows);
      for (std::size_t i = 0; i < d; ++i) {
        first[i].push_back(ft.first[i]);
        total[i].push_back(ft.total[i]);
      }
    }
    std::vector<IndexInterval> fci, tci;
    for (std::size_t i = 0; i < d; ++i) {
      fci.push_back(percentile_interval(first[i], options.confidence_level));
      tci.push_back(percentile_interval(total[i], options.confidence_level));
    }
    out.first_order_ci = std::move(fci);
    out.total_order_ci = std::move(tci);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Built-in models

const char* to_string(SobolModel m) {
  switch (m) {
    case SobolModel::SingleEarnings: return "single-earnings";
    case SobolModel::SingleRoi: return "single-roi";
    case SobolModel::BinaryEarnings: return "binary-earnings";
    case SobolModel::BinaryRoi: return "binary-roi";
  }
  return "?";
}

const char* to_string(CostUnits u) {
  return u == CostUnits::PerMillion ? "per-million" : "per-token";
}

SobolModel parse_sobol_model(std::string_view text) {
  if (text == "single-earnings") return SobolModel::SingleEarnings;
  if (text == "single-roi") return SobolModel::SingleRoi;
  if (text == "binary-earnings") return SobolModel::BinaryEarnings;
  if (text == "binary-roi") return SobolModel::BinaryRoi;
  throw ValidationError("model",
                        "expected single-earnings, single-roi, binary-earnings or binary-roi; got '" +
                            std::string(text) + "'");
}

CostUnits parse_cost_units(std::string_view text) {
  if (text == "per-million" || text == "per_million" || text == "per_million_tokens") {
    return CostUnits::PerMillion;
  }
  if (text == "per-token" || text == "per_token") return CostUnits::PerToken;
  throw ValidationError("cost_units",
                        "expected per-million or per-token; got '" + std::string(text) + "'");
}

double cost_scale(CostUnits units) {
  return units == CostUnits::PerMillion ? models::kPerMillion : models::kPerToken;
}

bool is_binary(SobolModel m) {
  return m == SobolModel::BinaryEarnings || m == SobolModel::BinaryRoi;
}

std::span<const std::string_view> model_variables(SobolModel m) {
  if (is_binary(m)) return models::kBinaryVariables;
  return models::kSingleVariables;
}

std::size_t SobolSpec::evaluations() const {
  return saltelli_row_count(base_samples(), ranges.size(), second_order);
}

void SobolSpec::validate() const {
  if (samples_exponent < 3 || samples_exponent > 30) {
    throw ValidationError("samples_exponent", "must lie in [3, 30]");
  }
  const auto expected = model_variables(model);
  if (ranges.size() != expected.size()) {
    throw ValidationError("variables", "model " + std::string(to_string(model)) + " needs " +
                                           std::to_string(expected.size()) + " variables");
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (ranges[i].name != expected[i]) {
      throw ValidationError("variables", "expected variable '" + std::string(expected[i]) +
                                             "' at position " + std::to_string(i));
    }
  }
  validate_ranges(ranges);
  for (const auto& r : ranges) {
    if (r.name.starts_with("P") && (r.min < 0.0 || r.max > 1.0)) {
      throw ValidationError("variables." + r.name, "probability range must lie within [0, 1]");
    }
  }
  if (is_binary(model)) {
    using namespace models::binary;
    const double worst = ranges[P_TP].max + ranges[P_FP].max + ranges[P_FN].max;
    if (worst > 1.0) {
      throw ValidationError("variables.P_TP",
                            "P_TP max + P_FP max + P_FN max must not exceed 1 (got " +
                                std::to_string(worst) + ")");
    }
  }
}

std::vector<SobolVariable> commercial_operation_ranges() {
  return {{"G", 1.0, 1000.0},
          {"L", 0.0, 1000.0},
          {"C", 0.01, 100.0},
          {"P", 0.10, 1.0},
          {"T", 50.0, 128000.0}};
}

std::vector<SobolVariable> binary_classification_ranges() {
  return {{"G", 1.0, 1000.0},    {"L_FP", 0.0, 1000.0}, {"L_FN", 0.0, 1000.0},
          {"C", 0.01, 100.0},    {"P_FP", 0.0, 0.1},    {"P_FN", 0.0, 0.1},
          {"P_TP", 0.0, 0.3},    {"T", 50.0, 128000.0}};
}

SobolSpec default_spec(SobolModel model) {
  SobolSpec spec;
  spec.model = model;
  spec.ranges = is_binary(model) ? binary_classification_ranges() : commercial_operation_ranges();
  spec.samples_exponent = 14;
  spec.second_order = true;
  spec.seed = 42;
  return spec;
}

ScalarFunction sobol_model_function(const SobolSpec& spec) {
  const double scale = cost_scale(spec.cost_units);
  const auto variant = spec.variant;
  switch (spec.model) {
    case SobolModel::SingleEarnings:
      return [scale](std::span<const double> x) { return models::single_earnings(x, scale); };
    case SobolModel::SingleRoi:
      return [scale](std::span<const double> x) { return models::single_roi(x, scale); };
    case SobolModel::BinaryEarnings:
      return [scale, variant](std::span<const double> x) {
        return models::binary_earnings(x, variant, scale);
      };
    case SobolModel::BinaryRoi:
      return [scale, variant](std::span<const double> x) {
        return models::binary_roi(x, variant, scale);
      };
  }
  throw ValidationError("model", "unknown model");
}

SobolIndices sobol_analyze(const SobolSpec& spec, unsigned workers,
                           const ProgressCallback& progress) {
  spec.validate();
  SobolOptions options;
  options.base_samples = spec.base_samples();
  options.second_order = spec.second_order;
  options.seed = spec.seed;
  options.bootstrap_resamples = spec.bootstrap;
  options.workers = workers;
  options.progress = progress;
  return sobol_analyze(spec.ranges, sobol_model_function(spec), options);
}

}  // namespace llmroi
