#pragma once

// Closed-form economic models for choosing between language models:
// project earnings/RoI, per-transaction cost, expected earnings and RoI for
// success/failure and confusion-matrix scenarios, break-even solvers, sweeps
// and the prompt-compression trade-off.
//
// All types validate on construction and are immutable afterwards; every
// operation is a pure function.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace llmroi {

inline constexpr double kTokensPerMillion = 1.0e6;

enum class PriceUnit { PerMillionTokens, PerToken };

/// Benefits, gains/losses and the cost breakdown of a whole project.
class ProjectLedger {
 public:
  /// Benefits given directly (no gain/loss split).
  static ProjectLedger from_benefits(double benefits, double fixed_cost,
                                     double llm_variable_cost, double other_variable_cost);
  /// Benefits derived as gains - losses.
  static ProjectLedger from_gains_losses(double gains, double losses, double fixed_cost,
                                         double llm_variable_cost, double other_variable_cost);
  /// Both given; throws unless benefits == gains - losses.
  ProjectLedger(double benefits, double gains, double losses, double fixed_cost,
                double llm_variable_cost, double other_variable_cost);

  double benefits() const { return benefits_; }
  double gains() const { return gains_; }
  double losses() const { return losses_; }
  double fixed_cost() const { return fixed_cost_; }
  double llm_variable_cost() const { return llm_variable_cost_; }
  double other_variable_cost() const { return other_variable_cost_; }
  double variable_cost() const { return llm_variable_cost_ + other_variable_cost_; }
  double total_cost() const { return fixed_cost_ + variable_cost(); }

  friend bool operator==(const ProjectLedger&, const ProjectLedger&) = default;

 private:
  ProjectLedger() = default;
  void validate_costs() const;

  double benefits_ = 0.0;
  double gains_ = 0.0;
  double losses_ = 0.0;
  double fixed_cost_ = 0.0;
  double llm_variable_cost_ = 0.0;
  double other_variable_cost_ = 0.0;
};

/// Token prices, normalized to currency per million tokens.
class LlmPricing {
 public:
  LlmPricing(std::string name, double input_price, double output_price,
             PriceUnit unit = PriceUnit::PerMillionTokens);

  const std::string& name() const { return name_; }
  double input_price_per_million() const { return input_; }
  double output_price_per_million() const { return output_; }

  LlmPricing with_input_price_per_million(double price) const;

  friend bool operator==(const LlmPricing&, const LlmPricing&) = default;

 private:
  std::string name_;
  double input_ = 0.0;
  double output_ = 0.0;
};

/// Token counts of one average transaction. Counts are held as reals so that
/// compressed or swept sizes can be represented; they must be finite, >= 0,
/// and not both zero.
class TransactionProfile {
 public:
  TransactionProfile(double input_tokens, double output_tokens);

  double input_tokens() const { return input_; }
  double output_tokens() const { return output_; }
  double total_tokens() const { return input_ + output_; }

  friend bool operator==(const TransactionProfile&, const TransactionProfile&) = default;

 private:
  double input_ = 0.0;
  double output_ = 0.0;
};

/// Machine time charged per interval, converted to a per-token price.
class IntervalPricing {
 public:
  IntervalPricing(double cost_per_interval, double transactions_per_interval,
                  double mean_transaction_tokens);

  double cost_per_interval() const { return cost_; }
  double transactions_per_interval() const { return transactions_; }
  double mean_transaction_tokens() const { return tokens_; }

 private:
  double cost_ = 0.0;
  double transactions_ = 0.0;
  double tokens_ = 0.0;
};

/// Count-based earnings estimate: N transactions, M produce a gain, Q a loss.
class AnecdotalScenario {
 public:
  AnecdotalScenario(std::int64_t total_transactions, std::int64_t gain_transactions,
                    std::int64_t loss_transactions, double gain_per_success,
                    double loss_per_failure, double transaction_cost);

  std::int64_t total_transactions() const { return n_; }
  std::int64_t gain_transactions() const { return m_; }
  std::int64_t loss_transactions() const { return q_; }
  double gain_per_success() const { return gain_; }
  double loss_per_failure() const { return loss_; }
  double transaction_cost() const { return cost_; }

  /// Non-fatal diagnostics raised at construction (e.g. Q > M).
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::int64_t n_ = 0;
  std::int64_t m_ = 0;
  std::int64_t q_ = 0;
  double gain_ = 0.0;
  double loss_ = 0.0;
  double cost_ = 0.0;
  std::vector<std::string> warnings_;
};

/// Business success split into LLM-task success and conditional business success.
class SuccessDecomposition {
 public:
  SuccessDecomposition(double p_task, double p_business_given_task,
                       double p_business_given_task_failure);

  double p_task() const { return p_task_; }
  double p_business_given_task() const { return p_given_success_; }
  double p_business_given_task_failure() const { return p_given_failure_; }

 private:
  double p_task_ = 0.0;
  double p_given_success_ = 0.0;
  double p_given_failure_ = 0.0;
};

/// One transaction that either succeeds (gain G) or fails (loss L).
class SingleOutcomeScenario {
 public:
  SingleOutcomeScenario(double gain, double loss, double p_success, LlmPricing pricing,
                        TransactionProfile transaction, double extra_cost_per_transaction = 0.0);

  double gain() const { return gain_; }
  double loss() const { return loss_; }
  double p_success() const { return p_; }
  const LlmPricing& pricing() const { return pricing_; }
  const TransactionProfile& transaction() const { return transaction_; }
  double extra_cost_per_transaction() const { return extra_; }

  SingleOutcomeScenario with_gain(double gain) const;
  SingleOutcomeScenario with_loss(double loss) const;
  SingleOutcomeScenario with_p_success(double p) const;
  SingleOutcomeScenario with_pricing(LlmPricing pricing) const;
  SingleOutcomeScenario with_transaction(TransactionProfile transaction) const;

  friend bool operator==(const SingleOutcomeScenario&, const SingleOutcomeScenario&) = default;

 private:
  double gain_;
  double loss_;
  double p_;
  LlmPricing pricing_;
  TransactionProfile transaction_;
  double extra_;
};

/// Confusion-matrix scenario. P_TN is derived, never stored.
class BinaryOutcomeScenario {
 public:
  BinaryOutcomeScenario(double gain, double loss_fp, double loss_fn, double p_tp, double p_fp,
                        double p_fn, LlmPricing pricing, TransactionProfile transaction);

  double gain() const { return gain_; }
  double loss_fp() const { return loss_fp_; }
  double loss_fn() const { return loss_fn_; }
  double p_tp() const { return p_tp_; }
  double p_fp() const { return p_fp_; }
  double p_fn() const { return p_fn_; }
  double p_tn() const { return 1.0 - (p_tp_ + p_fp_ + p_fn_); }
  const LlmPricing& pricing() const { return pricing_; }
  const TransactionProfile& transaction() const { return transaction_; }

  friend bool operator==(const BinaryOutcomeScenario&, const BinaryOutcomeScenario&) = default;

 private:
  double gain_;
  double loss_fp_;
  double loss_fn_;
  double p_tp_;
  double p_fp_;
  double p_fn_;
  LlmPricing pricing_;
  TransactionProfile transaction_;
};

using Scenario = std::variant<SingleOutcomeScenario, BinaryOutcomeScenario>;

struct OutcomeContribution {
  std::string outcome;
  double probability = 0.0;
  double contribution = 0.0;

  friend bool operator==(const OutcomeContribution&, const OutcomeContribution&) = default;
};

struct EvaluationResult {
  double expected_earnings = 0.0;
  /// Empty when the transaction cost is zero.
  std::optional<double> expected_roi;
  double transaction_cost = 0.0;
  std::vector<OutcomeContribution> outcome_contributions;

  bool roi_undefined() const { return !expected_roi.has_value(); }

  friend bool operator==(const EvaluationResult&, const EvaluationResult&) = default;
};

/// A discrete lottery over utilities.
class OutcomeLottery {
 public:
  struct Outcome {
    double probability;
    double utility;
  };

  explicit OutcomeLottery(std::vector<Outcome> outcomes);

  std::span<const Outcome> outcomes() const { return outcomes_; }

 private:
  std::vector<Outcome> outcomes_;
};

enum class BinaryVariant { Canonical, PaperCompat };

struct EarningsRoi {
  double earnings = 0.0;
  double roi = 0.0;
};

double expected_utility(const OutcomeLottery& lottery);

double project_earnings(const ProjectLedger& ledger);
/// Throws DomainError(roi_undefined) when the total cost is zero.
EarningsRoi project_earnings_roi(const ProjectLedger& ledger);

double cost_per_token(const IntervalPricing& interval);

/// Currency per transaction: token charges at per-million prices plus `extra`.
double transaction_cost(const LlmPricing& pricing, const TransactionProfile& profile,
                        double extra = 0.0);

double anecdotal_earnings(const AnecdotalScenario& s);
/// Throws DomainError(roi_undefined) when N * C_t is zero.
EarningsRoi anecdotal_earnings_roi(const AnecdotalScenario& s);

double composite_success_probability(const SuccessDecomposition& d);

double transaction_cost(const SingleOutcomeScenario& s);
double transaction_cost(const BinaryOutcomeScenario& s);

EvaluationResult evaluate_single(const SingleOutcomeScenario& s);
EvaluationResult evaluate_binary(const BinaryOutcomeScenario& s,
                                 BinaryVariant variant = BinaryVariant::Canonical);
EvaluationResult evaluate(const Scenario& s, BinaryVariant variant = BinaryVariant::Canonical);

enum class SolveFor { Probability, Tokens, UnitPrice };

/// Value of the unknown at which the candidate's expected earnings equal the
/// reference's.
///
///  - Probability: the candidate's success probability; the reference is fixed.
///  - UnitPrice: the candidate's input price (per million tokens).
///  - Tokens: the common input-token count at which the two earnings curves
///    cross, both scenarios evaluated at the same size.
///
/// Throws DomainError(no_solution) on a degenerate coefficient and
/// DomainError(out_of_domain) carrying the raw root when it falls outside
/// [0,1] (probability) or (0, inf) (tokens, price).
double breakeven(SolveFor solve_for, const SingleOutcomeScenario& reference,
                 const SingleOutcomeScenario& candidate);

enum class SweepVariable { Tokens, Probability, UnitPrice, Gain, Loss };

struct NamedSingle {
  std::string name;
  SingleOutcomeScenario scenario;
};

struct SweepPoint {
  double value = 0.0;
  double expected_earnings = 0.0;
  std::optional<double> expected_roi;

  friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

struct SweepSeries {
  std::string scenario;
  std::vector<SweepPoint> points;

  friend bool operator==(const SweepSeries&, const SweepSeries&) = default;
};

struct SweepCrossing {
  std::string first;
  std::string second;
  double value = 0.0;
  double expected_earnings = 0.0;

  friend bool operator==(const SweepCrossing&, const SweepCrossing&) = default;
};

struct SweepTable {
  SweepVariable variable = SweepVariable::Tokens;
  std::vector<SweepSeries> series;
  std::vector<SweepCrossing> crossings;

  friend bool operator==(const SweepTable&, const SweepTable&) = default;
};

/// Applies `value` to the swept variable (T = input tokens, C = input price per
/// million tokens).
SingleOutcomeScenario with_variable(const SingleOutcomeScenario& s, SweepVariable variable,
                                    double value);

SweepTable sweep(std::span<const NamedSingle> scenarios, SweepVariable variable, double from,
                 double to, int steps);

struct CompressionTradeoff {
  double cost_saved = 0.0;
  double earnings_delta = 0.0;
};

/// Shrinks every transaction by `compression_factor` while losing
/// `success_delta` of success probability.
CompressionTradeoff compression_tradeoff(const SingleOutcomeScenario& s,
                                         double compression_factor, double success_delta);

struct PairwiseDelta {
  std::string first;
  std::string second;
  double earnings_delta = 0.0;           // first - second
  std::optional<double> roi_delta;       // empty if either RoI is undefined

  friend bool operator==(const PairwiseDelta&, const PairwiseDelta&) = default;
};

struct NamedResult {
  std::string name;
  EvaluationResult result;
};

std::vector<PairwiseDelta> pairwise_deltas(std::span<const NamedResult> results);

const char* to_string(SweepVariable v);
const char* to_string(SolveFor s);
const char* to_string(BinaryVariant v);
SweepVariable parse_sweep_variable(std::string_view text);
SolveFor parse_solve_for(std::string_view text);
BinaryVariant parse_binary_variant(std::string_view text);

}  // namespace llmroi
