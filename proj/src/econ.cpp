#include "llmroi/econ.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "llmroi/errors.hpp"
#include "validate.hpp"

namespace llmroi {

using detail::require_finite;
using detail::require_nonneg;
using detail::require_probability;

// ---------------------------------------------------------------------------
// ProjectLedger

void ProjectLedger::validate_costs() const {
  require_finite("benefits", benefits_);
  require_nonneg("gains", gains_);
  require_nonneg("losses", losses_);
  require_nonneg("fixed_cost", fixed_cost_);
  require_nonneg("llm_variable_cost", llm_variable_cost_);
  require_nonneg("other_variable_cost", other_variable_cost_);
}

ProjectLedger ProjectLedger::from_benefits(double benefits, double fixed_cost,
                                           double llm_variable_cost, double other_variable_cost) {
  ProjectLedger l;
  l.benefits_ = benefits;
  l.fixed_cost_ = fixed_cost;
  l.llm_variable_cost_ = llm_variable_cost;
  l.other_variable_cost_ = other_variable_cost;
  l.validate_costs();
  return l;
}

ProjectLedger ProjectLedger::from_gains_losses(double gains, double losses, double fixed_cost,
                                               double llm_variable_cost,
                                               double other_variable_cost) {
  ProjectLedger l;
  l.gains_ = gains;
  l.losses_ = losses;
  l.benefits_ = gains - losses;
  l.fixed_cost_ = fixed_cost;
  l.llm_variable_cost_ = llm_variable_cost;
  l.other_variable_cost_ = other_variable_cost;
  l.validate_costs();
  return l;
}

ProjectLedger::ProjectLedger(double benefits, double gains, double losses, double fixed_cost,
                             double llm_variable_cost, double other_variable_cost)
    : benefits_(benefits),
      gains_(gains),
      losses_(losses),
      fixed_cost_(fixed_cost),
      llm_variable_cost_(llm_variable_cost),
      other_variable_cost_(other_variable_cost) {
  validate_costs();
  const double expected = gains - losses;
  const double scale = std::max({1.0, std::abs(gains), std::abs(losses)});
  if (std::abs(benefits - expected) > 1e-9 * scale) {
    throw ValidationError("benefits", "must equal gains - losses (" + std::to_string(expected) +
                                          "), got " + std::to_string(benefits));
  }
}

// ---------------------------------------------------------------------------
// Pricing and transaction types

LlmPricing::LlmPricing(std::string name, double input_price, double output_price, PriceUnit unit)
    : name_(std::move(name)) {
  if (name_.empty()) throw ValidationError("pricing.name", "must not be empty");
  require_nonneg("pricing.input", input_price);
  require_nonneg("pricing.output", output_price);
  const double scale = unit == PriceUnit::PerToken ? kTokensPerMillion : 1.0;
  input_ = input_price * scale;
  output_ = output_price * scale;
}

LlmPricing LlmPricing::with_input_price_per_million(double price) const {
  return LlmPricing(name_, price, output_);
}

TransactionProfile::TransactionProfile(double input_tokens, double output_tokens)
    : input_(input_tokens), output_(output_tokens) {
  require_nonneg("transaction.input_tokens", input_);
  require_nonneg("transaction.output_tokens", output_);
  if (!(input_ + output_ > 0.0)) {
    throw ValidationError("transaction", "input_tokens + output_tokens must be at least 1");
  }
}

IntervalPricing::IntervalPricing(double cost_per_interval, double transactions_per_interval,
                                 double mean_transaction_tokens)
    : cost_(cost_per_interval),
      transactions_(transactions_per_interval),
      tokens_(mean_transaction_tokens) {
  require_nonneg("cost_per_interval", cost_);
  require_finite("transactions_per_interval", transactions_);
  require_finite("mean_transaction_tokens", tokens_);
  if (!(transactions_ > 0.0)) {
    throw ValidationError("transactions_per_interval", "must be positive");
  }
  if (!(tokens_ > 0.0)) throw ValidationError("mean_transaction_tokens", "must be positive");
}

AnecdotalScenario::AnecdotalScenario(std::int64_t total_transactions,
                                     std::int64_t gain_transactions,
                                     std::int64_t loss_transactions, double gain_per_success,
                                     double loss_per_failure, double transaction_cost)
    : n_(total_transactions),
      m_(gain_transactions),
      q_(loss_transactions),
      gain_(gain_per_success),
      loss_(loss_per_failure),
      cost_(transaction_cost) {
  if (n_ <= 0) throw ValidationError("total_transactions", "must be positive");
  if (m_ < 0 || m_ > n_) {
    throw ValidationError("gain_transactions", "must lie in [0, total_transactions]");
  }
  if (q_ < 0 || q_ > n_) {
    throw ValidationError("loss_transactions", "must lie in [0, total_transactions]");
  }
  require_nonneg("gain", gain_);
  require_nonneg("loss", loss_);
  require_nonneg("transaction_cost", cost_);
  if (q_ > m_) {
    warnings_.push_back("loss_transactions (" + std::to_string(q_) +
                        ") exceeds gain_transactions (" + std::to_string(m_) +
                        "); the model assumes losses are much rarer than gains");
  }
}

SuccessDecomposition::SuccessDecomposition(double p_task, double p_business_given_task,
                                           double p_business_given_task_failure)
    : p_task_(p_task),
      p_given_success_(p_business_given_task),
      p_given_failure_(p_business_given_task_failure) {
  require_probability("p_task", p_task_);
  require_probability("p_business_given_task", p_given_success_);
  require_probability("p_business_given_task_failure", p_given_failure_);
}

SingleOutcomeScenario::SingleOutcomeScenario(double gain, double loss, double p_success,
                                             LlmPricing pricing, TransactionProfile transaction,
                                             double extra_cost_per_transaction)
    : gain_(gain),
      loss_(loss),
      p_(p_success),
      pricing_(std::move(pricing)),
      transaction_(transaction),
      extra_(extra_cost_per_transaction) {
  require_nonneg("gain", gain_);
  require_nonneg("loss", loss_);
  require_probability("p_success", p_);
  require_nonneg("extra_cost", extra_);
}

SingleOutcomeScenario SingleOutcomeScenario::with_gain(double gain) const {
  return {gain, loss_, p_, pricing_, transaction_, extra_};
}
SingleOutcomeScenario SingleOutcomeScenario::with_loss(double loss) const {
  return {gain_, loss, p_, pricing_, transaction_, extra_};
}
SingleOutcomeScenario SingleOutcomeScenario::with_p_success(double p) const {
  return {gain_, loss_, p, pricing_, transaction_, extra_};
}
SingleOutcomeScenario SingleOutcomeScenario::with_pricing(LlmPricing pricing) const {
  return {gain_, loss_, p_, std::move(pricing), transaction_, extra_};
}
SingleOutcomeScenario SingleOutcomeScenario::with_transaction(
    TransactionProfile transaction) const {
  return {gain_, loss_, p_, pricing_, transaction, extra_};
}

BinaryOutcomeScenario::BinaryOutcomeScenario(double gain, double loss_fp, double loss_fn,
                                             double p_tp, double p_fp, double p_fn,
                                             LlmPricing pricing, TransactionProfile transaction)
    : gain_(gain),
      loss_fp_(loss_fp),
      loss_fn_(loss_fn),
      p_tp_(p_tp),
      p_fp_(p_fp),
      p_fn_(p_fn),
      pricing_(std::move(pricing)),
      transaction_(transaction) {
  require_nonneg("gain", gain_);
  require_nonneg("loss_fp", loss_fp_);
  require_nonneg("loss_fn", loss_fn_);
  require_probability("p_tp", p_tp_);
  require_probability("p_fp", p_fp_);
  require_probability("p_fn", p_fn_);
  if (p_tp_ + p_fp_ + p_fn_ > 1.0 + 1e-12) {
    throw ValidationError("p_tp", "p_tp + p_fp + p_fn must not exceed 1, got " +
                                      std::to_string(p_tp_ + p_fp_ + p_fn_));
  }
}

OutcomeLottery::OutcomeLottery(std::vector<Outcome> outcomes) : outcomes_(std::move(outcomes)) {
  if (outcomes_.empty()) throw ValidationError("outcomes", "must not be empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < outcomes_.size(); ++i) {
    const std::string field = "outcomes[" + std::to_string(i) + "]";
    require_probability(field + ".probability", outcomes_[i].probability);
    require_finite(field + ".utility", outcomes_[i].utility);
    sum += outcomes_[i].probability;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("outcomes", "probabilities must sum to 1, got " + std::to_string(sum));
  }
}

// ---------------------------------------------------------------------------
// Operations

double expected_utility(const OutcomeLottery& lottery) {
  double total = 0.0;
  for (const auto& o : lottery.outcomes()) total += o.probability * o.utility;
  return total;
}

double project_earnings(const ProjectLedger& ledger) {
  return ledger.benefits() - ledger.total_cost();
}

EarningsRoi project_earnings_roi(const ProjectLedger& ledger) {
  const double cost = ledger.total_cost();
  const double earnings = project_earnings(ledger);
  if (cost == 0.0) {
    throw DomainError(error_code::kRoiUndefined, "RoI is undefined for a project with zero cost");
  }
  return {earnings, earnings / cost};
}

double cost_per_token(const IntervalPricing& interval) {
  return interval.cost_per_interval() /
         (interval.transactions_per_interval() * interval.mean_transaction_tokens());
}

double transaction_cost(const LlmPricing& pricing, const TransactionProfile& profile,
                        double extra) {
  require_nonneg("extra_cost", extra);
  return (profile.input_tokens() * pricing.input_price_per_million() +
          profile.output_tokens() * pricing.output_price_per_million()) /
             kTokensPerMillion +
         extra;
}

double anecdotal_earnings(const AnecdotalScenario& s) {
  const auto n = static_cast<double>(s.total_transactions());
  const auto m = static_cast<double>(s.gain_transactions());
  const auto q = static_cast<double>(s.loss_transactions());
  return s.gain_per_success() * m - n * s.transaction_cost() - s.loss_per_failure() * q;
}

EarningsRoi anecdotal_earnings_roi(const AnecdotalScenario& s) {
  const double spend = static_cast<double>(s.total_transactions()) * s.transaction_cost();
  const double earnings = anecdotal_earnings(s);
  if (spend == 0.0) {
    throw DomainError(error_code::kRoiUndefined, "RoI is undefined when N * C_t is zero");
  }
  return {earnings, earnings / spend};
}

double composite_success_probability(const SuccessDecomposition& d) {
  const double p = d.p_business_given_task() * d.p_task() +
                   d.p_business_given_task_failure() * (1.0 - d.p_task());
  return std::clamp(p, 0.0, 1.0);
}

double transaction_cost(const SingleOutcomeScenario& s) {
  return transaction_cost(s.pricing(), s.transaction(), s.extra_cost_per_transaction());
}

double transaction_cost(const BinaryOutcomeScenario& s) {
  return transaction_cost(s.pricing(), s.transaction());
}

EvaluationResult evaluate_single(const SingleOutcomeScenario& s) {
  const double g = s.gain();
  const double l = s.loss();
  const double p = s.p_success();
  const double ct = transaction_cost(s);
  const double benefit = g * p - l * (1.0 - p);

  EvaluationResult r;
  r.transaction_cost = ct;
  r.expected_earnings = benefit - ct;
  if (ct > 0.0) r.expected_roi = benefit / ct - 1.0;
  r.outcome_contributions = {
      {"success", p, (g - ct) * p},
      {"failure", 1.0 - p, -(l + ct) * (1.0 - p)},
  };
  return r;
}

EvaluationResult evaluate_binary(const BinaryOutcomeScenario& s, BinaryVariant variant) {
  const double g = s.gain();
  const double ct = transaction_cost(s);
  const double tp = s.p_tp();
  const double fp = s.p_fp();
  const double fn = s.p_fn();
  const double tn = s.p_tn();

  EvaluationResult r;
  r.transaction_cost = ct;
  if (variant == BinaryVariant::Canonical) {
    r.outcome_contributions = {
        {"true_positive", tp, (g - ct) * tp},
        {"true_negative", tn, -ct * tn},
        {"false_negative", fn, -(s.loss_fn() + ct) * fn},
        {"false_positive", fp, -(s.loss_fp() + ct) * fp},
    };
    double e = 0.0;
    for (const auto& c : r.outcome_contributions) e += c.contribution;
    r.expected_earnings = e;
    if (ct > 0.0) {
      r.expected_roi = (g * tp - s.loss_fn() * fn - s.loss_fp() * fp) / ct - 1.0;
    }
  } else {
    // Substituted expression as printed; the lone -C_t term rides on the TN row.
    r.outcome_contributions = {
        {"true_positive", tp, (g - 2.0 * ct) * tp},
        {"true_negative", tn, -ct},
        {"false_negative", fn, -(s.loss_fn() + 2.0 * ct) * fn},
        {"false_positive", fp, -(s.loss_fp() + 2.0 * ct) * fp},
    };
    r.expected_earnings = (g - 2.0 * ct) * tp - (s.loss_fn() + 2.0 * ct) * fn -
                          (s.loss_fp() + 2.0 * ct) * fp - ct;
    if (ct > 0.0) r.expected_roi = r.expected_earnings / ct;
  }
  return r;
}

EvaluationResult evaluate(const Scenario& s, BinaryVariant variant) {
  return std::visit(
      [variant](const auto& sc) -> EvaluationResult {
        if constexpr (std::is_same_v<std::decay_t<decltype(sc)>, SingleOutcomeScenario>) {
          return evaluate_single(sc);
        } else {
          return evaluate_binary(sc, variant);
        }
      },
      s);
}

namespace {

// G*P - L*(1-P): the probability-weighted business outcome before LLM cost.
double business_value(const SingleOutcomeScenario& s) {
  return s.gain() * s.p_success() - s.loss() * (1.0 - s.p_success());
}

// Cost that does not scale with input tokens.
double fixed_transaction_part(const SingleOutcomeScenario& s) {
  return s.transaction().output_tokens() * s.pricing().output_price_per_million() /
             kTokensPerMillion +
         s.extra_cost_per_transaction();
}

}  // namespace

double breakeven(SolveFor solve_for, const SingleOutcomeScenario& reference,
                 const SingleOutcomeScenario& candidate) {
  switch (solve_for) {
    case SolveFor::Probability: {
      const double e_ref = evaluate_single(reference).expected_earnings;
      const double denom = candidate.gain() + candidate.loss();
      if (denom == 0.0) {
        throw DomainError(error_code::kNoSolution,
                          "earnings do not depend on p_success when gain + loss = 0");
      }
      const double root = (e_ref + candidate.loss() + transaction_cost(candidate)) / denom;
      if (!(root >= 0.0 && root <= 1.0)) {
        throw DomainError(error_code::kOutOfDomain,
                          "break-even probability " + std::to_string(root) +
                              " lies outside [0, 1]",
                          root);
      }
      return root;
    }
    case SolveFor::Tokens: {
      const double slope = (candidate.pricing().input_price_per_million() -
                            reference.pricing().input_price_per_million()) /
                           kTokensPerMillion;
      if (slope == 0.0) {
        throw DomainError(error_code::kNoSolution,
                          "equal input prices: the earnings curves are parallel in T");
      }
      const double offset = (business_value(candidate) - fixed_transaction_part(candidate)) -
                            (business_value(reference) - fixed_transaction_part(reference));
      const double root = offset / slope;
      if (!(root > 0.0)) {
        throw DomainError(error_code::kOutOfDomain,
                          "break-even token count " + std::to_string(root) + " is not positive",
                          root);
      }
      return root;
    }
    case SolveFor::UnitPrice: {
      const double e_ref = evaluate_single(reference).expected_earnings;
      const double tokens = candidate.transaction().input_tokens();
      if (tokens == 0.0) {
        throw DomainError(error_code::kNoSolution,
                          "candidate has no input tokens; earnings do not depend on input price");
      }
      const double root = (business_value(candidate) - e_ref - fixed_transaction_part(candidate)) *
                          kTokensPerMillion / tokens;
      if (!(root > 0.0)) {
        throw DomainError(error_code::kOutOfDomain,
                          "break-even input price " + std::to_string(root) + " is not positive",
                          root);
      }
      return root;
    }
  }
  throw ValidationError("solve_for", "unknown target");
}

SingleOutcomeScenario with_variable(const SingleOutcomeScenario& s, SweepVariable variable,
                                    double value) {
  switch (variable) {
    case SweepVariable::Tokens:
      return s.with_transaction(TransactionProfile(value, s.transaction().output_tokens()));
    case SweepVariable::Probability:
      return s.with_p_success(value);
    case SweepVariable::UnitPrice:
      return s.with_pricing(s.pricing().with_input_price_per_million(value));
    case SweepVariable::Gain:
      return s.with_gain(value);
    case SweepVariable::Loss:
      return s.with_loss(value);
  }
  return s;
}

SweepTable sweep(std::span<const NamedSingle> scenarios, SweepVariable variable, double from,
                 double to, int steps) {
  require_finite("from", from);
  require_finite("to", to);
  if (!(from < to)) throw ValidationError("from", "must be strictly less than `to`");
  if (steps < 2) throw ValidationError("steps", "must be at least 2");
  if (scenarios.empty()) throw ValidationError("scenarios", "must not be empty");
  if (variable == SweepVariable::Probability && (from < 0.0 || to > 1.0)) {
    throw ValidationError("from", "probability range must lie within [0, 1]");
  }
  if (variable != SweepVariable::Probability && from < 0.0) {
    throw ValidationError("from", "must be nonnegative for this variable");
  }

  SweepTable table;
  table.variable = variable;
  std::vector<double> xs(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    xs[static_cast<std::size_t>(k)] =
        k == steps - 1 ? to : from + (to - from) * static_cast<double>(k) / (steps - 1);
  }

  for (const auto& named : scenarios) {
    SweepSeries series{named.name, {}};
    series.points.reserve(xs.size());
    for (double x : xs) {
      const auto r = evaluate_single(with_variable(named.scenario, variable, x));
      series.points.push_back({x, r.expected_earnings, r.expected_roi});
    }
    table.series.push_back(std::move(series));
  }

  for (std::size_t a = 0; a < table.series.size(); ++a) {
    for (std::size_t b = a + 1; b < table.series.size(); ++b) {
      const auto& pa = table.series[a].points;
      const auto& pb = table.series[b].points;
      double prev = pa[0].expected_earnings - pb[0].expected_earnings;
      if (prev == 0.0) {
        table.crossings.push_back(
            {table.series[a].scenario, table.series[b].scenario, xs[0], pa[0].expected_earnings});
      }
      for (std::size_t k = 1; k < xs.size(); ++k) {
        const double cur = pa[k].expected_earnings - pb[k].expected_earnings;
        if (cur == 0.0) {
          if (prev != 0.0) {
            table.crossings.push_back({table.series[a].scenario, table.series[b].scenario, xs[k],
                                       pa[k].expected_earnings});
          }
        } else if ((prev < 0.0 && cur > 0.0) || (prev > 0.0 && cur < 0.0)) {
          const double t = prev / (prev - cur);
          const double x = xs[k - 1] + (xs[k] - xs[k - 1]) * t;
          const double e = pa[k - 1].expected_earnings +
                           (pa[k].expected_earnings - pa[k - 1].expected_earnings) * t;
          table.crossings.push_back({table.series[a].scenario, table.series[b].scenario, x, e});
        }
        prev = cur;
      }
    }
  }
  return table;
}

CompressionTradeoff compression_tradeoff(const SingleOutcomeScenario& s,
                                         double compression_factor, double success_delta) {
  require_finite("compression_factor", compression_factor);
  if (!(compression_factor > 1.0)) {
    throw ValidationError("compression_factor", "must be greater than 1");
  }
  require_nonneg("success_delta", success_delta);
  if (success_delta > s.p_success()) {
    throw ValidationError("success_delta", "must not exceed p_success");
  }
  const double token_cost = transaction_cost(s.pricing(), s.transaction());
  const double compressed_cost = token_cost / compression_factor;
  const double p = s.p_success() - success_delta;
  const double compressed_earnings = s.gain() * p - s.loss() * (1.0 - p) - compressed_cost -
                                     s.extra_cost_per_transaction();

  CompressionTradeoff out;
  out.cost_saved = token_cost - compressed_cost;
  out.earnings_delta = compressed_earnings - evaluate_single(s).expected_earnings;
  return out;
}

std::vector<PairwiseDelta> pairwise_deltas(std::span<const NamedResult> results) {
  std::vector<PairwiseDelta> out;
  for (std::size_t a = 0; a < results.size(); ++a) {
    for (std::size_t b = a + 1; b < results.size(); ++b) {
      const auto& ra = results[a].result;
      const auto& rb = results[b].result;
      PairwiseDelta d{results[a].name, results[b].name,
                      ra.expected_earnings - rb.expected_earnings, std::nullopt};
      if (ra.expected_roi && rb.expected_roi) d.roi_delta = *ra.expected_roi - *rb.expected_roi;
      out.push_back(std::move(d));
    }
  }
  return out;
}

const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::Tokens: return "T";
    case SweepVariable::Probability: return "P";
    case SweepVariable::UnitPrice: return "C";
    case SweepVariable::Gain: return "G";
    case SweepVariable::Loss: return "L";
  }
  return "?";
}

const char* to_string(SolveFor s) {
  switch (s) {
    case SolveFor::Probability: return "probability";
    case SolveFor::Tokens: return "tokens";
    case SolveFor::UnitPrice: return "unit-price";
  }
  return "?";
}

const char* to_string(BinaryVariant v) {
  return v == BinaryVariant::Canonical ? "canonical" : "paper-compat";
}

SweepVariable parse_sweep_variable(std::string_view text) {
  if (text == "T") return SweepVariable::Tokens;
  if (text == "P") return SweepVariable::Probability;
  if (text == "C") return SweepVariable::UnitPrice;
  if (text == "G") return SweepVariable::Gain;
  if (text == "L") return SweepVariable::Loss;
  throw ValidationError("variable", "expected one of T, P, C, G, L; got '" + std::string(text) +
                                        "'");
}

SolveFor parse_solve_for(std::string_view text) {
  if (text == "probability") return SolveFor::Probability;
  if (text == "tokens") return SolveFor::Tokens;
  if (text == "unit-price" || text == "unit_price") return SolveFor::UnitPrice;
  throw ValidationError("solve_for", "expected probability, tokens or unit-price; got '" +
                                         std::string(text) + "'");
}

BinaryVariant parse_binary_variant(std::string_view text) {
  if (text == "canonical") return BinaryVariant::Canonical;
  if (text == "paper-compat" || text == "paper_compat") return BinaryVariant::PaperCompat;
  throw ValidationError("variant", "expected canonical or paper-compat; got '" +
                                       std::string(text) + "'");
}

}  // namespace llmroi
