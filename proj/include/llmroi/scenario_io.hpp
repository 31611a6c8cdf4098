#pragma once

// Scenario and Sobol-spec documents, result documents, and their JSON/CSV/
// table encodings.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "llmroi/econ.hpp"
#include "llmroi/local_sensitivity.hpp"
#include "llmroi/sobol.hpp"

namespace llmroi {

using Json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

struct NamedScenario {
  std::string name;
  Scenario scenario;

  friend bool operator==(const NamedScenario&, const NamedScenario&) = default;
};

struct ScenarioDocument {
  std::string schema_version = kSchemaVersion;
  std::vector<NamedScenario> scenarios;

  /// Throws ValidationError("scenario") if no scenario has this name.
  const NamedScenario& find(std::string_view name) const;
  /// Single-outcome scenarios only; throws if `name` is binary.
  NamedSingle single(std::string_view name) const;

  friend bool operator==(const ScenarioDocument&, const ScenarioDocument&) = default;
};

/// Parses JSON text into a validated document. Pricing defaults and
/// transaction defaults are resolved and prices normalized to per-million.
/// Throws ParseError for malformed text, ValidationError with a dotted field
/// path (e.g. "scenarios[1].p_success") otherwise.
ScenarioDocument parse_scenario(std::string_view text);
ScenarioDocument scenario_document_from_json(const Json& j);

/// Full-precision JSON; parse_scenario(write_scenario(d)) == d.
std::string write_scenario(const ScenarioDocument& doc);
Json to_json(const ScenarioDocument& doc);

/// One scenario object. `path` prefixes field names in errors.
/// `defaults` may supply "pricing" and "transaction" blocks.
NamedScenario scenario_from_json(const Json& j, const std::string& path,
                                 const Json& defaults = Json::object());
Json to_json(const NamedScenario& s);

SobolSpec parse_sobol_spec(std::string_view text);
SobolSpec sobol_spec_from_json(const Json& j, const std::string& path = "");
std::string write_sobol_spec(const SobolSpec& spec);
Json to_json(const SobolSpec& spec);

/// Parses JSON text, mapping syntax errors to ParseError(line, column).
Json parse_json(std::string_view text);

// ---------------------------------------------------------------------------
// Results

struct BreakevenReport {
  SolveFor solve_for = SolveFor::Probability;
  std::string reference;
  std::string candidate;
  double value = 0.0;
  double reference_earnings = 0.0;
  /// Candidate earnings with the solved value substituted.
  double candidate_earnings = 0.0;

  friend bool operator==(const BreakevenReport&, const BreakevenReport&) = default;
};

/// Solves and re-substitutes. For tokens the value is the shared transaction
/// size; for probability and unit price it is the candidate's parameter.
BreakevenReport breakeven_report(SolveFor solve_for, const NamedSingle& reference,
                                 const NamedSingle& candidate);

struct ResultDocument {
  std::string tool_version;
  Json inputs = Json::object();
  std::vector<NamedResult> results;
  std::vector<PairwiseDelta> comparisons;
  std::optional<BreakevenReport> breakeven;
  std::optional<SweepTable> series;
  std::optional<SobolIndices> sobol;
  std::optional<LocalSensitivity> local;
  std::vector<std::uint64_t> seeds;
};

enum class OutputFormat { Json, Csv, Table };

OutputFormat parse_output_format(std::string_view text);

/// json: canonical (sorted keys, numbers rounded to 12 significant digits).
/// csv: one section per populated part, blank line between sections.
/// table: aligned text for people.
std::string write_results(const ResultDocument& doc, OutputFormat format);

/// Reads canonical JSON back. write_results(parse_results(t), Json) == t for
/// any t produced by write_results.
ResultDocument parse_results(std::string_view text);

// Canonical encodings shared with the service.
Json to_json(const EvaluationResult& r);
Json to_json(const NamedResult& r);
Json to_json(const PairwiseDelta& d);
Json to_json(const BreakevenReport& b);
Json to_json(const SweepTable& t);
Json to_json(const SobolIndices& s);
Json to_json(const LocalSensitivity& l);
Json to_json(const ResultDocument& doc);

/// Rounds every floating-point number in `j` to 12 significant digits.
Json canonicalize(Json j);
/// Canonical text: canonicalize + compact dump with sorted keys.
std::string canonical_dump(const Json& j);

}  // namespace llmroi
