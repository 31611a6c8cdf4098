#include "llmroi/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <set>
#include <sstream>

#include "llmroi/errors.hpp"
#include "llmroi/format.hpp"

namespace llmroi {

namespace {

std::string join_path(const std::string& path, const std::string& field) {
  if (path.empty()) return field;
  if (field.empty()) return path;
  return path + "." + field;
}

void require_object(const Json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path, "expected an object");
}

void reject_unknown(const Json& j, const std::string& path,
                    std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError(join_path(path, key), "unknown field");
    }
  }
}

const Json* find(const Json& j, const std::string& key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double number(const Json& j, const std::string& key, const std::string& path) {
  const Json* v = find(j, key);
  if (v == nullptr) throw ValidationError(join_path(path, key), "required");
  if (!v->is_number()) throw ValidationError(join_path(path, key), "expected a number");
  return v->get<double>();
}

double number_or(const Json& j, const std::string& key, const std::string& path, double fallback) {
  return find(j, key) == nullptr ? fallback : number(j, key, path);
}

std::string text(const Json& j, const std::string& key, const std::string& path) {
  const Json* v = find(j, key);
  if (v == nullptr) throw ValidationError(join_path(path, key), "required");
  if (!v->is_string()) throw ValidationError(join_path(path, key), "expected a string");
  return v->get<std::string>();
}

std::string text_or(const Json& j, const std::string& key, const std::string& path,
                    std::string fallback) {
  return find(j, key) == nullptr ? fallback : text(j, key, path);
}

bool boolean_or(const Json& j, const std::string& key, const std::string& path, bool fallback) {
  const Json* v = find(j, key);
  if (v == nullptr) return fallback;
  if (!v->is_boolean()) throw ValidationError(join_path(path, key), "expected true or false");
  return v->get<bool>();
}

std::uint64_t unsigned_or(const Json& j, const std::string& key, const std::string& path,
                          std::uint64_t fallback) {
  const Json* v = find(j, key);
  if (v == nullptr) return fallback;
  if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
    throw ValidationError(join_path(path, key), "expected a non-negative integer");
  }
  return v->get<std::uint64_t>();
}

// Re-raises a constructor's ValidationError with the document path prepended.
template <typename F>
auto with_path(const std::string& path, F&& make) {
  try {
    return make();
  } catch (const ValidationError& e) {
    throw ValidationError(join_path(path, e.field()), e.reason());
  }
}

LlmPricing pricing_from_json(const Json& j, const std::string& path,
                             const std::string& default_name) {
  require_object(j, path);
  reject_unknown(j, path, {"unit", "input", "output", "name"});
  const std::string unit_text = text_or(j, "unit", path, "per_million_tokens");
  PriceUnit unit;
  if (unit_text == "per_million_tokens") {
    unit = PriceUnit::PerMillionTokens;
  } else if (unit_text == "per_token") {
    unit = PriceUnit::PerToken;
  } else {
    throw ValidationError(join_path(path, "unit"), "expected per_million_tokens or per_token");
  }
  const double in = number(j, "input", path);
  const double out = number_or(j, "output", path, 0.0);
  const std::string name = text_or(j, "name", path, default_name);
  // Constructor fields are named pricing.*; strip that prefix here.
  try {
    return LlmPricing(name, in, out, unit);
  } catch (const ValidationError& e) {
    std::string field = e.field();
    if (field.starts_with("pricing.")) field.erase(0, 8);
    throw ValidationError(join_path(path, field), e.reason());
  }
}

Json pricing_to_json(const LlmPricing& p) {
  Json j{{"unit", "per_million_tokens"},
         {"input", p.input_price_per_million()},
         {"output", p.output_price_per_million()},
         {"name", p.name()}};
  return j;
}

TransactionProfile transaction_from_json(const Json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"input_tokens", "output_tokens"});
  const double in = number(j, "input_tokens", path);
  const double out = number_or(j, "output_tokens", path, 0.0);
  for (const auto& [key, v] : {std::pair{"input_tokens", in}, std::pair{"output_tokens", out}}) {
    if (std::isfinite(v) && v != std::floor(v)) {
      throw ValidationError(join_path(path, key), "token counts must be whole numbers");
    }
  }
  try {
    return TransactionProfile(in, out);
  } catch (const ValidationError& e) {
    std::string field = e.field();
    if (field.starts_with("transaction.")) field.erase(0, 12);
    throw ValidationError(join_path(path, field), e.reason());
  }
}

Json transaction_to_json(const TransactionProfile& t) {
  return {{"input_tokens", t.input_tokens()}, {"output_tokens", t.output_tokens()}};
}

const Json& block(const Json& j, const Json& defaults, const std::string& key,
                  const std::string& path) {
  if (const Json* v = find(j, key)) return *v;
  if (const Json* d = find(defaults, key)) return *d;
  throw ValidationError(join_path(path, key), "required (no default given)");
}

std::string block_path(const Json& j, const std::string& key, const std::string& path) {
  return find(j, key) != nullptr ? join_path(path, key) : "defaults." + key;
}

}  // namespace

Json parse_json(std::string_view input) {
  try {
    return Json::parse(input.begin(), input.end());
  } catch (const Json::parse_error& e) {
    // Convert the byte offset into a 1-based line/column.
    const std::size_t offset = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, input.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < offset; ++i) {
      if (input[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    if (const auto pos = what.find("parse error"); pos != std::string::npos) what.erase(0, pos);
    throw ParseError(line, column, what);
  }
}

// ---------------------------------------------------------------------------
// Scenarios

NamedScenario scenario_from_json(const Json& j, const std::string& path, const Json& defaults) {
  require_object(j, path);
  const std::string name = text(j, "name", path);
  if (name.empty()) throw ValidationError(join_path(path, "name"), "must not be empty");
  const std::string type = text_or(j, "type", path, "single");

  const auto& pricing_json = block(j, defaults, "pricing", path);
  const auto pricing = pricing_from_json(pricing_json, block_path(j, "pricing", path), name);
  const auto& transaction_json = block(j, defaults, "transaction", path);
  const auto transaction =
      transaction_from_json(transaction_json, block_path(j, "transaction", path));

  if (type == "single") {
    reject_unknown(j, path,
                   {"name", "type", "pricing", "transaction", "gain", "loss", "p_success",
                    "extra_cost"});
    const double gain = number(j, "gain", path);
    const double loss = number(j, "loss", path);
    const double p = number(j, "p_success", path);
    const double extra = number_or(j, "extra_cost", path, 0.0);
    return {name, with_path(path, [&] {
              return Scenario(SingleOutcomeScenario(gain, loss, p, pricing, transaction, extra));
            })};
  }
  if (type == "binary") {
    reject_unknown(j, path,
                   {"name", "type", "pricing", "transaction", "gain", "loss_fp", "loss_fn",
                    "p_tp", "p_fp", "p_fn"});
    const double gain = number(j, "gain", path);
    const double loss_fp = number(j, "loss_fp", path);
    const double loss_fn = number(j, "loss_fn", path);
    const double p_tp = number(j, "p_tp", path);
    const double p_fp = number(j, "p_fp", path);
    const double p_fn = number(j, "p_fn", path);
    return {name, with_path(path, [&] {
              return Scenario(BinaryOutcomeScenario(gain, loss_fp, loss_fn, p_tp, p_fp, p_fn,
                                                    pricing, transaction));
            })};
  }
  throw ValidationError(join_path(path, "type"), "expected single or binary; got '" + type + "'");
}

Json to_json(const NamedScenario& s) {
  return std::visit(
      [&](const auto& sc) -> Json {
        using T = std::decay_t<decltype(sc)>;
        Json j{{"name", s.name},
               {"pricing", pricing_to_json(sc.pricing())},
               {"transaction", transaction_to_json(sc.transaction())},
               {"gain", sc.gain()}};
        if constexpr (std::is_same_v<T, SingleOutcomeScenario>) {
          j["type"] = "single";
          j["loss"] = sc.loss();
          j["p_success"] = sc.p_success();
          j["extra_cost"] = sc.extra_cost_per_transaction();
        } else {
          j["type"] = "binary";
          j["loss_fp"] = sc.loss_fp();
          j["loss_fn"] = sc.loss_fn();
          j["p_tp"] = sc.p_tp();
          j["p_fp"] = sc.p_fp();
          j["p_fn"] = sc.p_fn();
        }
        return j;
      },
      s.scenario);
}

ScenarioDocument scenario_document_from_json(const Json& j) {
  require_object(j, "");
  reject_unknown(j, "", {"schema_version", "scenarios", "defaults"});
  ScenarioDocument doc;
  const Json* version = find(j, "schema_version");
  if (version == nullptr) throw ValidationError("schema_version", "required");
  if (!version->is_string() || version->get<std::string>() != kSchemaVersion) {
    throw ValidationError("schema_version",
                          std::string("unsupported; expected \"") + kSchemaVersion + "\"");
  }
  doc.schema_version = kSchemaVersion;

  Json defaults = Json::object();
  if (const Json* d = find(j, "defaults")) {
    require_object(*d, "defaults");
    reject_unknown(*d, "defaults", {"pricing", "transaction"});
    defaults = *d;
  }

  const Json* list = find(j, "scenarios");
  if (list == nullptr) throw ValidationError("scenarios", "required");
  if (!list->is_array()) throw ValidationError("scenarios", "expected a list");
  if (list->empty()) throw ValidationError("scenarios", "must contain at least one scenario");

  std::set<std::string> names;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const std::string path = "scenarios[" + std::to_string(i) + "]";
    auto s = scenario_from_json((*list)[i], path, defaults);
    if (!names.insert(s.name).second) {
      throw ValidationError(path + ".name", "duplicate scenario name '" + s.name + "'");
    }
    doc.scenarios.push_back(std::move(s));
  }
  return doc;
}

ScenarioDocument parse_scenario(std::string_view input) {
  return scenario_document_from_json(parse_json(input));
}

Json to_json(const ScenarioDocument& doc) {
  Json list = Json::array();
  for (const auto& s : doc.scenarios) list.push_back(to_json(s));
  return {{"schema_version", doc.schema_version}, {"scenarios", std::move(list)}};
}

std::string write_scenario(const ScenarioDocument& doc) { return to_json(doc).dump(2) + "\n"; }

const NamedScenario& ScenarioDocument::find(std::string_view name) const {
  for (const auto& s : scenarios) {
    if (s.name == name) return s;
  }
  throw ValidationError("scenario", "no scenario named '" + std::string(name) + "'");
}

NamedSingle ScenarioDocument::single(std::string_view name) const {
  const auto& s = find(name);
  if (const auto* single = std::get_if<SingleOutcomeScenario>(&s.scenario)) {
    return {s.name, *single};
  }
  throw ValidationError("scenario", "'" + s.name + "' is a binary scenario; a single-outcome "
                                                   "scenario is required here");
}

// ---------------------------------------------------------------------------
// Sobol specs

SobolSpec sobol_spec_from_json(const Json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path,
                 {"model", "variant", "cost_units", "variables", "samples_exponent",
                  "second_order", "seed", "bootstrap"});
  const auto model = with_path(path, [&] { return parse_sobol_model(text(j, "model", path)); });
  SobolSpec spec = default_spec(model);
  spec.variant = with_path(path, [&] {
    return parse_binary_variant(text_or(j, "variant", path, "paper-compat"));
  });
  spec.cost_units = with_path(path, [&] {
    return parse_cost_units(text_or(j, "cost_units", path, "per-million"));
  });
  spec.samples_exponent =
      static_cast<unsigned>(unsigned_or(j, "samples_exponent", path, spec.samples_exponent));
  spec.second_order = boolean_or(j, "second_order", path, spec.second_order);
  spec.seed = unsigned_or(j, "seed", path, spec.seed);
  spec.bootstrap = static_cast<unsigned>(unsigned_or(j, "bootstrap", path, spec.bootstrap));

  if (const Json* vars = find(j, "variables")) {
    const std::string vpath = join_path(path, "variables");
    require_object(*vars, vpath);
    const auto expected = model_variables(model);
    for (const auto& [key, _] : vars->items()) {
      if (std::find(expected.begin(), expected.end(), key) == expected.end()) {
        throw ValidationError(join_path(vpath, key),
                              std::string("not a variable of model ") + to_string(model));
      }
    }
    spec.ranges.clear();
    for (const auto name : expected) {
      const std::string key(name);
      const Json* range = find(*vars, key);
      if (range == nullptr) throw ValidationError(join_path(vpath, key), "range required");
      const std::string rpath = join_path(vpath, key);
      require_object(*range, rpath);
      reject_unknown(*range, rpath, {"min", "max"});
      spec.ranges.push_back({key, number(*range, "min", rpath), number(*range, "max", rpath)});
    }
  }
  try {
    spec.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(join_path(path, e.field()), e.reason());
  }
  return spec;
}

SobolSpec parse_sobol_spec(std::string_view input) {
  return sobol_spec_from_json(parse_json(input));
}

Json to_json(const SobolSpec& spec) {
  Json vars = Json::object();
  for (const auto& r : spec.ranges) vars[r.name] = {{"min", r.min}, {"max", r.max}};
  return {{"model", to_string(spec.model)},
          {"variant", to_string(spec.variant)},
          {"cost_units", to_string(spec.cost_units)},
          {"variables", std::move(vars)},
          {"samples_exponent", spec.samples_exponent},
          {"second_order", spec.second_order},
          {"seed", spec.seed},
          {"bootstrap", spec.bootstrap}};
}

std::string write_sobol_spec(const SobolSpec& spec) { return to_json(spec).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Results

BreakevenReport breakeven_report(SolveFor solve_for, const NamedSingle& reference,
                                 const NamedSingle& candidate) {
  BreakevenReport r;
  r.solve_for = solve_for;
  r.reference = reference.name;
  r.candidate = candidate.name;
  r.value = breakeven(solve_for, reference.scenario, candidate.scenario);
  switch (solve_for) {
    case SolveFor::Probability:
      r.reference_earnings = evaluate_single(reference.scenario).expected_earnings;
      r.candidate_earnings =
          evaluate_single(candidate.scenario.with_p_success(r.value)).expected_earnings;
      break;
    case SolveFor::Tokens:
      r.reference_earnings =
          evaluate_single(with_variable(reference.scenario, SweepVariable::Tokens, r.value))
              .expected_earnings;
      r.candidate_earnings =
          evaluate_single(with_variable(candidate.scenario, SweepVariable::Tokens, r.value))
              .expected_earnings;
      break;
    case SolveFor::UnitPrice:
      r.reference_earnings = evaluate_single(reference.scenario).expected_earnings;
      r.candidate_earnings =
          evaluate_single(with_variable(candidate.scenario, SweepVariable::UnitPrice, r.value))
              .expected_earnings;
      break;
  }
  return r;
}

OutputFormat parse_output_format(std::string_view t) {
  if (t == "json") return OutputFormat::Json;
  if (t == "csv") return OutputFormat::Csv;
  if (t == "table") return OutputFormat::Table;
  throw ValidationError("format", "expected json, csv or table; got '" + std::string(t) + "'");
}

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? 0 : j[0].size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

Json intervals_to_json(const std::optional<std::vector<IndexInterval>>& v) {
  if (!v) return nullptr;
  Json out = Json::array();
  for (const auto& i : *v) out.push_back(Json::array({i.low, i.high}));
  return out;
}

std::optional<std::vector<IndexInterval>> intervals_from_json(const Json& j) {
  if (j.is_null()) return std::nullopt;
  std::vector<IndexInterval> out;
  for (const auto& i : j) out.push_back({i[0].get<double>(), i[1].get<double>()});
  return out;
}

std::optional<double> optional_from(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

EvaluationResult evaluation_from_json(const Json& j) {
  EvaluationResult r;
  r.expected_earnings = j.at("earnings").get<double>();
  r.expected_roi = optional_from(j.at("roi"));
  r.transaction_cost = j.at("transaction_cost").get<double>();
  for (const auto& c : j.at("outcome_contributions")) {
    r.outcome_contributions.push_back({c.at("outcome").get<std::string>(),
                                       c.at("probability").get<double>(),
                                       c.at("contribution").get<double>()});
  }
  return r;
}

SweepTable sweep_from_json(const Json& j) {
  SweepTable t;
  t.variable = parse_sweep_variable(j.at("variable").get<std::string>());
  for (const auto& s : j.at("series")) {
    SweepSeries series{s.at("scenario").get<std::string>(), {}};
    for (const auto& p : s.at("points")) {
      series.points.push_back(
          {p.at("value").get<double>(), p.at("earnings").get<double>(), optional_from(p.at("roi"))});
    }
    t.series.push_back(std::move(series));
  }
  for (const auto& c : j.at("crossings")) {
    t.crossings.push_back({c.at("first").get<std::string>(), c.at("second").get<std::string>(),
                           c.at("value").get<double>(), c.at("earnings").get<double>()});
  }
  return t;
}

SobolIndices sobol_from_json(const Json& j) {
  SobolIndices s;
  s.names = j.at("names").get<std::vector<std::string>>();
  s.first_order = j.at("first_order").get<std::vector<double>>();
  s.total_order = j.at("total_order").get<std::vector<double>>();
  if (!j.at("second_order").is_null()) s.second_order = matrix_from_json(j.at("second_order"));
  s.output_variance = j.at("output_variance").get<double>();
  s.evaluations_used = j.at("evaluations_used").get<std::size_t>();
  s.first_order_se = j.at("first_order_se").get<std::vector<double>>();
  s.total_order_se = j.at("total_order_se").get<std::vector<double>>();
  s.noise_bound = j.at("noise_bound").get<double>();
  s.first_order_ci = intervals_from_json(j.at("first_order_ci"));
  s.total_order_ci = intervals_from_json(j.at("total_order_ci"));
  s.base_samples = j.at("base_samples").get<std::size_t>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

LocalSensitivity local_from_json(const Json& j) {
  LocalSensitivity l{
      .gradient = j.at("gradient").get<std::vector<double>>(),
      .hessian = matrix_from_json(j.at("hessian")),
      .evaluated_at = ParameterVector(j.at("names").get<std::vector<std::string>>(),
                                      j.at("values").get<std::vector<double>>()),
      .target = parse_target(j.at("target").get<std::string>()),
      .model = parse_local_model(j.at("model").get<std::string>()),
      .cost_scale = j.at("cost_scale").get<double>(),
      .fd_gradient = j.at("fd_gradient").get<std::vector<double>>(),
      .gradient_deviation = j.at("gradient_deviation").get<double>(),
      .hessian_deviation = j.at("hessian_deviation").get<double>(),
      .hessian_zero_count = j.at("hessian_zero_count").get<std::size_t>(),
  };
  return l;
}

}  // namespace

Json to_json(const EvaluationResult& r) {
  Json contributions = Json::array();
  for (const auto& c : r.outcome_contributions) {
    contributions.push_back(
        {{"outcome", c.outcome}, {"probability", c.probability}, {"contribution", c.contribution}});
  }
  return {{"earnings", r.expected_earnings},
          {"roi", optional_number(r.expected_roi)},
          {"roi_undefined", r.roi_undefined()},
          {"transaction_cost", r.transaction_cost},
          {"outcome_contributions", std::move(contributions)}};
}

Json to_json(const NamedResult& r) {
  Json j = to_json(r.result);
  j["name"] = r.name;
  return j;
}

Json to_json(const PairwiseDelta& d) {
  return {{"first", d.first},
          {"second", d.second},
          {"earnings_delta", d.earnings_delta},
          {"roi_delta", optional_number(d.roi_delta)}};
}

Json to_json(const BreakevenReport& b) {
  return {{"solve_for", to_string(b.solve_for)},
          {"reference", b.reference},
          {"candidate", b.candidate},
          {"value", b.value},
          {"reference_earnings", b.reference_earnings},
          {"candidate_earnings", b.candidate_earnings}};
}

Json to_json(const SweepTable& t) {
  Json series = Json::array();
  for (const auto& s : t.series) {
    Json points = Json::array();
    for (const auto& p : s.points) {
      points.push_back(
          {{"value", p.value}, {"earnings", p.expected_earnings}, {"roi", optional_number(p.expected_roi)}});
    }
    series.push_back({{"scenario", s.scenario}, {"points", std::move(points)}});
  }
  Json crossings = Json::array();
  for (const auto& c : t.crossings) {
    crossings.push_back({{"first", c.first},
                         {"second", c.second},
                         {"value", c.value},
                         {"earnings", c.expected_earnings}});
  }
  return {{"variable", to_string(t.variable)},
          {"series", std::move(series)},
          {"crossings", std::move(crossings)}};
}

Json to_json(const SobolIndices& s) {
  return {{"names", s.names},
          {"first_order", s.first_order},
          {"total_order", s.total_order},
          {"second_order", s.second_order ? matrix_to_json(*s.second_order) : Json(nullptr)},
          {"output_variance", s.output_variance},
          {"evaluations_used", s.evaluations_used},
          {"first_order_se", s.first_order_se},
          {"total_order_se", s.total_order_se},
          {"noise_bound", s.noise_bound},
          {"first_order_ci", intervals_to_json(s.first_order_ci)},
          {"total_order_ci", intervals_to_json(s.total_order_ci)},
          {"base_samples", s.base_samples},
          {"seed", s.seed}};
}

Json to_json(const LocalSensitivity& l) {
  return {{"names", l.evaluated_at.names()},
          {"values", std::vector<double>(l.evaluated_at.values().begin(),
                                         l.evaluated_at.values().end())},
          {"target", to_string(l.target)},
          {"model", to_string(l.model)},
          {"cost_scale", l.cost_scale},
          {"gradient", l.gradient},
          {"hessian", matrix_to_json(l.hessian)},
          {"fd_gradient", l.fd_gradient},
          {"gradient_deviation", l.gradient_deviation},
          {"hessian_deviation", l.hessian_deviation},
          {"hessian_zero_count", l.hessian_zero_count}};
}

Json to_json(const ResultDocument& doc) {
  Json results = Json::array();
  for (const auto& r : doc.results) results.push_back(to_json(r));
  Json comparisons = Json::array();
  for (const auto& c : doc.comparisons) comparisons.push_back(to_json(c));
  return {{"tool_version", doc.tool_version},
          {"inputs", doc.inputs},
          {"results", std::move(results)},
          {"comparisons", std::move(comparisons)},
          {"breakeven", doc.breakeven ? to_json(*doc.breakeven) : Json(nullptr)},
          {"series", doc.series ? to_json(*doc.series) : Json(nullptr)},
          {"sobol", doc.sobol ? to_json(*doc.sobol) : Json(nullptr)},
          {"local", doc.local ? to_json(*doc.local) : Json(nullptr)},
          {"seeds", doc.seeds}};
}

Json canonicalize(Json j) {
  if (j.is_number_float()) return Json(round_significant(j.get<double>(), 12));
  if (j.is_structured()) {
    for (auto& v : j) v = canonicalize(std::move(v));
  }
  return j;
}

std::string canonical_dump(const Json& j) { return canonicalize(j).dump(); }

ResultDocument parse_results(std::string_view input) {
  const Json j = parse_json(input);
  try {
    ResultDocument doc;
    doc.tool_version = j.at("tool_version").get<std::string>();
    doc.inputs = j.at("inputs");
    for (const auto& r : j.at("results")) {
      doc.results.push_back({r.at("name").get<std::string>(), evaluation_from_json(r)});
    }
    for (const auto& c : j.at("comparisons")) {
      doc.comparisons.push_back({c.at("first").get<std::string>(),
                                 c.at("second").get<std::string>(),
                                 c.at("earnings_delta").get<double>(),
                                 optional_from(c.at("roi_delta"))});
    }
    if (const auto& b = j.at("breakeven"); !b.is_null()) {
      doc.breakeven = BreakevenReport{parse_solve_for(b.at("solve_for").get<std::string>()),
                                      b.at("reference").get<std::string>(),
                                      b.at("candidate").get<std::string>(),
                                      b.at("value").get<double>(),
                                      b.at("reference_earnings").get<double>(),
                                      b.at("candidate_earnings").get<double>()};
    }
    if (const auto& s = j.at("series"); !s.is_null()) doc.series = sweep_from_json(s);
    if (const auto& s = j.at("sobol"); !s.is_null()) doc.sobol = sobol_from_json(s);
    if (const auto& l = j.at("local"); !l.is_null()) doc.local = local_from_json(l);
    doc.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    return doc;
  } catch (const Json::exception& e) {
    throw ValidationError("", std::string("not a result document: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// CSV and table writers

namespace {

std::string num(double v) { return format_significant(v, 12); }
std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void csv_row(std::ostringstream& os, std::initializer_list<std::string> cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) os << ',';
    os << c;
    first = false;
  }
  os << '\n';
}

std::string write_csv(const ResultDocument& doc) {
  std::vector<std::string> sections;
  if (!doc.results.empty()) {
    std::ostringstream os;
    csv_row(os, {"name", "earnings", "roi", "roi_undefined", "transaction_cost"});
    for (const auto& r : doc.results) {
      csv_row(os, {csv_field(r.name), num(r.result.expected_earnings), num(r.result.expected_roi),
                   r.result.roi_undefined() ? "true" : "false", num(r.result.transaction_cost)});
    }
    sections.push_back(os.str());
  }
  if (!doc.comparisons.empty()) {
    std::ostringstream os;
    csv_row(os, {"first", "second", "earnings_delta", "roi_delta"});
    for (const auto& c : doc.comparisons) {
      csv_row(os, {csv_field(c.first), csv_field(c.second), num(c.earnings_delta), num(c.roi_delta)});
    }
    sections.push_back(os.str());
  }
  if (doc.breakeven) {
    const auto& b = *doc.breakeven;
    std::ostringstream os;
    csv_row(os, {"solve_for", "reference", "candidate", "value", "reference_earnings",
                 "candidate_earnings"});
    csv_row(os, {to_string(b.solve_for), csv_field(b.reference), csv_field(b.candidate),
                 num(b.value), num(b.reference_earnings), num(b.candidate_earnings)});
    sections.push_back(os.str());
  }
  if (doc.series) {
    std::ostringstream os;
    csv_row(os, {"scenario", to_string(doc.series->variable), "earnings", "roi"});
    for (const auto& s : doc.series->series) {
      for (const auto& p : s.points) {
        csv_row(os, {csv_field(s.scenario), num(p.value), num(p.expected_earnings),
                     num(p.expected_roi)});
      }
    }
    sections.push_back(os.str());
  }
  if (doc.sobol) {
    const auto& s = *doc.sobol;
    std::ostringstream os;
    const bool ci = s.first_order_ci && s.total_order_ci;
    if (ci) {
      csv_row(os, {"variable", "first_order", "total_order", "first_order_se", "total_order_se",
                   "first_order_low", "first_order_high", "total_order_low", "total_order_high"});
    } else {
      csv_row(os, {"variable", "first_order", "total_order", "first_order_se", "total_order_se"});
    }
    for (std::size_t i = 0; i < s.names.size(); ++i) {
      if (ci) {
        csv_row(os, {s.names[i], num(s.first_order[i]), num(s.total_order[i]),
                     num(s.first_order_se[i]), num(s.total_order_se[i]),
                     num((*s.first_order_ci)[i].low), num((*s.first_order_ci)[i].high),
                     num((*s.total_order_ci)[i].low), num((*s.total_order_ci)[i].high)});
      } else {
        csv_row(os, {s.names[i], num(s.first_order[i]), num(s.total_order[i]),
                     num(s.first_order_se[i]), num(s.total_order_se[i])});
      }
    }
    sections.push_back(os.str());
    if (s.second_order) {
      std::ostringstream so;
      csv_row(so, {"variable_i", "variable_j", "second_order"});
      for (std::size_t i = 0; i < s.names.size(); ++i) {
        for (std::size_t k = i + 1; k < s.names.size(); ++k) {
          csv_row(so, {s.names[i], s.names[k], num((*s.second_order)(i, k))});
        }
      }
      sections.push_back(so.str());
    }
  }
  if (doc.local) {
    const auto& l = *doc.local;
    std::ostringstream os;
    csv_row(os, {"variable", "value", "gradient", "fd_gradient"});
    const auto& names = l.evaluated_at.names();
    for (std::size_t i = 0; i < names.size(); ++i) {
      csv_row(os, {names[i], num(l.evaluated_at.values()[i]), num(l.gradient[i]),
                   num(l.fd_gradient[i])});
    }
    sections.push_back(os.str());
    std::ostringstream h;
    csv_row(h, {"variable_i", "variable_j", "hessian"});
    for (std::size_t i = 0; i < names.size(); ++i) {
      for (std::size_t k = i; k < names.size(); ++k) {
        csv_row(h, {names[i], names[k], num(l.hessian(i, k))});
      }
    }
    sections.push_back(h.str());
  }
  std::string out;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    if (i > 0) out += '\n';
    out += sections[i];
  }
  return out;
}

// Column-aligned text table; column 0 left-aligned, the rest right-aligned.
class TextTable {
 public:
  explicit TextTable(std::vector<std::string> header) { rows_.push_back(std::move(header)); }
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  std::string str() const {
    std::vector<std::size_t> width(rows_[0].size(), 0);
    for (const auto& r : rows_) {
      for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    }
    std::string out;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const auto& r = rows_[i];
      for (std::size_t c = 0; c < r.size(); ++c) {
        const std::string pad(width[c] - r[c].size(), ' ');
        if (c > 0) out += "  ";
        out += c == 0 ? r[c] + pad : pad + r[c];
      }
      while (!out.empty() && out.back() == ' ') out.pop_back();
      out += '\n';
      if (i == 0) {
        std::size_t total = 0;
        for (auto w : width) total += w;
        out += std::string(total + 2 * (width.size() - 1), '-') + '\n';
      }
    }
    return out;
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

std::string earnings_text(double v) { return format_fixed(v, 5, true); }
std::string roi_text(const std::optional<double>& v) {
  return v ? format_fixed(*v, 2, true) : std::string("undefined");
}
std::string index_text(double v) { return format_fixed(v, 4); }

std::string write_table(const ResultDocument& doc) {
  std::vector<std::string> sections;
  if (!doc.results.empty()) {
    TextTable t({"scenario", "earnings", "roi", "transaction cost"});
    for (const auto& r : doc.results) {
      t.add({r.name, earnings_text(r.result.expected_earnings), roi_text(r.result.expected_roi),
             format_significant(r.result.transaction_cost, 6)});
    }
    sections.push_back(t.str());
  }
  if (!doc.comparisons.empty()) {
    TextTable t({"pair", "earnings delta", "roi delta"});
    for (const auto& c : doc.comparisons) {
      t.add({c.first + " - " + c.second, earnings_text(c.earnings_delta), roi_text(c.roi_delta)});
    }
    sections.push_back(t.str());
  }
  if (doc.breakeven) {
    const auto& b = *doc.breakeven;
    TextTable t({"break-even", "value", "reference earnings", "candidate earnings"});
    t.add({std::string(to_string(b.solve_for)) + " (" + b.candidate + " vs " + b.reference + ")",
           format_significant(b.value, 8), earnings_text(b.reference_earnings),
           earnings_text(b.candidate_earnings)});
    sections.push_back(t.str());
  }
  if (doc.series) {
    std::vector<std::string> header{to_string(doc.series->variable)};
    for (const auto& s : doc.series->series) header.push_back(s.scenario);
    TextTable t(header);
    const std::size_t n = doc.series->series.empty() ? 0 : doc.series->series[0].points.size();
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> row{format_significant(doc.series->series[0].points[i].value, 8)};
      for (const auto& s : doc.series->series) row.push_back(earnings_text(s.points[i].expected_earnings));
      t.add(std::move(row));
    }
    std::string text = t.str();
    for (const auto& c : doc.series->crossings) {
      text += "crossing " + c.first + " / " + c.second + " at " + format_significant(c.value, 8) +
              " (earnings " + earnings_text(c.expected_earnings) + ")\n";
    }
    sections.push_back(text);
  }
  if (doc.sobol) {
    const auto& s = *doc.sobol;
    TextTable t({"variable", "S_i", "S_Ti", "se(S_i)", "se(S_Ti)"});
    for (std::size_t i = 0; i < s.names.size(); ++i) {
      t.add({s.names[i], index_text(s.first_order[i]), index_text(s.total_order[i]),
             index_text(s.first_order_se[i]), index_text(s.total_order_se[i])});
    }
    std::string text = t.str();
    text += "evaluations " + std::to_string(s.evaluations_used) + ", noise bound " +
            index_text(s.noise_bound) + "\n";
    if (s.second_order) {
      std::vector<std::string> header{"S_ij"};
      header.insert(header.end(), s.names.begin(), s.names.end());
      TextTable m(header);
      for (std::size_t i = 0; i < s.names.size(); ++i) {
        std::vector<std::string> row{s.names[i]};
        for (std::size_t k = 0; k < s.names.size(); ++k) {
          row.push_back(i == k ? "" : index_text((*s.second_order)(i, k)));
        }
        m.add(std::move(row));
      }
      text += "\n" + m.str();
    }
    sections.push_back(text);
  }
  if (doc.local) {
    const auto& l = *doc.local;
    const auto& names = l.evaluated_at.names();
    TextTable t({"variable", "value", "gradient"});
    for (std::size_t i = 0; i < names.size(); ++i) {
      t.add({names[i], format_significant(l.evaluated_at.values()[i], 8),
             format_significant(l.gradient[i], 8)});
    }
    std::vector<std::string> header{"hessian"};
    header.insert(header.end(), names.begin(), names.end());
    TextTable h(header);
    for (std::size_t i = 0; i < names.size(); ++i) {
      std::vector<std::string> row{names[i]};
      for (std::size_t k = 0; k < names.size(); ++k) {
        row.push_back(format_significant(l.hessian(i, k), 6));
      }
      h.add(std::move(row));
    }
    sections.push_back(t.str() + "\n" + h.str() + "zero entries " +
                       std::to_string(l.hessian_zero_count) + ", max gradient deviation " +
                       format_significant(l.gradient_deviation, 3) + "\n");
  }
  std::string out;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    if (i > 0) out += '\n';
    out += sections[i];
  }
  return out;
}

}  // namespace

std::string write_results(const ResultDocument& doc, OutputFormat format) {
  switch (format) {
    case OutputFormat::Json: return canonical_dump(to_json(doc)) + "\n";
    case OutputFormat::Csv: return write_csv(doc);
    case OutputFormat::Table: return write_table(doc);
  }
  return {};
}

}  // namespace llmroi
