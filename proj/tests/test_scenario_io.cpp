#include <doctest.h>

#include <fstream>
#include <sstream>

#include "llmroi/errors.hpp"
#include "llmroi/scenario_io.hpp"
#include "support.hpp"

using namespace llmroi;

namespace {

std::string slurp(const std::string& relative) {
  std::ifstream in(std::string(LLMROI_SOURCE_DIR) + "/" + relative);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string with_scenario(const std::string& body) {
  return R"({"schema_version": "1", "scenarios": [)" + body + "]}";
}

std::string field_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "<no error>";
}

ResultDocument evaluated(const ScenarioDocument& doc) {
  ResultDocument out;
  out.tool_version = "test";
  out.inputs = to_json(doc);
  for (const auto& s : doc.scenarios) {
    out.results.push_back({s.name, evaluate(s.scenario, BinaryVariant::Canonical)});
  }
  out.comparisons = pairwise_deltas(out.results);
  return out;
}

}  // namespace

TEST_CASE("the bundled scenario file parses") {
  const auto doc = parse_scenario(slurp("scenarios/worked_example.json"));
  REQUIRE(doc.scenarios.size() == 2);
  const auto llm1 = doc.single("llm-1");
  CHECK(llm1.scenario.pricing().input_price_per_million() == 10.0);
  CHECK(llm1.scenario.transaction().input_tokens() == 1000);
  CHECK(evaluate_single(llm1.scenario).expected_earnings == doctest::Approx(9.44));
  CHECK(evaluate_single(doc.single("llm-2").scenario).expected_earnings ==
        doctest::Approx(7.7995));
}

TEST_CASE("validation errors carry a field path") {
  const std::string pricing = R"("pricing": {"unit": "per_million_tokens", "input": 1})";
  const std::string tx = R"("transaction": {"input_tokens": 100, "output_tokens": 0})";
  CHECK(field_of(R"({"schema_version": "1", "scenarios": []})") == "scenarios");
  CHECK(field_of(with_scenario(R"({"name": "a", "gain": 1, "loss": 1, "p_success": 1.3, )" +
                               pricing + ", " + tx + "}")) == "scenarios[0].p_success");
  CHECK(field_of(with_scenario(R"({"name": "a", "gain": 1, "loss": 1, "p_success": 0.3, "x": 1, )" +
                               pricing + ", " + tx + "}")) == "scenarios[0].x");
  CHECK(field_of(with_scenario(R"({"name": "a", "gain": -1, "loss": 1, "p_success": 0.3, )" +
                               pricing + ", " + tx + "}")) == "scenarios[0].gain");
  CHECK(field_of(with_scenario(R"({"name": "a", "gain": 1, "loss": 1, "p_success": 0.3, )" +
                               pricing +
                               R"(, "transaction": {"input_tokens": 10.5, "output_tokens": 0}})")) ==
        "scenarios[0].transaction.input_tokens");
  CHECK(field_of(R"({"schema_version": "2", "scenarios": []})") == "schema_version");
  const std::string one = R"({"name": "a", "gain": 1, "loss": 1, "p_success": 0.3, )" + pricing +
                          ", " + tx + "}";
  CHECK(field_of(with_scenario(one + ", " + one)) == "scenarios[1].name");
  CHECK(field_of(with_scenario(R"({"name": "b", "type": "binary", "gain": 1, "loss_fp": 1,
      "loss_fn": 1, "p_tp": 0.5, "p_fp": 0.4, "p_fn": 0.3, )" + pricing + ", " + tx + "}"))
            .starts_with("scenarios[0]"));
}

TEST_CASE("malformed JSON reports line and column") {
  try {
    parse_scenario("{\n  \"schema_version\": \"1\",\n  \"scenarios\": [,]\n}");
    FAIL("expected a ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() > 0);
  }
}

TEST_CASE("per-token prices are normalized") {
  const auto doc = parse_scenario(with_scenario(
      R"({"name": "a", "gain": 1, "loss": 1, "p_success": 0.5,
          "pricing": {"unit": "per_token", "input": 1e-6, "output": 2e-6},
          "transaction": {"input_tokens": 1000, "output_tokens": 1000}})"));
  const auto s = doc.single("a").scenario;
  CHECK(s.pricing().input_price_per_million() == doctest::Approx(1.0));
  CHECK(transaction_cost(s) == doctest::Approx(0.003));
}

TEST_CASE("scenario documents round-trip at full precision") {
  ScenarioDocument doc;
  doc.scenarios.push_back({"one", testing::llm1()});
  doc.scenarios.push_back({"clf", testing::classifier()});
  doc.scenarios.push_back({"odd", testing::llm2().with_p_success(0.1 + 0.2)});
  CHECK(parse_scenario(write_scenario(doc)) == doc);
  const auto file = parse_scenario(slurp("scenarios/worked_example.json"));
  CHECK(parse_scenario(write_scenario(file)) == file);
}

TEST_CASE("result documents are canonical and stable") {
  const auto doc = parse_scenario(slurp("scenarios/worked_example.json"));
  auto result = evaluated(doc);
  result.series = sweep(std::vector{doc.single("llm-1"), doc.single("llm-2")},
                        SweepVariable::Tokens, 1000, 250000, 20);
  auto spec = default_spec(SobolModel::SingleEarnings);
  spec.samples_exponent = 6;
  result.sobol = sobol_analyze(spec);
  result.seeds = {spec.seed};
  result.local = local_report(ParameterVector::single(10, 1, 10, 0.95, 1000), LocalModel::Single,
                              Target::Roi, models::kPerMillion);
  result.breakeven = breakeven_report(SolveFor::Probability, doc.single("llm-1"),
                                      doc.single("llm-2"));

  const auto text = write_results(result, OutputFormat::Json);
  CHECK(write_results(parse_results(text), OutputFormat::Json) == text);
  CHECK(write_results(result, OutputFormat::Json) == text);
  CHECK(text.find('\n') == text.size() - 1);
  CHECK(text.find("\"earnings\":9.44") != std::string::npos);
  const auto j = Json::parse(text);
  CHECK(j.contains("tool_version"));
  CHECK(j["results"][1]["roi"].get<double>() == 15599.0);
}

TEST_CASE("canonical form rounds to 12 significant digits") {
  CHECK(canonical_dump(Json{{"b", 0.1 + 0.2}, {"a", 1}}) == R"({"a":1,"b":0.3})");
  CHECK(canonical_dump(Json(1.0 / 3.0)) == "0.333333333333");
  CHECK(canonical_dump(Json::array({123456789.123456789})) == "[123456789.123]");
}

TEST_CASE("zero-cost RoI is null") {
  const auto s = testing::llm1().with_pricing(LlmPricing("free", 0.0, 0.0));
  const auto j = to_json(evaluate_single(s));
  CHECK(j["roi"].is_null());
  CHECK(j["roi_undefined"] == true);
}

TEST_CASE("CSV output") {
  const auto doc = parse_scenario(slurp("scenarios/worked_example.json"));
  const auto csv = write_results(evaluated(doc), OutputFormat::Csv);
  CHECK(csv.find("llm-1") != std::string::npos);
  CHECK(csv.find("9.44") != std::string::npos);
  CHECK(csv.find("944") != std::string::npos);
  CHECK(csv.find("15599") != std::string::npos);
  CHECK(csv.find("\n\n") != std::string::npos);  // results and comparisons sections

  ResultDocument empty;
  empty.series = SweepTable{};
  const auto header_only = write_results(empty, OutputFormat::Csv);
  CHECK(!header_only.empty());
  CHECK(std::count(header_only.begin(), header_only.end(), '\n') == 1);
}

TEST_CASE("table output") {
  const auto doc = parse_scenario(slurp("scenarios/worked_example.json"));
  const auto table = write_results(evaluated(doc), OutputFormat::Table);
  CHECK(table.find("9.44000") != std::string::npos);
  CHECK(table.find("944.00") != std::string::npos);
  CHECK(table.find("7.79950") != std::string::npos);
  CHECK(table.find("15,599.00") != std::string::npos);
  CHECK_THROWS_AS(parse_output_format("xml"), ValidationError);
}

TEST_CASE("Sobol specs") {
  const auto spec = parse_sobol_spec(slurp("specs/single_earnings.json"));
  CHECK(spec.model == SobolModel::SingleEarnings);
  CHECK(spec.variant == BinaryVariant::PaperCompat);
  CHECK(spec.ranges == commercial_operation_ranges());
  CHECK(parse_sobol_spec(write_sobol_spec(spec)) == spec);

  // Variables may be listed in any order; they are stored in model order.
  const auto reordered = parse_sobol_spec(R"({"model": "single-earnings", "variables": {
      "T": {"min": 50, "max": 128000}, "P": {"min": 0.1, "max": 1}, "C": {"min": 0.01, "max": 100},
      "L": {"min": 0, "max": 1000}, "G": {"min": 1, "max": 1000}}})");
  CHECK(reordered.ranges == commercial_operation_ranges());

  CHECK_THROWS_AS(parse_sobol_spec(R"({"model": "single-earnings", "variables": {
      "G": {"min": 1, "max": 1000}}})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_sobol_spec(R"({"variables": {}})"), ValidationError);
  for (const char* name : {"specs/single_roi.json", "specs/binary_earnings.json", "specs/binary_roi.json"}) {
    CAPTURE(name);
    CHECK_NOTHROW(parse_sobol_spec(slurp(name)).validate());
  }
  CHECK(parse_sobol_spec(slurp("specs/binary_earnings.json")).ranges == binary_classification_ranges());
}
