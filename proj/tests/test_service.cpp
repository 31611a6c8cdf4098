#include <doctest.h>

#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "llmroi/errors.hpp"
#include "llmroi/service.hpp"
#include "support.hpp"

using namespace llmroi;

namespace {

Json example_document() {
  std::ifstream in(std::string(LLMROI_SOURCE_DIR) + "/scenarios/worked_example.json");
  return Json::parse(in);
}

Json post(Service& service, std::string_view path, const Json& body, int expected = 200) {
  const auto r = service.handle("POST", path, body.dump());
  CAPTURE(r.body);
  CHECK(r.status == expected);
  return Json::parse(r.body);
}

Json scenario_body(const Json& doc, std::size_t i) {
  Json s = doc["scenarios"][i];
  s["transaction"] = doc["defaults"]["transaction"];
  return s;
}

}  // namespace

TEST_CASE("health") {
  Service service;
  const auto r = service.handle("GET", "/health", "");
  CHECK(r.status == 200);
  CHECK(Json::parse(r.body)["status"] == "ok");
}

TEST_CASE("evaluate and compare match direct engine calls") {
  Service service;
  const auto doc = example_document();
  const auto parsed = scenario_document_from_json(doc);

  for (std::size_t i = 0; i < 2; ++i) {
    const auto body = post(service, "/v1/evaluate", scenario_body(doc, i));
    const auto direct = to_json(evaluate(parsed.scenarios[i].scenario, BinaryVariant::Canonical));
    CHECK(canonical_dump(body) == canonical_dump(direct));
  }

  const auto body = post(service, "/v1/compare", doc);
  std::vector<NamedResult> results;
  for (const auto& s : parsed.scenarios) {
    results.push_back({s.name, evaluate(s.scenario, BinaryVariant::Canonical)});
  }
  Json list = Json::array();
  for (const auto& r : results) list.push_back(to_json(r));
  CHECK(canonical_dump(body["results"]) == canonical_dump(list));
  CHECK(body["comparisons"][0]["earnings_delta"].get<double>() == doctest::Approx(1.6405));
}

TEST_CASE("binary evaluation honours the variant") {
  Service service;
  Json body{{"type", "binary"},   {"gain", 10},  {"loss_fp", 2},    {"loss_fn", 5},
            {"p_tp", 0.2},        {"p_fp", 0.05}, {"p_fn", 0.05},
            {"pricing", {{"unit", "per_million_tokens"}, {"input", 5}, {"output", 15}}},
            {"transaction", {{"input_tokens", 1000}, {"output_tokens", 0}}}};
  const auto canonical = post(service, "/v1/evaluate", body);
  body["variant"] = "paper-compat";
  const auto compat = post(service, "/v1/evaluate", body);
  const auto c = testing::classifier();
  CHECK(canonical_dump(canonical) ==
        canonical_dump(to_json(evaluate_binary(c, BinaryVariant::Canonical))));
  CHECK(canonical_dump(compat) ==
        canonical_dump(to_json(evaluate_binary(c, BinaryVariant::PaperCompat))));
}

TEST_CASE("breakeven and sweep") {
  Service service;
  const auto doc = example_document();
  const auto be = post(service, "/v1/breakeven",
                       {{"reference", scenario_body(doc, 0)},
                        {"candidate", scenario_body(doc, 1)},
                        {"solve_for", "probability"},
                        {"at", {{"T", 128000}}}});
  CHECK(be["value"].get<double>() == doctest::Approx(0.83945454545).epsilon(1e-9));

  const auto tokens = post(service, "/v1/breakeven",
                           {{"reference", scenario_body(doc, 0)},
                            {"candidate", scenario_body(doc, 1)},
                            {"solve_for", "tokens"}});
  CHECK(tokens["value"].get<double>() == doctest::Approx(1.65 / 9.5e-6));

  Json sweep_body = doc;
  sweep_body["variable"] = "T";
  sweep_body["from"] = 1000;
  sweep_body["to"] = 250000;
  sweep_body["steps"] = 10;
  const auto sw = post(service, "/v1/sweep", sweep_body);
  CHECK(sw["series"].size() == 2);
  CHECK(sw["series"][0]["points"].size() == 10);
  CHECK(sw["crossings"].size() == 1);
}

TEST_CASE("zero-cost RoI is null, not an error") {
  Service service;
  Json s = scenario_body(example_document(), 0);
  s["pricing"]["input"] = 0;
  s["pricing"]["output"] = 0;
  const auto body = post(service, "/v1/evaluate", s);
  CHECK(body["roi"].is_null());
  CHECK(body["roi_undefined"] == true);
}

TEST_CASE("error statuses") {
  Service service;
  const auto doc = example_document();

  SUBCASE("malformed JSON is 400") {
    const auto r = service.handle("POST", "/v1/evaluate", "{");
    CHECK(r.status == 400);
    CHECK(Json::parse(r.body)["error"]["code"] == "parse_error");
  }
  SUBCASE("invalid field is 400 with the field name") {
    Json s = scenario_body(doc, 0);
    s["p_success"] = 1.3;
    const auto body = post(service, "/v1/evaluate", s, 400);
    CHECK(body["error"]["code"] == "validation_error");
    CHECK(body["error"]["field"] == "p_success");
  }
  SUBCASE("domain failure is 422") {
    Json cand = scenario_body(doc, 1);
    const auto body = post(service, "/v1/breakeven",
                           {{"reference", scenario_body(doc, 0)},
                            {"candidate", cand},
                            {"solve_for", "probability"},
                            {"at", {{"T", 10000000}}}},
                           422);
    CHECK(body["error"]["code"] == "out_of_domain");
  }
  SUBCASE("unknown route is 404, wrong method 405") {
    CHECK(service.handle("GET", "/v1/nothing", "").status == 404);
    CHECK(service.handle("GET", "/v1/evaluate", "").status == 405);
    CHECK(service.handle("GET", "/v1/jobs/job-missing", "").status == 404);
  }
}

TEST_CASE("local sensitivity endpoint") {
  Service service;
  const auto body = post(service, "/v1/sensitivity/local",
                         {{"model", "single"},
                          {"target", "earnings"},
                          {"cost_units", "per-million"},
                          {"point", {{"G", 10}, {"L", 1}, {"C", 10}, {"P", 0.95}, {"T", 1000}}}});
  const auto direct = local_report(ParameterVector::single(10, 1, 10, 0.95, 1000),
                                   LocalModel::Single, Target::Earnings, models::kPerMillion);
  CHECK(canonical_dump(body) == canonical_dump(to_json(direct)));
  post(service, "/v1/sensitivity/local",
       {{"model", "single"}, {"target", "roi"}, {"point", {{"G", 10}, {"L", 1}, {"C", 0}, {"P", 0.5}, {"T", 10}}}},
       422);
}

TEST_CASE("small Sobol runs answer synchronously") {
  Service service;
  auto spec = default_spec(SobolModel::SingleEarnings);
  spec.samples_exponent = 8;
  spec.seed = 3;
  const auto body = post(service, "/v1/sensitivity/sobol", to_json(spec));
  CHECK(body["state"] == "done");
  CHECK(body["progress"] == 1.0);
  CHECK(canonical_dump(body["result"]) == canonical_dump(to_json(sobol_analyze(spec))));
}

TEST_CASE("large Sobol runs become jobs") {
  ServiceConfig config;
  config.sync_threshold = 10;
  Service service(config);
  auto spec = default_spec(SobolModel::BinaryRoi);
  spec.samples_exponent = 13;
  spec.seed = 7;
  const auto accepted = post(service, "/v1/sensitivity/sobol", to_json(spec), 202);
  const std::string id = accepted["id"];
  CHECK(accepted["state"] != "done");

  double last = -1.0;
  for (int i = 0; i < 10000; ++i) {
    const auto r = service.handle("GET", "/v1/jobs/" + id, "");
    REQUIRE(r.status == 200);
    const auto job = Json::parse(r.body);
    const double p = job["progress"];
    CHECK(p >= last);
    last = p;
    if (job["state"] == "done" || job["state"] == "failed") break;
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  service.wait_idle();
  const auto record = service.job(id);
  REQUIRE(record);
  CHECK(record->state == JobState::Done);
  CHECK(record->progress == 1.0);
  REQUIRE(record->finished_at);
  CHECK(*record->result == sobol_analyze(spec));
}

TEST_CASE("a zero threshold queues every run; invalid specs fail up front") {
  ServiceConfig config;
  config.sync_threshold = 0;
  Service service(config);
  auto spec = default_spec(SobolModel::SingleEarnings);
  spec.samples_exponent = 4;
  const auto accepted = post(service, "/v1/sensitivity/sobol", to_json(spec), 202);
  service.wait_idle();
  CHECK(service.job(accepted["id"])->state == JobState::Done);

  post(service, "/v1/sensitivity/sobol", Json{{"model", "single-earnings"}, {"samples_exponent", 1}},
       400);
}

TEST_CASE("HTTP transport") {
  Service service;
  HttpServer server(service, "127.0.0.1", 0);
  const int port = server.bind();
  REQUIRE(port > 0);
  std::thread serving([&] { server.run(); });

  httplib::Client client("127.0.0.1", port);
  const auto health = client.Get("/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(health->get_header_value("Access-Control-Allow-Origin") == "*");

  const auto doc = example_document();
  const auto r = client.Post("/v1/compare", doc.dump(), "application/json");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(r->body == service.handle("POST", "/v1/compare", doc.dump()).body);

  const auto bad = client.Post("/v1/evaluate", "{", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);

  server.stop();
  serving.join();
}
