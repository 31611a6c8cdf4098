#include "llmroi/service.hpp"

#include <condition_variable>
#include <ctime>
#include <map>
#include <mutex>
#include <random>
#include <semaphore>
#include <thread>
#include <vector>

#include "llmroi/errors.hpp"
#include "llmroi/local_sensitivity.hpp"
#include "llmroi/version.hpp"

namespace llmroi {

namespace {

using Clock = std::chrono::system_clock;

std::string iso8601(Clock::time_point t) {
  const std::time_t tt = Clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

HttpResponse json_response(int status, const Json& j) { return {status, canonical_dump(j)}; }

HttpResponse error_response(int status, const std::string& code, const std::string& message,
                            const std::optional<std::string>& field = std::nullopt) {
  Json err{{"code", code}, {"message", message}};
  if (field && !field->empty()) err["field"] = *field;
  return json_response(status, Json{{"error", std::move(err)}});
}

const Json& member(const Json& body, const char* key) {
  const auto it = body.find(key);
  if (it == body.end()) throw ValidationError(key, "required");
  return *it;
}

std::string string_member(const Json& body, const char* key, const char* fallback = nullptr) {
  const auto it = body.find(key);
  if (it == body.end()) {
    if (fallback != nullptr) return fallback;
    throw ValidationError(key, "required");
  }
  if (!it->is_string()) throw ValidationError(key, "expected a string");
  return it->get<std::string>();
}

double number_member(const Json& body, const char* key) {
  const auto& v = member(body, key);
  if (!v.is_number()) throw ValidationError(key, "expected a number");
  return v.get<double>();
}

std::int64_t integer_member(const Json& body, const char* key) {
  const auto& v = member(body, key);
  if (!v.is_number_integer()) throw ValidationError(key, "expected an integer");
  return v.get<std::int64_t>();
}

BinaryVariant variant_of(const Json& body) {
  return parse_binary_variant(string_member(body, "variant", "canonical"));
}

// A scenario object as accepted by the scenario schema, name optional.
NamedScenario scenario_of(const Json& value, const std::string& path,
                          const std::string& default_name) {
  Json copy = value;
  if (copy.is_object()) {
    copy.erase("variant");
    if (!copy.contains("name")) copy["name"] = default_name;
  }
  return scenario_from_json(copy, path);
}

NamedSingle single_of(const Json& value, const std::string& path,
                      const std::string& default_name) {
  auto s = scenario_of(value, path, default_name);
  const auto* single = std::get_if<SingleOutcomeScenario>(&s.scenario);
  if (single == nullptr) throw ValidationError(path + ".type", "a single scenario is required");
  return {s.name, *single};
}

ScenarioDocument document_of(const Json& body) {
  Json doc{{"schema_version", kSchemaVersion}, {"scenarios", member(body, "scenarios")}};
  if (body.contains("defaults")) doc["defaults"] = body["defaults"];
  return scenario_document_from_json(doc);
}

Json evaluate_body(const Json& body) {
  const std::string type = string_member(body, "type", "single");
  if (type == "single" || type == "binary") {
    const auto s = scenario_of(body, "", "scenario");
    return to_json(evaluate(s.scenario, variant_of(body)));
  }
  if (type == "anecdotal") {
    const AnecdotalScenario a(integer_member(body, "total_transactions"),
                              integer_member(body, "gain_transactions"),
                              integer_member(body, "loss_transactions"),
                              number_member(body, "gain_per_success"),
                              number_member(body, "loss_per_failure"),
                              number_member(body, "transaction_cost"));
    const auto r = anecdotal_earnings_roi(a);
    return {{"earnings", r.earnings}, {"roi", r.roi}, {"warnings", a.warnings()}};
  }
  if (type == "lottery") {
    std::vector<OutcomeLottery::Outcome> outcomes;
    for (const auto& o : member(body, "outcomes")) {
      outcomes.push_back({number_member(o, "probability"), number_member(o, "utility")});
    }
    return {{"expected_utility", expected_utility(OutcomeLottery(std::move(outcomes)))}};
  }
  if (type == "project") {
    const double fixed = number_member(body, "fixed_cost");
    const double llm = number_member(body, "llm_variable_cost");
    const double other = number_member(body, "other_variable_cost");
    const auto ledger = body.contains("benefits")
                            ? ProjectLedger::from_benefits(number_member(body, "benefits"), fixed,
                                                           llm, other)
                            : ProjectLedger::from_gains_losses(number_member(body, "gains"),
                                                               number_member(body, "losses"),
                                                               fixed, llm, other);
    const auto r = project_earnings_roi(ledger);
    return {{"earnings", r.earnings}, {"roi", r.roi}};
  }
  if (type == "composite") {
    const SuccessDecomposition d(number_member(body, "p_task"),
                                 number_member(body, "p_business_given_task"),
                                 number_member(body, "p_business_given_task_failure"));
    return {{"p_success", composite_success_probability(d)}};
  }
  throw ValidationError("type",
                        "expected single, binary, anecdotal, lottery, project or composite");
}

Json compare_body(const Json& body) {
  const auto doc = document_of(body);
  if (doc.scenarios.size() < 2) throw ValidationError("scenarios", "compare needs at least 2");
  const auto variant = variant_of(body);
  std::vector<NamedResult> results;
  for (const auto& s : doc.scenarios) results.push_back({s.name, evaluate(s.scenario, variant)});
  Json list = Json::array();
  for (const auto& r : results) list.push_back(to_json(r));
  Json deltas = Json::array();
  for (const auto& d : pairwise_deltas(results)) deltas.push_back(to_json(d));
  return {{"results", std::move(list)}, {"comparisons", std::move(deltas)}};
}

// Applies {"T": v, "P": v, ...} to a scenario.
SingleOutcomeScenario apply_at(SingleOutcomeScenario s, const Json& at) {
  if (!at.is_object()) throw ValidationError("at", "expected an object of VAR: value");
  for (const auto& [key, value] : at.items()) {
    if (!value.is_number()) throw ValidationError("at." + key, "expected a number");
    try {
      s = with_variable(s, parse_sweep_variable(key), value.get<double>());
    } catch (const ValidationError& e) {
      throw ValidationError("at." + key, e.reason());
    }
  }
  return s;
}

Json breakeven_body(const Json& body) {
  auto reference = single_of(member(body, "reference"), "reference", "reference");
  auto candidate = single_of(member(body, "candidate"), "candidate", "candidate");
  if (body.contains("at")) {
    reference.scenario = apply_at(reference.scenario, body["at"]);
    candidate.scenario = apply_at(candidate.scenario, body["at"]);
  }
  const auto solve_for = parse_solve_for(string_member(body, "solve_for", "probability"));
  return to_json(breakeven_report(solve_for, reference, candidate));
}

Json sweep_body(const Json& body) {
  const auto doc = document_of(body);
  std::vector<NamedSingle> singles;
  for (const auto& s : doc.scenarios) singles.push_back(doc.single(s.name));
  const auto& steps = member(body, "steps");
  if (!steps.is_number_integer()) throw ValidationError("steps", "expected an integer");
  return to_json(sweep(singles, parse_sweep_variable(string_member(body, "variable")),
                       number_member(body, "from"), number_member(body, "to"),
                       steps.get<int>()));
}

Json local_body(const Json& body) {
  const auto model = parse_local_model(string_member(body, "model", "single"));
  const auto target = parse_target(string_member(body, "target", "earnings"));
  const double scale = cost_scale(parse_cost_units(string_member(body, "cost_units", "per-token")));
  const auto& point = member(body, "point");
  if (!point.is_object()) throw ValidationError("point", "expected an object of VAR: value");
  const auto names = model == LocalModel::Single
                         ? std::span<const std::string_view>(models::kSingleVariables)
                         : std::span<const std::string_view>(models::kBinaryVariables);
  std::vector<std::string> keys;
  std::vector<double> values;
  for (const auto name : names) {
    const std::string key(name);
    const auto it = point.find(key);
    if (it == point.end() || !it->is_number()) {
      throw ValidationError("point." + key, "required number");
    }
    keys.push_back(key);
    values.push_back(it->get<double>());
  }
  const double rel_step = body.contains("rel_step") ? number_member(body, "rel_step") : 1e-4;
  return to_json(local_report(ParameterVector(keys, values), model, target, scale, rel_step));
}

}  // namespace

const char* to_string(JobState s) {
  switch (s) {
    case JobState::Queued: return "queued";
    case JobState::Running: return "running";
    case JobState::Done: return "done";
    case JobState::Failed: return "failed";
  }
  return "?";
}

Json to_json(const JobRecord& job) {
  Json j{{"id", job.id},
         {"state", to_string(job.state)},
         {"progress", job.progress},
         {"submitted_at", job.submitted_at},
         {"finished_at", job.finished_at ? Json(*job.finished_at) : Json(nullptr)},
         {"spec", to_json(job.spec)},
         {"result", job.result ? to_json(*job.result) : Json(nullptr)},
         {"error", nullptr}};
  if (job.error) j["error"] = {{"code", job.error_code.value_or("error")}, {"message", *job.error}};
  return j;
}

// ---------------------------------------------------------------------------

struct Service::Impl {
  explicit Impl(ServiceConfig c)
      : config(std::move(c)), slots(std::max(1u, config.max_concurrent_jobs)), rng(std::random_device{}()) {}

  struct Entry {
    JobRecord record;
    Clock::time_point finished{};
  };

  ServiceConfig config;
  std::counting_semaphore<1024> slots;
  mutable std::mutex mutex;
  std::condition_variable idle;
  std::map<std::string, Entry> jobs;
  std::vector<std::jthread> threads;
  std::size_t active = 0;
  std::mt19937_64 rng;

  std::string new_id() {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string id = "job-";
    std::uint64_t bits = rng();
    for (int i = 0; i < 16; ++i, bits >>= 4) id += kHex[bits & 0xF];
    return id;
  }

  void purge_locked() {
    const auto now = Clock::now();
    std::erase_if(jobs, [&](const auto& kv) {
      const auto& e = kv.second;
      const bool finished = e.record.state == JobState::Done || e.record.state == JobState::Failed;
      return finished && now - e.finished > config.retention;
    });
  }

  void finish(const std::string& id, std::optional<SobolIndices> result,
              std::optional<std::pair<std::string, std::string>> failure) {
    std::lock_guard lock(mutex);
    auto& e = jobs.at(id);
    e.finished = Clock::now();
    e.record.finished_at = iso8601(e.finished);
    if (result) {
      e.record.state = JobState::Done;
      e.record.progress = 1.0;
      e.record.result = std::move(result);
    } else {
      e.record.state = JobState::Failed;
      e.record.error_code = failure->first;
      e.record.error = failure->second;
    }
  }

  void run_job(const std::string& id, const SobolSpec& spec) {
    slots.acquire();
    {
      std::lock_guard lock(mutex);
      jobs.at(id).record.state = JobState::Running;
    }
    auto progress = [this, &id](double fraction) {
      std::lock_guard lock(mutex);
      auto& p = jobs.at(id).record.progress;
      p = std::max(p, fraction);
    };
    try {
      finish(id, sobol_analyze(spec, config.workers, progress), std::nullopt);
    } catch (const Error& e) {
      finish(id, std::nullopt, std::pair{e.code(), std::string(e.what())});
    } catch (const std::exception& e) {
      finish(id, std::nullopt, std::pair{std::string("internal_error"), std::string(e.what())});
    }
    slots.release();
    std::lock_guard lock(mutex);
    --active;
    idle.notify_all();
  }

  HttpResponse submit(const Json& body) {
    const auto spec = sobol_spec_from_json(body);
    JobRecord record;
    record.spec = spec;
    record.submitted_at = iso8601(Clock::now());

    if (spec.evaluations() < config.sync_threshold) {
      {
        std::lock_guard lock(mutex);
        record.id = new_id();
      }
      record.state = JobState::Running;
      record.result = sobol_analyze(spec, config.workers);
      record.state = JobState::Done;
      record.progress = 1.0;
      const auto now = Clock::now();
      record.finished_at = iso8601(now);
      std::lock_guard lock(mutex);
      jobs[record.id] = Entry{record, now};
      return json_response(200, to_json(record));
    }

    std::lock_guard lock(mutex);
    record.id = new_id();
    jobs[record.id] = Entry{record, {}};
    ++active;
    threads.emplace_back([this, id = record.id, spec] { run_job(id, spec); });
    return json_response(202, to_json(record));
  }

  HttpResponse poll(const std::string& id) {
    std::lock_guard lock(mutex);
    const auto it = jobs.find(id);
    if (it == jobs.end()) return error_response(404, "not_found", "no job with id '" + id + "'");
    return json_response(200, to_json(it->second.record));
  }

  HttpResponse route(std::string_view method, std::string_view path, std::string_view text) {
    if (path == "/health") {
      if (method != "GET") return error_response(405, "method_not_allowed", "use GET");
      return json_response(200, Json{{"status", "ok"}, {"version", kVersion}});
    }
    constexpr std::string_view kJobs = "/v1/jobs/";
    if (path.starts_with(kJobs)) {
      if (method != "GET") return error_response(405, "method_not_allowed", "use GET");
      return poll(std::string(path.substr(kJobs.size())));
    }

    using Handler = Json (*)(const Json&);
    static const std::map<std::string_view, Handler> kHandlers{
        {"/v1/evaluate", evaluate_body},
        {"/v1/compare", compare_body},
        {"/v1/breakeven", breakeven_body},
        {"/v1/sweep", sweep_body},
        {"/v1/sensitivity/local", local_body},
    };
    const auto handler = kHandlers.find(path);
    const bool is_sobol = path == "/v1/sensitivity/sobol";
    if (handler == kHandlers.end() && !is_sobol) {
      return error_response(404, "not_found", "no endpoint " + std::string(path));
    }
    if (method != "POST") return error_response(405, "method_not_allowed", "use POST");

    const Json body = parse_json(text);
    if (!body.is_object()) throw ValidationError("", "request body must be a JSON object");
    if (is_sobol) return submit(body);
    return json_response(200, handler->second(body));
  }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Service::~Service() {
  // Joins outstanding jobs before the table goes away.
  std::vector<std::jthread> threads;
  {
    std::lock_guard lock(impl_->mutex);
    threads.swap(impl_->threads);
  }
}

const ServiceConfig& Service::config() const { return impl_->config; }

HttpResponse Service::handle(std::string_view method, std::string_view path,
                             std::string_view body) {
  {
    std::lock_guard lock(impl_->mutex);
    impl_->purge_locked();
  }
  try {
    return impl_->route(method, path, body);
  } catch (const ParseError& e) {
    return error_response(400, e.code(), e.what());
  } catch (const ValidationError& e) {
    return error_response(400, e.code(), e.what(), e.field());
  } catch (const DomainError& e) {
    return error_response(422, e.code(), e.what());
  } catch (const Json::exception& e) {
    return error_response(400, "validation_error", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal_error", e.what());
  }
}

std::optional<JobRecord> Service::job(const std::string& id) const {
  std::lock_guard lock(impl_->mutex);
  const auto it = impl_->jobs.find(id);
  if (it == impl_->jobs.end()) return std::nullopt;
  return it->second.record;
}

void Service::wait_idle() {
  std::unique_lock lock(impl_->mutex);
  impl_->idle.wait(lock, [&] { return impl_->active == 0; });
}

}  // namespace llmroi
