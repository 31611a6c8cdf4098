#include "cli.hpp"

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "llmroi/chart.hpp"
#include "llmroi/errors.hpp"
#include "llmroi/format.hpp"
#include "llmroi/local_sensitivity.hpp"
#include "llmroi/scenario_io.hpp"
#include "llmroi/service.hpp"
#include "llmroi/sobol.hpp"
#include "llmroi/version.hpp"

namespace llmroi::cli {

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text) || !out.flush()) throw IoError("cannot write " + path.string());
}

// Parses "VAR=VALUE".
std::pair<std::string, double> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError("at", "expected VAR=VALUE, got '" + text + "'");
  }
  const std::string value = text.substr(eq + 1);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) {
    throw ValidationError("at", "not a number: '" + value + "'");
  }
  return {text.substr(0, eq), v};
}

std::map<std::string, double> parse_assignments(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    auto [key, value] = parse_assignment(item);
    out[key] = value;
  }
  return out;
}

struct Common {
  std::string format = "json";
  std::string out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"json", "csv", "table"}))
      ->capture_default_str();
  app->add_option("--out", c.out, "Output file (default: standard output)");
}

void emit(const Common& c, const ResultDocument& doc, std::ostream& out) {
  const std::string text = write_results(doc, parse_output_format(c.format));
  if (c.out.empty()) {
    out << text;
  } else {
    write_file(c.out, text);
  }
}

ResultDocument new_document(Json inputs) {
  ResultDocument doc;
  doc.tool_version = kVersion;
  doc.inputs = std::move(inputs);
  return doc;
}

std::vector<NamedSingle> singles_of(const ScenarioDocument& doc) {
  std::vector<NamedSingle> out;
  for (const auto& s : doc.scenarios) out.push_back(doc.single(s.name));
  return out;
}

// evaluate / compare ---------------------------------------------------------

ResultDocument evaluate_document(const ScenarioDocument& doc, BinaryVariant variant,
                                 bool with_comparisons) {
  Json inputs = to_json(doc);
  inputs["variant"] = to_string(variant);
  auto result = new_document(std::move(inputs));
  for (const auto& s : doc.scenarios) {
    result.results.push_back({s.name, evaluate(s.scenario, variant)});
  }
  if (with_comparisons) result.comparisons = pairwise_deltas(result.results);
  return result;
}

// breakeven ------------------------------------------------------------------

NamedSingle with_assignments(NamedSingle s, const std::map<std::string, double>& at) {
  for (const auto& [key, value] : at) {
    try {
      s.scenario = with_variable(s.scenario, parse_sweep_variable(key), value);
    } catch (const ValidationError& e) {
      throw ValidationError("at." + key, e.reason());
    }
  }
  return s;
}

ResultDocument breakeven_document(const ScenarioDocument& doc, SolveFor solve_for,
                                  const std::string& reference, const std::string& candidate,
                                  const std::map<std::string, double>& at) {
  if (doc.scenarios.size() < 2 && (reference.empty() || candidate.empty())) {
    throw ValidationError("scenarios", "break-even needs a reference and a candidate scenario");
  }
  const std::string ref_name = reference.empty() ? doc.scenarios[0].name : reference;
  const std::string cand_name = candidate.empty() ? doc.scenarios[1].name : candidate;
  const auto ref = with_assignments(doc.single(ref_name), at);
  const auto cand = with_assignments(doc.single(cand_name), at);

  Json inputs = to_json(doc);
  inputs["solve_for"] = to_string(solve_for);
  inputs["at"] = at;
  inputs["reference"] = ref_name;
  inputs["candidate"] = cand_name;
  auto result = new_document(std::move(inputs));
  result.breakeven = breakeven_report(solve_for, ref, cand);
  return result;
}

// sweep ----------------------------------------------------------------------

ResultDocument sweep_document(const ScenarioDocument& doc, SweepVariable variable, double from,
                              double to, int steps) {
  Json inputs = to_json(doc);
  inputs["variable"] = to_string(variable);
  inputs["from"] = from;
  inputs["to"] = to;
  inputs["steps"] = steps;
  auto result = new_document(std::move(inputs));
  result.series = sweep(singles_of(doc), variable, from, to, steps);
  return result;
}

// sobol ----------------------------------------------------------------------

ResultDocument sobol_document(const SobolSpec& spec, unsigned workers) {
  auto result = new_document(to_json(spec));
  result.sobol = sobol_analyze(spec, workers);
  result.seeds = {spec.seed};
  return result;
}

std::string sobol_title(const SobolSpec& spec) {
  return std::string(to_string(spec.model)) + " (N = 2^" + std::to_string(spec.samples_exponent) +
         ", seed " + std::to_string(spec.seed) + ")";
}

// local-sens -----------------------------------------------------------------

ResultDocument local_document(LocalModel model, Target target, CostUnits units,
                              const std::map<std::string, double>& at, double rel_step) {
  const auto names = model == LocalModel::Single
                         ? std::span<const std::string_view>(models::kSingleVariables)
                         : std::span<const std::string_view>(models::kBinaryVariables);
  std::vector<std::string> keys;
  std::vector<double> values;
  for (const auto name : names) {
    const std::string key(name);
    const auto it = at.find(key);
    if (it == at.end()) throw ValidationError("at." + key, "missing; pass --at " + key + "=VALUE");
    keys.push_back(key);
    values.push_back(it->second);
  }
  for (const auto& [key, _] : at) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ValidationError("at." + key, std::string("not a variable of model ") + to_string(model));
    }
  }
  Json inputs{{"model", to_string(model)},
              {"target", to_string(target)},
              {"cost_units", to_string(units)},
              {"point", at},
              {"rel_step", rel_step}};
  auto result = new_document(std::move(inputs));
  result.local = local_report(ParameterVector(keys, values), model, target, cost_scale(units),
                              rel_step);
  return result;
}

// serve ----------------------------------------------------------------------

int serve(const std::string& host, int port, ServiceConfig config, std::ostream& err) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Service service(std::move(config));
  HttpServer server(service, host, port);
  const int bound = server.bind();
  err << "llm-roi " << kVersion << " listening on http://" << host << ':' << bound << std::endl;
  std::thread worker([&] { server.run(); });
  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  worker.join();
  return kOk;
}

// repro ----------------------------------------------------------------------

int repro(const fs::path& dir, unsigned exponent, std::optional<std::uint64_t> seed,
          unsigned workers, std::ostream& out) {
  const ScenarioDocument example = scenario_document_from_json(Json{
      {"schema_version", "1"},
      {"scenarios",
       Json::array({
           {{"name", "llm-1"},
            {"type", "single"},
            {"pricing", {{"unit", "per_million_tokens"}, {"input", 10.0}, {"output", 30.0}}},
            {"transaction", {{"input_tokens", 1000}, {"output_tokens", 0}}},
            {"gain", 10.0},
            {"loss", 1.0},
            {"p_success", 0.95}},
           {{"name", "llm-2"},
            {"type", "single"},
            {"pricing", {{"unit", "per_million_tokens"}, {"input", 0.5}, {"output", 1.5}}},
            {"transaction", {{"input_tokens", 1000}, {"output_tokens", 0}}},
            {"gain", 10.0},
            {"loss", 1.0},
            {"p_success", 0.80}},
       })}});

  write_file(dir / "example_scenarios.json", write_scenario(example));
  const auto worked = evaluate_document(example, BinaryVariant::Canonical, true);
  write_file(dir / "worked_example.json", write_results(worked, OutputFormat::Json));
  write_file(dir / "worked_example.txt", write_results(worked, OutputFormat::Table));
  out << write_results(worked, OutputFormat::Table);

  const auto be = breakeven_document(example, SolveFor::Probability, "llm-1", "llm-2",
                                     {{"T", 128000.0}});
  write_file(dir / "breakeven_probability.json", write_results(be, OutputFormat::Json));
  const auto crossing = breakeven_document(example, SolveFor::Tokens, "llm-1", "llm-2", {});
  write_file(dir / "breakeven_tokens.json", write_results(crossing, OutputFormat::Json));

  const auto tokens_sweep = sweep_document(example, SweepVariable::Tokens, 1000.0, 250000.0, 250);
  write_file(dir / "earnings_vs_tokens.json", write_results(tokens_sweep, OutputFormat::Json));
  write_file(dir / "earnings_vs_tokens.csv", write_results(tokens_sweep, OutputFormat::Csv));
  write_file(dir / "earnings_vs_tokens.svg",
             render_line_chart(*tokens_sweep.series, "Expected earnings vs transaction size (tokens)"));

  struct Run {
    const char* name;
    SobolModel model;
  };
  for (const Run run : {Run{"single_earnings", SobolModel::SingleEarnings},
                        Run{"single_roi", SobolModel::SingleRoi},
                        Run{"binary_earnings", SobolModel::BinaryEarnings},
                        Run{"binary_roi", SobolModel::BinaryRoi}}) {
    SobolSpec spec = default_spec(run.model);
    spec.samples_exponent = exponent;
    if (seed) spec.seed = *seed;
    const auto doc = sobol_document(spec, workers);
    const std::string base = run.name;
    write_file(dir / (base + ".json"), write_results(doc, OutputFormat::Json));
    write_file(dir / (base + "_indices.svg"), render_index_bars(*doc.sobol, sobol_title(spec)));
    write_file(dir / (base + "_second_order.svg"),
               render_second_order_heatmap(*doc.sobol, sobol_title(spec)));
    out << '\n' << base << '\n' << write_results(doc, OutputFormat::Table);
  }
  out << "\nwrote " << dir.string() << '\n';
  return kOk;
}

}  // namespace

unsigned worker_count() {
  if (const char* env = std::getenv("LLM_ROI_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n >= 1) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"LLM adoption economics: expected earnings, RoI, break-even and sensitivity",
               "llm-roi"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // evaluate / compare
  Common c_eval, c_cmp, c_be, c_sweep, c_sobol, c_local;
  std::string scenario_path;
  std::string variant_text = "canonical";

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Expected earnings and RoI per scenario");
  evaluate_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
  evaluate_cmd->add_option("--variant", variant_text, "Binary model variant")
      ->check(CLI::IsMember({"canonical", "paper-compat"}));
  add_common(evaluate_cmd, c_eval);

  auto* compare_cmd = app.add_subcommand("compare", "Evaluate and compare scenarios pairwise");
  compare_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
  compare_cmd->add_option("--variant", variant_text, "Binary model variant")
      ->check(CLI::IsMember({"canonical", "paper-compat"}));
  add_common(compare_cmd, c_cmp);

  // breakeven
  std::string solve_for_text = "probability";
  std::vector<std::string> at_items;
  std::string reference, candidate;
  auto* breakeven_cmd =
      app.add_subcommand("breakeven", "Solve for the value where two scenarios earn the same");
  breakeven_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
  breakeven_cmd->add_option("--solve-for", solve_for_text, "Quantity to solve for")
      ->check(CLI::IsMember({"probability", "tokens", "unit-price"}));
  breakeven_cmd->add_option("--at", at_items, "VAR=VALUE applied to both scenarios (T, P, C, G, L)");
  breakeven_cmd->add_option("--reference", reference, "Reference scenario (default: first)");
  breakeven_cmd->add_option("--candidate", candidate, "Candidate scenario (default: second)");
  add_common(breakeven_cmd, c_be);

  // sweep
  std::string var_text = "T";
  double from = 0.0, to = 0.0;
  int steps = 100;
  std::string chart_path;
  auto* sweep_cmd = app.add_subcommand("sweep", "Earnings as one variable varies");
  sweep_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
  sweep_cmd->add_option("--var", var_text, "Variable: T, P, C, G or L")
      ->check(CLI::IsMember({"T", "P", "C", "G", "L"}));
  sweep_cmd->add_option("--from", from, "Range start")->required();
  sweep_cmd->add_option("--to", to, "Range end")->required();
  sweep_cmd->add_option("--steps", steps, "Number of points")->capture_default_str();
  sweep_cmd->add_option("--chart", chart_path, "Also write an SVG line chart here");
  add_common(sweep_cmd, c_sweep);

  // sobol
  std::string spec_path;
  std::optional<unsigned> exponent;
  std::optional<bool> second_order;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> bootstrap;
  std::optional<std::string> sobol_variant, cost_units_text;
  std::string heatmap_path;
  auto* sobol_cmd = app.add_subcommand("sobol", "Global (Sobol) sensitivity analysis");
  sobol_cmd->add_option("--spec", spec_path, "Sobol spec file")->required();
  sobol_cmd->add_option("--samples-exponent", exponent, "Base samples N = 2^k");
  sobol_cmd->add_option("--second-order", second_order, "Estimate second-order indices (true|false)");
  sobol_cmd->add_option("--seed", seed, "Sampler seed");
  sobol_cmd->add_option("--bootstrap", bootstrap, "Bootstrap resamples for confidence intervals");
  sobol_cmd->add_option("--variant", sobol_variant, "Binary model variant")
      ->check(CLI::IsMember({"canonical", "paper-compat"}));
  sobol_cmd->add_option("--cost-units", cost_units_text, "Cost units for C")
      ->check(CLI::IsMember({"per-million", "per-token"}));
  sobol_cmd->add_option("--chart", chart_path, "Also write first/total-order bars (SVG)");
  sobol_cmd->add_option("--heatmap", heatmap_path, "Also write the second-order heatmap (SVG)");
  add_common(sobol_cmd, c_sobol);

  // local-sens
  std::string local_model_text = "single";
  std::string target_text = "earnings";
  std::string local_units = "per-token";
  double rel_step = 1e-4;
  auto* local_cmd = app.add_subcommand("local-sens", "Analytic gradient and Hessian at a point");
  local_cmd->add_option("--model", local_model_text, "Model")
      ->check(CLI::IsMember({"single", "binary-canonical", "binary-paper-compat"}))
      ->capture_default_str();
  local_cmd->add_option("--target", target_text, "earnings or roi")
      ->check(CLI::IsMember({"earnings", "roi"}))
      ->capture_default_str();
  local_cmd->add_option("--at", at_items, "VAR=VALUE for every model variable")->required();
  local_cmd->add_option("--cost-units", local_units, "Cost units for C")
      ->check(CLI::IsMember({"per-million", "per-token"}))
      ->capture_default_str();
  local_cmd->add_option("--rel-step", rel_step, "Finite-difference relative step")
      ->capture_default_str();
  add_common(local_cmd, c_local);

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  ServiceConfig config;
  unsigned retention_s = 3600;
  auto* serve_cmd = app.add_subcommand("serve", "Run the local HTTP service");
  serve_cmd->add_option("--port", port, "TCP port")->capture_default_str();
  serve_cmd->add_option("--host", host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--sync-threshold", config.sync_threshold,
                        "Sobol specs below this many evaluations run synchronously")
      ->capture_default_str();
  serve_cmd->add_option("--max-jobs", config.max_concurrent_jobs, "Concurrent Sobol jobs")
      ->capture_default_str();
  serve_cmd->add_option("--retention", retention_s, "Seconds to keep finished jobs")
      ->capture_default_str();
  serve_cmd->add_option("--cors-origin", config.cors_origin, "Access-Control-Allow-Origin")
      ->capture_default_str();

  // repro
  std::string repro_dir = "repro";
  bool full = false;
  auto* repro_cmd =
      app.add_subcommand("repro", "Regenerate the worked example, sweep chart and Sobol charts");
  repro_cmd->add_option("--out", repro_dir, "Target directory")->capture_default_str();
  repro_cmd->add_flag("--full", full, "Use N = 2^20 base samples");
  repro_cmd->add_option("--samples-exponent", exponent, "Base samples N = 2^k (default 16)");
  repro_cmd->add_option("--seed", seed, "Sampler seed for every Sobol run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "llm-roi: " << e.what() << '\n';
    return kValidation;
  }

  const unsigned workers = worker_count();
  try {
    auto load_scenarios = [&] { return parse_scenario(read_file(scenario_path)); };
    if (evaluate_cmd->parsed() || compare_cmd->parsed()) {
      const bool cmp = compare_cmd->parsed();
      const auto doc = load_scenarios();
      if (cmp && doc.scenarios.size() < 2) {
        throw ValidationError("scenarios", "compare needs at least 2 scenarios");
      }
      emit(cmp ? c_cmp : c_eval,
           evaluate_document(doc, parse_binary_variant(variant_text), cmp), out);
    } else if (breakeven_cmd->parsed()) {
      emit(c_be,
           breakeven_document(load_scenarios(), parse_solve_for(solve_for_text), reference,
                              candidate, parse_assignments(at_items)),
           out);
    } else if (sweep_cmd->parsed()) {
      const auto doc = sweep_document(load_scenarios(), parse_sweep_variable(var_text), from, to,
                                      steps);
      if (!chart_path.empty()) {
        write_file(chart_path, render_line_chart(*doc.series, "Expected earnings vs " + var_text));
      }
      emit(c_sweep, doc, out);
    } else if (sobol_cmd->parsed()) {
      SobolSpec spec = parse_sobol_spec(read_file(spec_path));
      if (exponent) spec.samples_exponent = *exponent;
      if (second_order) spec.second_order = *second_order;
      if (seed) spec.seed = *seed;
      if (bootstrap) spec.bootstrap = *bootstrap;
      if (sobol_variant) spec.variant = parse_binary_variant(*sobol_variant);
      if (cost_units_text) spec.cost_units = parse_cost_units(*cost_units_text);
      spec.validate();
      const auto doc = sobol_document(spec, workers);
      if (!chart_path.empty()) write_file(chart_path, render_index_bars(*doc.sobol, sobol_title(spec)));
      if (!heatmap_path.empty()) {
        write_file(heatmap_path, render_second_order_heatmap(*doc.sobol, sobol_title(spec)));
      }
      emit(c_sobol, doc, out);
    } else if (local_cmd->parsed()) {
      emit(c_local,
           local_document(parse_local_model(local_model_text), parse_target(target_text),
                          parse_cost_units(local_units), parse_assignments(at_items), rel_step),
           out);
    } else if (serve_cmd->parsed()) {
      config.retention = std::chrono::seconds(retention_s);
      config.workers = workers;
      return serve(host, port, std::move(config), err);
    } else if (repro_cmd->parsed()) {
      const unsigned k = full ? 20u : exponent.value_or(16u);
      return repro(repro_dir, k, seed, workers, out);
    }
  } catch (const IoError& e) {
    err << "llm-roi: " << e.what() << '\n';
    return kIo;
  } catch (const ParseError& e) {
    err << "llm-roi: " << e.what() << '\n';
    return kValidation;
  } catch (const ValidationError& e) {
    err << "llm-roi: " << e.what() << '\n';
    return kValidation;
  } catch (const DomainError& e) {
    err << "llm-roi: " << e.code() << ": " << e.what() << '\n';
    return kEngine;
  } catch (const std::exception& e) {
    err << "llm-roi: " << e.what() << '\n';
    return kEngine;
  }
  return kOk;
}

}  // namespace llmroi::cli
