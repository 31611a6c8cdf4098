#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>
#include <string>

#include "llmroi/errors.hpp"
#include "llmroi/local_sensitivity.hpp"
#include "llmroi/scenario_io.hpp"
#include "llmroi/sobol.hpp"
#include "llmroi/version.hpp"

namespace py = pybind11;

namespace llmroi::python {

namespace {

// Everything crosses the boundary as canonical JSON text; the Python package
// converts to and from dicts.

ScenarioDocument document(const std::string& text) { return parse_scenario(text); }

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

std::string evaluate_scenario(const std::string& scenario, const std::string& variant) {
  Json j = parse_json(scenario);
  if (j.is_object() && !j.contains("name")) j["name"] = "scenario";
  const auto s = scenario_from_json(j, "");
  return canonical_dump(to_json(evaluate(s.scenario, parse_binary_variant(variant))));
}

std::string compare(const std::string& doc_text, const std::string& variant) {
  const auto doc = document(doc_text);
  const auto v = parse_binary_variant(variant);
  std::vector<NamedResult> results;
  for (const auto& s : doc.scenarios) results.push_back({s.name, evaluate(s.scenario, v)});
  Json list = Json::array();
  for (const auto& r : results) list.push_back(to_json(r));
  Json deltas = Json::array();
  for (const auto& d : pairwise_deltas(results)) deltas.push_back(to_json(d));
  return canonical_dump(Json{{"results", std::move(list)}, {"comparisons", std::move(deltas)}});
}

std::string breakeven(const std::string& doc_text, const std::string& solve_for,
                      const std::optional<std::string>& reference,
                      const std::optional<std::string>& candidate,
                      const std::map<std::string, double>& at) {
  const auto doc = document(doc_text);
  if (doc.scenarios.size() < 2 && (!reference || !candidate)) {
    throw ValidationError("scenarios", "break-even needs a reference and a candidate scenario");
  }
  const auto ref = with_assignments(doc.single(reference.value_or(doc.scenarios[0].name)), at);
  const auto cand = with_assignments(doc.single(candidate.value_or(doc.scenarios[1].name)), at);
  return canonical_dump(to_json(breakeven_report(parse_solve_for(solve_for), ref, cand)));
}

std::string sweep_scenarios(const std::string& doc_text, const std::string& variable, double from,
                            double to, int steps) {
  const auto doc = document(doc_text);
  std::vector<NamedSingle> singles;
  for (const auto& s : doc.scenarios) singles.push_back(doc.single(s.name));
  return canonical_dump(to_json(sweep(singles, parse_sweep_variable(variable), from, to, steps)));
}

std::string sobol(const std::string& spec_text, unsigned workers) {
  const auto spec = parse_sobol_spec(spec_text);
  SobolIndices result;
  {
    py::gil_scoped_release release;
    result = sobol_analyze(spec, workers);
  }
  return canonical_dump(to_json(result));
}

std::string local(const std::string& model_text, const std::string& target_text,
                  const std::map<std::string, double>& point, const std::string& cost_units,
                  double rel_step) {
  const auto model = parse_local_model(model_text);
  const auto names = model == LocalModel::Single
                         ? std::span<const std::string_view>(models::kSingleVariables)
                         : std::span<const std::string_view>(models::kBinaryVariables);
  std::vector<std::string> keys;
  std::vector<double> values;
  for (const auto name : names) {
    const std::string key(name);
    const auto it = point.find(key);
    if (it == point.end()) throw ValidationError("point." + key, "required");
    keys.push_back(key);
    values.push_back(it->second);
  }
  if (point.size() != keys.size()) {
    throw ValidationError("point", "unexpected variables for model " + model_text);
  }
  return canonical_dump(to_json(local_report(ParameterVector(keys, values), model,
                                             parse_target(target_text),
                                             cost_scale(parse_cost_units(cost_units)), rel_step)));
}

std::string normalize_scenarios(const std::string& text) { return write_scenario(document(text)); }

}  // namespace

}  // namespace llmroi::python

PYBIND11_MODULE(_core, m) {
  using namespace llmroi::python;
  m.doc() = "Expected earnings, RoI, break-even and sensitivity analysis for LLM deployments.";
  m.attr("__version__") = llmroi::kVersion;

  // Released handles: the types live as long as the interpreter.
  static const py::handle validation_error =
      py::exception<llmroi::ValidationError>(m, "ValidationError", PyExc_ValueError).release();
  static const py::handle parse_error =
      py::exception<llmroi::ParseError>(m, "ParseError", validation_error).release();
  static const py::handle domain_error =
      py::exception<llmroi::DomainError>(m, "DomainError", PyExc_ArithmeticError).release();
  static const py::handle io_error =
      py::exception<llmroi::IoError>(m, "IoError", PyExc_OSError).release();

  py::register_exception_translator([](std::exception_ptr p) {
    auto raise = [](py::handle type, const char* message, py::dict attrs) {
      py::object exc = py::reinterpret_borrow<py::object>(type)(message);
      for (const auto& [key, value] : attrs) exc.attr(key) = value;
      PyErr_SetObject(type.ptr(), exc.ptr());
    };
    try {
      if (p) std::rethrow_exception(p);
    } catch (const llmroi::ParseError& e) {
      raise(parse_error, e.what(), py::dict(py::arg("field") = "", py::arg("line") = e.line(),
                                            py::arg("column") = e.column()));
    } catch (const llmroi::ValidationError& e) {
      raise(validation_error, e.what(), py::dict(py::arg("field") = e.field()));
    } catch (const llmroi::DomainError& e) {
      raise(domain_error, e.what(),
            py::dict(py::arg("code") = e.code(), py::arg("value") = e.value(),
                     py::arg("context") = e.context()));
    } catch (const llmroi::IoError& e) {
      raise(io_error, e.what(), py::dict());
    }
  });

  m.def("evaluate", &evaluate_scenario, py::arg("scenario"), py::arg("variant") = "canonical",
        "Evaluates one scenario object (JSON text).");
  m.def("compare", &compare, py::arg("document"), py::arg("variant") = "canonical");
  m.def("breakeven", &breakeven, py::arg("document"), py::arg("solve_for") = "probability",
        py::arg("reference") = py::none(), py::arg("candidate") = py::none(),
        py::arg("at") = std::map<std::string, double>{});
  m.def("sweep", &sweep_scenarios, py::arg("document"), py::arg("variable"), py::arg("start"),
        py::arg("stop"), py::arg("steps"));
  m.def("sobol", &sobol, py::arg("spec"), py::arg("workers") = 1);
  m.def("local_sensitivity", &local, py::arg("model"), py::arg("target"), py::arg("point"),
        py::arg("cost_units") = "per-token", py::arg("rel_step") = 1e-4);
  m.def("normalize_scenarios", &normalize_scenarios, py::arg("document"),
        "Validates a scenario document and returns it with defaults resolved.");
}
