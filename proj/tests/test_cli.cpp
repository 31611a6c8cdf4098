#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "llmroi/scenario_io.hpp"

namespace fs = std::filesystem;
using llmroi::Json;

namespace {

const std::string kSource = LLMROI_SOURCE_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "llm-roi");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = llmroi::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir() {
  auto dir = fs::temp_directory_path() / ("llmroi-cli-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("evaluate prints the worked example") {
  const auto r = cli({"evaluate", "--scenario", kSource + "/scenarios/worked_example.json", "--format",
                      "table"});
  CHECK(r.code == 0);
  CHECK(r.out.find("9.44000") != std::string::npos);
  CHECK(r.out.find("944.00") != std::string::npos);
  CHECK(r.out.find("7.79950") != std::string::npos);
  CHECK(r.out.find("15,599.00") != std::string::npos);

  const auto j = cli({"evaluate", "--scenario", kSource + "/scenarios/worked_example.json"});
  REQUIRE(j.code == 0);
  const auto doc = Json::parse(j.out);
  CHECK(doc["results"][0]["earnings"] == 9.44);
  CHECK(doc["tool_version"].is_string());
}

TEST_CASE("breakeven probability at a fixed transaction size") {
  const auto r = cli({"breakeven", "--scenario", kSource + "/scenarios/worked_example.json", "--solve-for",
                      "probability", "--at", "T=128000"});
  REQUIRE(r.code == 0);
  const auto doc = Json::parse(r.out);
  CHECK(doc["breakeven"]["value"].get<double>() == doctest::Approx(0.8394545454545).epsilon(1e-9));
  CHECK(doc["breakeven"]["candidate_earnings"].get<double>() ==
        doctest::Approx(doc["breakeven"]["reference_earnings"].get<double>()));
}

TEST_CASE("exit codes distinguish flag, file, schema and engine errors") {
  CHECK(cli({"evaluate"}).code == llmroi::cli::kValidation);
  CHECK(cli({"bogus"}).code == llmroi::cli::kValidation);
  const auto missing = cli({"evaluate", "--scenario", "/nonexistent/x.json"});
  CHECK(missing.code == llmroi::cli::kIo);
  CHECK(!missing.err.empty());

  const auto dir = scratch_dir();
  const auto bad = dir / "bad.json";
  std::ofstream(bad) << R"({"schema_version": "1", "scenarios": []})";
  const auto schema = cli({"evaluate", "--scenario", bad.string()});
  CHECK(schema.code == llmroi::cli::kValidation);
  CHECK(schema.err.find("scenarios") != std::string::npos);

  const auto engine = cli({"breakeven", "--scenario", kSource + "/scenarios/worked_example.json",
                           "--solve-for", "probability", "--at", "T=10000000"});
  CHECK(engine.code == llmroi::cli::kEngine);

  const auto unwritable = cli({"evaluate", "--scenario", kSource + "/scenarios/worked_example.json",
                               "--out", "/proc/llmroi/out.json"});
  CHECK(unwritable.code == llmroi::cli::kIo);
  fs::remove_all(dir);
}

TEST_CASE("sweep writes CSV and a chart") {
  const auto dir = scratch_dir();
  const auto r = cli({"sweep", "--scenario", kSource + "/scenarios/worked_example.json", "--var", "T",
                      "--from", "1000", "--to", "250000", "--steps", "25", "--format", "csv",
                      "--out", (dir / "s.csv").string(), "--chart", (dir / "s.svg").string()});
  CHECK(r.code == 0);
  CHECK(slurp(dir / "s.csv").find("llm-2") != std::string::npos);
  CHECK(slurp(dir / "s.svg").find("<polyline") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("sobol output is identical for any thread count") {
  const std::vector<std::string> args{"sobol",  "--spec", kSource + "/specs/binary_roi.json",
                                      "--samples-exponent", "10", "--seed", "3", "--bootstrap",
                                      "20"};
  ::setenv("LLM_ROI_THREADS", "1", 1);
  CHECK(llmroi::cli::worker_count() == 1);
  const auto one = cli(args);
  ::setenv("LLM_ROI_THREADS", "4", 1);
  CHECK(llmroi::cli::worker_count() == 4);
  const auto four = cli(args);
  ::unsetenv("LLM_ROI_THREADS");
  REQUIRE(one.code == 0);
  CHECK(one.out == four.out);
  const auto doc = Json::parse(one.out);
  CHECK(doc["seeds"][0] == 3);
  CHECK(doc["sobol"]["first_order"].size() == 8);
}

TEST_CASE("local-sens requires every variable") {
  const auto ok = cli({"local-sens", "--model", "single", "--target", "earnings", "--at", "G=10",
                       "--at", "L=1", "--at", "C=10", "--at", "P=0.95", "--at", "T=1000",
                       "--cost-units", "per-million"});
  REQUIRE(ok.code == 0);
  const auto doc = Json::parse(ok.out);
  CHECK(doc["local"]["gradient"][3].get<double>() == doctest::Approx(11.0));
  const auto missing = cli({"local-sens", "--model", "single", "--at", "G=10"});
  CHECK(missing.code == llmroi::cli::kValidation);
}
