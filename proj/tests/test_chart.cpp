#include <doctest.h>

#include <string>

#include "llmroi/chart.hpp"
#include "llmroi/errors.hpp"
#include "support.hpp"

using namespace llmroi;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

SweepTable fig_sweep() {
  const std::vector<NamedSingle> scenarios{{"llm-1", testing::llm1()}, {"llm-2", testing::llm2()}};
  return sweep(scenarios, SweepVariable::Tokens, 1000, 250000, 50);
}

SobolIndices small_indices() {
  auto spec = default_spec(SobolModel::SingleEarnings);
  spec.samples_exponent = 8;
  return sobol_analyze(spec);
}

}  // namespace

TEST_CASE("line chart draws one line per scenario and marks the crossing") {
  const auto table = fig_sweep();
  REQUIRE(table.crossings.size() == 1);
  const auto svg = render_line_chart(table, "Earnings vs tokens");
  CHECK(svg.starts_with("<svg"));
  CHECK(svg.ends_with("</svg>\n"));
  CHECK(count(svg, "<polyline") == 2);
  CHECK(count(svg, "<circle") == 1);
  CHECK(svg.find("llm-1") != std::string::npos);
  CHECK(svg.find("Earnings vs tokens") != std::string::npos);
  CHECK(render_line_chart(table, "Earnings vs tokens") == svg);
}

TEST_CASE("line chart escapes markup in names") {
  const std::vector<NamedSingle> scenarios{{"a<b&c", testing::llm1()}};
  const auto svg = render_line_chart(sweep(scenarios, SweepVariable::Probability, 0, 1, 4), "t");
  CHECK(svg.find("a&lt;b&amp;c") != std::string::npos);
  CHECK(svg.find("a<b") == std::string::npos);
}

TEST_CASE("line chart rejects empty input") {
  CHECK_THROWS_AS(render_line_chart(SweepTable{}, "t"), ValidationError);
  SweepTable one;
  one.series.push_back({"x", {{1.0, 2.0, 3.0}}});
  CHECK_THROWS_AS(render_line_chart(one, "t"), ValidationError);
}

TEST_CASE("index bars: two per variable") {
  const auto r = small_indices();
  const auto svg = render_index_bars(r, "indices");
  CHECK(count(svg, "</title></rect>") == 2 * r.names.size());
  CHECK(svg.find("total order") != std::string::npos);
  CHECK(render_index_bars(r, "indices") == svg);
}

TEST_CASE("heatmap: one cell per pair") {
  const auto r = small_indices();
  const auto svg = render_second_order_heatmap(r, "pairs");
  const std::size_t d = r.names.size();
  CHECK(count(svg, R"(stroke="white"/>)") == d * d);
  CHECK(svg.find("#d9d9d9") != std::string::npos);

  auto first_only = r;
  first_only.second_order.reset();
  CHECK_THROWS_AS(render_second_order_heatmap(first_only, "pairs"), ValidationError);
}

TEST_CASE("chart kind names") {
  CHECK(parse_chart_kind("line") == ChartKind::Line);
  CHECK(parse_chart_kind("grouped-bar") == ChartKind::GroupedBar);
  CHECK(parse_chart_kind("matrix-heatmap") == ChartKind::MatrixHeatmap);
  CHECK_THROWS_AS(parse_chart_kind("pie"), ValidationError);
}
