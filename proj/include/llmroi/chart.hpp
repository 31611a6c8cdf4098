#pragma once

// Standalone SVG charts: sweep line charts, index bar charts and
// second-order heatmaps. Output is a pure function of the input.

#include <string>
#include <string_view>

#include "llmroi/econ.hpp"
#include "llmroi/sobol.hpp"

namespace llmroi {

enum class ChartKind { Line, GroupedBar, MatrixHeatmap };

const char* to_string(ChartKind k);
ChartKind parse_chart_kind(std::string_view text);

/// Expected earnings against the swept variable, one line per scenario,
/// crossings marked. Throws ValidationError if a series has < 2 points.
std::string render_line_chart(const SweepTable& table, std::string_view title);

/// First- and total-order indices side by side per variable.
std::string render_index_bars(const SobolIndices& indices, std::string_view title);

/// Second-order indices as a symmetric matrix; requires indices.second_order.
std::string render_second_order_heatmap(const SobolIndices& indices, std::string_view title);

}  // namespace llmroi
