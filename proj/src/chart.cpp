#include "llmroi/chart.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <sstream>

#include "llmroi/errors.hpp"
#include "llmroi/format.hpp"

namespace llmroi {

namespace {

constexpr double kWidth = 760;
constexpr double kHeight = 440;
constexpr double kLeft = 80;
constexpr double kRight = 170;
constexpr double kTop = 50;
constexpr double kBottom = 60;

constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                              "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string px(double v) { return format_fixed(v, 2); }

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string label(double v) {
  const double a = std::abs(v);
  if (a != 0.0 && (a >= 1e6 || a < 1e-3)) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                   std::chars_format::scientific, 2);
    return std::string(buf.data(), res.ptr);
  }
  return format_significant(v, 6);
}

// Tick positions covering [lo, hi] with a 1-2-5 step.
std::vector<double> nice_ticks(double& lo, double& hi, int target = 6) {
  if (hi <= lo) {
    const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    lo -= pad;
    hi += pad;
  }
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  lo = std::floor(lo / step) * step;
  hi = std::ceil(hi / step) * step;
  std::vector<double> ticks;
  const int count = static_cast<int>(std::lround((hi - lo) / step));
  for (int i = 0; i <= count; ++i) {
    const double t = lo + i * step;
    ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  }
  return ticks;
}

struct Frame {
  double x0 = kLeft;
  double x1 = kWidth - kRight;
  double y0 = kHeight - kBottom;
  double y1 = kTop;
  double xmin, xmax, ymin, ymax;

  double x(double v) const { return x0 + (v - xmin) / (xmax - xmin) * (x1 - x0); }
  double y(double v) const { return y0 - (v - ymin) / (ymax - ymin) * (y0 - y1); }
};

void open_svg(std::ostringstream& os, std::string_view title) {
  os << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << px(kWidth) << R"(" height=")"
     << px(kHeight) << R"(" viewBox="0 0 )" << px(kWidth) << ' ' << px(kHeight)
     << R"(" font-family="Helvetica, Arial, sans-serif" font-size="12">)" << '\n';
  os << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n';
  os << R"(<text x=")" << px(kWidth / 2) << R"(" y="28" text-anchor="middle" font-size="15">)"
     << escape(title) << "</text>\n";
}

void y_axis(std::ostringstream& os, const Frame& f, const std::vector<double>& ticks,
            std::string_view name) {
  for (double t : ticks) {
    os << R"(<line x1=")" << px(f.x0) << R"(" x2=")" << px(f.x1) << R"(" y1=")" << px(f.y(t))
       << R"(" y2=")" << px(f.y(t)) << R"(" stroke="#e0e0e0"/>)" << '\n';
    os << R"(<text x=")" << px(f.x0 - 6) << R"(" y=")" << px(f.y(t) + 4)
       << R"(" text-anchor="end">)" << label(t) << "</text>\n";
  }
  os << R"(<line x1=")" << px(f.x0) << R"(" x2=")" << px(f.x0) << R"(" y1=")" << px(f.y0)
     << R"(" y2=")" << px(f.y1) << R"(" stroke="black"/>)" << '\n';
  os << R"(<text transform="translate(18 )" << px((f.y0 + f.y1) / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(name) << "</text>\n";
}

void legend(std::ostringstream& os, const std::vector<std::string>& names) {
  const double x = kWidth - kRight + 20;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = kTop + 10 + 20.0 * static_cast<double>(i);
    os << R"(<rect x=")" << px(x) << R"(" y=")" << px(y - 9) << R"(" width="14" height="10" fill=")"
       << kPalette[i % kPalette.size()] << R"("/>)" << '\n';
    os << R"(<text x=")" << px(x + 20) << R"(" y=")" << px(y) << R"(">)" << escape(names[i])
       << "</text>\n";
  }
}

}  // namespace

const char* to_string(ChartKind k) {
  switch (k) {
    case ChartKind::Line: return "line";
    case ChartKind::GroupedBar: return "grouped-bar";
    case ChartKind::MatrixHeatmap: return "matrix-heatmap";
  }
  return "?";
}

ChartKind parse_chart_kind(std::string_view text) {
  if (text == "line") return ChartKind::Line;
  if (text == "grouped-bar") return ChartKind::GroupedBar;
  if (text == "matrix-heatmap") return ChartKind::MatrixHeatmap;
  throw ValidationError("kind", "expected line, grouped-bar or matrix-heatmap");
}

std::string render_line_chart(const SweepTable& table, std::string_view title) {
  if (table.series.empty()) throw ValidationError("series", "nothing to plot");
  Frame f{};
  f.xmin = f.ymin = INFINITY;
  f.xmax = f.ymax = -INFINITY;
  for (const auto& s : table.series) {
    if (s.points.size() < 2) {
      throw ValidationError("series", "a line needs at least 2 points ('" + s.scenario + "')");
    }
    for (const auto& p : s.points) {
      f.xmin = std::min(f.xmin, p.value);
      f.xmax = std::max(f.xmax, p.value);
      f.ymin = std::min(f.ymin, p.expected_earnings);
      f.ymax = std::max(f.ymax, p.expected_earnings);
    }
  }
  const auto yticks = nice_ticks(f.ymin, f.ymax);
  const double xlo = f.xmin;
  const double xhi = f.xmax;
  double tlo = xlo;
  double thi = xhi;
  auto xticks = nice_ticks(tlo, thi);
  std::erase_if(xticks, [&](double t) { return t < xlo - 1e-12 * std::abs(xlo) || t > xhi * (1 + 1e-12); });

  std::ostringstream os;
  open_svg(os, title);
  y_axis(os, f, yticks, "expected earnings");
  os << R"(<line x1=")" << px(f.x0) << R"(" x2=")" << px(f.x1) << R"(" y1=")" << px(f.y0)
     << R"(" y2=")" << px(f.y0) << R"(" stroke="black"/>)" << '\n';
  for (double t : xticks) {
    os << R"(<text x=")" << px(f.x(t)) << R"(" y=")" << px(f.y0 + 18)
       << R"(" text-anchor="middle">)" << label(t) << "</text>\n";
  }
  os << R"(<text x=")" << px((f.x0 + f.x1) / 2) << R"(" y=")" << px(kHeight - 15)
     << R"(" text-anchor="middle">)" << to_string(table.variable) << "</text>\n";

  std::vector<std::string> names;
  for (std::size_t i = 0; i < table.series.size(); ++i) {
    const auto& s = table.series[i];
    names.push_back(s.scenario);
    os << R"(<polyline fill="none" stroke-width="2" stroke=")" << kPalette[i % kPalette.size()]
       << R"(" points=")";
    for (std::size_t k = 0; k < s.points.size(); ++k) {
      if (k > 0) os << ' ';
      os << px(f.x(s.points[k].value)) << ',' << px(f.y(s.points[k].expected_earnings));
    }
    os << R"("/>)" << '\n';
  }
  for (const auto& c : table.crossings) {
    os << R"(<circle cx=")" << px(f.x(c.value)) << R"(" cy=")" << px(f.y(c.expected_earnings))
       << R"(" r="5" fill="none" stroke="black" stroke-width="1.5"/>)" << '\n';
    os << R"(<text x=")" << px(f.x(c.value) + 8) << R"(" y=")"
       << px(f.y(c.expected_earnings) - 8) << R"(">)" << label(c.value) << "</text>\n";
  }
  legend(os, names);
  os << "</svg>\n";
  return os.str();
}

std::string render_index_bars(const SobolIndices& indices, std::string_view title) {
  const std::size_t d = indices.names.size();
  if (d == 0 || indices.first_order.size() != d || indices.total_order.size() != d) {
    throw ValidationError("indices", "nothing to plot");
  }
  Frame f{};
  f.xmin = 0;
  f.xmax = static_cast<double>(d);
  f.ymin = 0;
  f.ymax = 0;
  for (std::size_t i = 0; i < d; ++i) {
    f.ymin = std::min({f.ymin, indices.first_order[i], indices.total_order[i]});
    f.ymax = std::max({f.ymax, indices.first_order[i], indices.total_order[i]});
  }
  if (f.ymax < 1e-12) f.ymax = 1.0;
  const auto yticks = nice_ticks(f.ymin, f.ymax, 5);

  std::ostringstream os;
  open_svg(os, title);
  y_axis(os, f, yticks, "Sobol index");
  os << R"(<line x1=")" << px(f.x0) << R"(" x2=")" << px(f.x1) << R"(" y1=")" << px(f.y(0))
     << R"(" y2=")" << px(f.y(0)) << R"(" stroke="black"/>)" << '\n';
  const double slot = (f.x1 - f.x0) / static_cast<double>(d);
  const double bar = slot * 0.35;
  for (std::size_t i = 0; i < d; ++i) {
    const double left = f.x0 + slot * static_cast<double>(i) + slot * 0.15;
    const std::array<double, 2> values{indices.first_order[i], indices.total_order[i]};
    for (std::size_t k = 0; k < 2; ++k) {
      const double top = f.y(std::max(values[k], 0.0));
      const double bottom = f.y(std::min(values[k], 0.0));
      os << R"(<rect x=")" << px(left + bar * static_cast<double>(k)) << R"(" y=")" << px(top)
         << R"(" width=")" << px(bar) << R"(" height=")" << px(bottom - top) << R"(" fill=")"
         << kPalette[k] << R"("><title>)" << escape(indices.names[i])
         << (k == 0 ? " S_i " : " S_Ti ") << format_fixed(values[k], 4) << "</title></rect>\n";
    }
    os << R"(<text x=")" << px(left + bar) << R"(" y=")" << px(f.y0 + 18)
       << R"(" text-anchor="middle">)" << escape(indices.names[i]) << "</text>\n";
  }
  legend(os, {"first order", "total order"});
  os << "</svg>\n";
  return os.str();
}

std::string render_second_order_heatmap(const SobolIndices& indices, std::string_view title) {
  const std::size_t d = indices.names.size();
  if (d < 2 || !indices.second_order || indices.second_order->rows() != d) {
    throw ValidationError("second_order", "second-order indices are required");
  }
  const auto& m = *indices.second_order;
  double scale = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      if (i != k) scale = std::max(scale, std::abs(m(i, k)));
    }
  }
  if (scale == 0.0) scale = 1.0;

  const double side = std::min(kWidth - kLeft - kRight, kHeight - kTop - kBottom);
  const double cell = side / static_cast<double>(d);
  std::ostringstream os;
  open_svg(os, title);
  for (std::size_t i = 0; i < d; ++i) {
    const double y = kTop + cell * static_cast<double>(i);
    os << R"(<text x=")" << px(kLeft - 6) << R"(" y=")" << px(y + cell / 2 + 4)
       << R"(" text-anchor="end">)" << escape(indices.names[i]) << "</text>\n";
    os << R"(<text x=")" << px(kLeft + cell * static_cast<double>(i) + cell / 2) << R"(" y=")"
       << px(kTop + side + 18) << R"(" text-anchor="middle">)" << escape(indices.names[i])
       << "</text>\n";
    for (std::size_t k = 0; k < d; ++k) {
      const double x = kLeft + cell * static_cast<double>(k);
      std::string fill = "#d9d9d9";
      if (i != k) {
        // White at zero, red for positive, blue for negative.
        const double t = std::clamp(m(i, k) / scale, -1.0, 1.0);
        const auto fade = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(t))));
        std::array<char, 8> hex{};
        std::snprintf(hex.data(), hex.size(), t >= 0 ? "#ff%02x%02x" : "#%02x%02xff", fade, fade);
        fill = hex.data();
      }
      os << R"(<rect x=")" << px(x) << R"(" y=")" << px(y) << R"(" width=")" << px(cell)
         << R"(" height=")" << px(cell) << R"(" fill=")" << fill << R"(" stroke="white"/>)" << '\n';
      if (i != k) {
        os << R"(<text x=")" << px(x + cell / 2) << R"(" y=")" << px(y + cell / 2 + 4)
           << R"(" text-anchor="middle" font-size="10">)" << format_fixed(m(i, k), 3)
           << "</text>\n";
      }
    }
  }
  os << R"(<text x=")" << px(kLeft + side + 20) << R"(" y=")" << px(kTop + 10)
     << R"(">scale: +/-)" << format_fixed(scale, 4) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace llmroi
