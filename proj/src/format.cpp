#include "llmroi/format.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace llmroi {

double round_significant(double value, int digits) {
  if (!std::isfinite(value) || value == 0.0) return value;
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::scientific, digits - 1);
  double out = 0.0;
  std::from_chars(buf.data(), res.ptr, out);
  return out;
}

std::string format_shortest(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

std::string format_significant(double value, int digits) {
  return format_shortest(round_significant(value, digits));
}

std::string format_fixed(double value, int decimals, bool group_thousands) {
  if (!std::isfinite(value)) return format_shortest(value);
  std::array<char, 400> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::fixed, decimals);
  std::string text(buf.data(), res.ptr);
  if (text == "-0" || (text.starts_with("-0.") && text.find_first_not_of("-0.") == std::string::npos)) {
    text.erase(0, 1);
  }
  if (!group_thousands) return text;

  const std::size_t sign = text[0] == '-' ? 1 : 0;
  std::size_t int_end = text.find('.');
  if (int_end == std::string::npos) int_end = text.size();
  for (std::size_t pos = int_end; pos > sign + 3; pos -= 3) text.insert(pos - 3, ",");
  return text;
}

}  // namespace llmroi
