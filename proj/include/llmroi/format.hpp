#pragma once

// Locale-independent number formatting.

#include <string>

namespace llmroi {

/// Rounds to `digits` significant decimal digits (round-half-even on the
/// shortest decimal representation). Non-finite values pass through.
double round_significant(double value, int digits = 12);

/// Shortest text that round-trips `value` after rounding to `digits`
/// significant digits, e.g. 944 -> "944", 0.1 + 0.2 -> "0.3".
std::string format_significant(double value, int digits = 12);

/// Fixed-point text with `decimals` places and optional thousands separators.
std::string format_fixed(double value, int decimals, bool group_thousands = false);

/// Shortest round-trip text of `value`.
std::string format_shortest(double value);

}  // namespace llmroi
