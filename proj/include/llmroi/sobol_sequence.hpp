#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace llmroi {

/// Sobol' low-discrepancy sequence in up to kMaxDimensions dimensions using
/// Joe-Kuo direction numbers, with optional seeded randomization (random
/// linear matrix scramble followed by a random digital shift). The randomized
/// point set keeps the (t,m,s)-net structure of the original.
///
/// Points are produced in Gray-code order, so the first 2^m points of the
/// unscrambled sequence are exactly the standard Sobol' net.
class SobolSequence {
 public:
  static constexpr std::size_t kMaxDimensions = 21;
  static constexpr unsigned kBits = 32;

  /// Unscrambled sequence; the first point is the origin.
  explicit SobolSequence(std::size_t dimensions);
  /// Scrambled sequence, deterministic in `seed`.
  SobolSequence(std::size_t dimensions, std::uint64_t seed);

  std::size_t dimensions() const { return dims_; }

  /// Writes the next point into `out` (size == dimensions()).
  void next(std::span<double> out);

  /// Skips ahead to point `index` (the next call to next() returns it).
  void seek(std::uint64_t index);

 private:
  void init_directions();

  std::size_t dims_;
  std::vector<std::array<std::uint32_t, kBits>> directions_;
  std::vector<std::uint32_t> shift_;
  std::vector<std::uint32_t> state_;
  std::uint64_t index_ = 0;
};

}  // namespace llmroi
