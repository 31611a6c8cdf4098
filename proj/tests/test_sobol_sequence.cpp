#include <doctest.h>

#include <array>
#include <cmath>
#include <set>
#include <vector>

#include "llmroi/sobol_sequence.hpp"

using llmroi::SobolSequence;

namespace {

constexpr std::size_t kDims = SobolSequence::kMaxDimensions;

// Unscrambled reference points from an independent Joe-Kuo implementation
// (scipy.stats.qmc.Sobol, scramble=False), indexed by position in the sequence.
struct Frozen {
  std::uint64_t index;
  std::array<double, kDims> x;
};

const Frozen kFrozen[] = {
    {2, {0.75, 0.25, 0.25, 0.25, 0.75, 0.75, 0.25, 0.75, 0.75, 0.75, 0.75,
         0.75, 0.25, 0.25, 0.75, 0.25, 0.75, 0.25, 0.75, 0.25, 0.25}},
    {3, {0.25, 0.75, 0.75, 0.75, 0.25, 0.25, 0.75, 0.25, 0.25, 0.25, 0.25,
         0.25, 0.75, 0.75, 0.25, 0.75, 0.25, 0.75, 0.25, 0.75, 0.75}},
    {5, {0.875, 0.875, 0.125, 0.375, 0.875, 0.625, 0.875, 0.375, 0.375, 0.125, 0.375,
         0.875, 0.875, 0.125, 0.875, 0.375, 0.875, 0.375, 0.375, 0.625, 0.625}},
    {7, {0.125, 0.625, 0.375, 0.125, 0.125, 0.375, 0.625, 0.625, 0.625, 0.875, 0.625,
         0.125, 0.625, 0.375, 0.125, 0.125, 0.125, 0.125, 0.625, 0.875, 0.875}},
    {11, {0.4375, 0.5625, 0.1875, 0.6875, 0.8125, 0.0625, 0.6875, 0.6875, 0.6875, 0.0625, 0.9375,
          0.3125, 0.1875, 0.1875, 0.5625, 0.1875, 0.5625, 0.0625, 0.6875, 0.5625, 0.9375}},
    {15, {0.0625, 0.9375, 0.5625, 0.3125, 0.6875, 0.1875, 0.8125, 0.3125, 0.3125, 0.6875, 0.0625,
          0.1875, 0.3125, 0.5625, 0.9375, 0.8125, 0.9375, 0.9375, 0.3125, 0.6875, 0.8125}},
    {100, {0.4140625, 0.2578125, 0.7734375, 0.7265625, 0.8828125, 0.7421875, 0.0234375,
           0.4765625, 0.6328125, 0.6953125, 0.4609375, 0.6796875, 0.4765625, 0.8515625,
           0.3203125, 0.4921875, 0.6796875, 0.7421875, 0.8359375, 0.3359375, 0.7578125}},
    {1000, {0.2197265625, 0.0966796875, 0.5185546875, 0.6767578125, 0.2802734375, 0.9072265625,
            0.0458984375, 0.8994140625, 0.5009765625, 0.0693359375, 0.0849609375, 0.2548828125,
            0.1611328125, 0.3837890625, 0.1435546875, 0.3701171875, 0.7197265625, 0.3447265625,
            0.9912109375, 0.7255859375, 0.5224609375}},
    {1023, {0.0009765625, 0.7529296875, 0.6123046875, 0.1455078125, 0.1865234375, 0.4384765625,
            0.1396484375, 0.6181640625, 0.3447265625, 0.8505859375, 0.6787109375, 0.0361328125,
            0.1298828125, 0.6650390625, 0.3623046875, 0.4638671875, 0.3134765625, 0.8759765625,
            0.5849609375, 0.3193359375, 0.8662109375}},
};

std::vector<std::vector<double>> take(SobolSequence& seq, std::size_t n) {
  std::vector<std::vector<double>> pts(n, std::vector<double>(seq.dimensions()));
  for (auto& p : pts) seq.next(p);
  return pts;
}

// Every 1-D projection of a 2^m net puts one point in each interval [k/2^m, (k+1)/2^m).
bool stratified_1d(const std::vector<std::vector<double>>& pts, std::size_t dim) {
  const std::size_t n = pts.size();
  std::set<std::size_t> cells;
  for (const auto& p : pts) {
    if (!(p[dim] >= 0.0 && p[dim] < 1.0)) return false;
    cells.insert(static_cast<std::size_t>(p[dim] * static_cast<double>(n)));
  }
  return cells.size() == n;
}

// Dimensions 0 and 1 form a (0,2)-sequence: each elementary box of volume 1/n holds one point.
bool stratified_2d(const std::vector<std::vector<double>>& pts, std::size_t rows_bits) {
  const std::size_t n = pts.size();
  const std::size_t rows = std::size_t{1} << rows_bits;
  const std::size_t cols = n / rows;
  std::set<std::pair<std::size_t, std::size_t>> cells;
  for (const auto& p : pts) {
    cells.insert({static_cast<std::size_t>(p[0] * static_cast<double>(rows)),
                  static_cast<std::size_t>(p[1] * static_cast<double>(cols))});
  }
  return cells.size() == n;
}

}  // namespace

TEST_CASE("unscrambled sequence starts at the origin then the centre") {
  SobolSequence seq(kDims);
  const auto pts = take(seq, 2);
  for (std::size_t d = 0; d < kDims; ++d) {
    CHECK(pts[0][d] == 0.0);
    CHECK(pts[1][d] == 0.5);
  }
}

TEST_CASE("unscrambled sequence matches reference points in all 21 dimensions") {
  SobolSequence seq(kDims);
  const auto pts = take(seq, 1024);
  for (const auto& f : kFrozen) {
    CAPTURE(f.index);
    for (std::size_t d = 0; d < kDims; ++d) {
      CAPTURE(d);
      CHECK(pts[f.index][d] == f.x[d]);
    }
  }
}

TEST_CASE("seek matches sequential generation") {
  for (const bool scrambled : {false, true}) {
    SobolSequence a = scrambled ? SobolSequence(6, 99) : SobolSequence(6);
    SobolSequence b = scrambled ? SobolSequence(6, 99) : SobolSequence(6);
    const auto pts = take(a, 300);
    for (const std::uint64_t i : {0u, 1u, 7u, 128u, 255u, 299u}) {
      b.seek(i);
      std::vector<double> p(6);
      b.next(p);
      CHECK(p == pts[i]);
    }
  }
}

TEST_CASE("first 2^m points form a net, scrambled or not") {
  for (const bool scrambled : {false, true}) {
    CAPTURE(scrambled);
    for (const unsigned m : {4u, 8u, 10u}) {
      SobolSequence seq = scrambled ? SobolSequence(kDims, 7) : SobolSequence(kDims);
      const auto pts = take(seq, std::size_t{1} << m);
      for (std::size_t d = 0; d < kDims; ++d) CHECK(stratified_1d(pts, d));
      for (unsigned r = 0; r <= m; ++r) CHECK(stratified_2d(pts, r));
    }
  }
}

TEST_CASE("scrambling is deterministic in the seed") {
  SobolSequence a(5, 1), b(5, 1), c(5, 2);
  const auto pa = take(a, 64), pb = take(b, 64), pc = take(c, 64);
  CHECK(pa == pb);
  CHECK(pa != pc);
  for (const auto& p : pa) {
    for (double v : p) {
      CHECK(v >= 0.0);
      CHECK(v < 1.0);
    }
  }
}

TEST_CASE("scrambled points have mean near one half") {
  SobolSequence seq(kDims, 123);
  const auto pts = take(seq, 4096);
  for (std::size_t d = 0; d < kDims; ++d) {
    double sum = 0.0;
    for (const auto& p : pts) sum += p[d];
    CHECK(std::abs(sum / 4096.0 - 0.5) < 1e-3);
  }
}

TEST_CASE("dimension limits") {
  CHECK_THROWS(SobolSequence(0));
  CHECK_THROWS(SobolSequence(kDims + 1));
}
