#include "llmroi/sobol_sequence.hpp"

#include <bit>
#include <random>

#include "llmroi/errors.hpp"

namespace llmroi {

namespace {

// Joe & Kuo (2008) new-joe-kuo-6.21201, dimensions 2..21: degree s,
// polynomial coefficient a, initial direction numbers m_1..m_s.
struct Primitive {
  unsigned degree;
  unsigned coeffs;
  std::array<std::uint32_t, 8> m;
};

constexpr std::array<Primitive, 20> kJoeKuo{{
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
}};

constexpr double kInv2Pow32 = 1.0 / 4294967296.0;

}  // namespace

SobolSequence::SobolSequence(std::size_t dimensions) : dims_(dimensions) {
  if (dims_ == 0 || dims_ > kMaxDimensions) {
    throw ValidationError("dimensions", "Sobol sequence supports 1.." +
                                            std::to_string(kMaxDimensions) + " dimensions");
  }
  init_directions();
  shift_.assign(dims_, 0u);
  state_.assign(dims_, 0u);
}

SobolSequence::SobolSequence(std::size_t dimensions, std::uint64_t seed)
    : SobolSequence(dimensions) {
  std::mt19937_64 rng(seed);
  for (std::size_t d = 0; d < dims_; ++d) {
    // Lower-triangular binary matrix with unit diagonal, acting on the digits
    // of each direction number (digit 0 is the most significant bit).
    std::array<std::uint32_t, kBits> rows{};
    for (unsigned k = 0; k < kBits; ++k) {
      const std::uint32_t diag = 1u << (kBits - 1 - k);
      const std::uint32_t above = k == 0 ? 0u : ~((diag << 1) - 1u);
      rows[k] = diag | (static_cast<std::uint32_t>(rng() >> 32) & above);
    }
    for (auto& v : directions_[d]) {
      std::uint32_t out = 0;
      for (unsigned k = 0; k < kBits; ++k) {
        if (std::popcount(v & rows[k]) & 1) out |= 1u << (kBits - 1 - k);
      }
      v = out;
    }
    shift_[d] = static_cast<std::uint32_t>(rng() >> 32);
  }
  state_.assign(dims_, 0u);
}

void SobolSequence::init_directions() {
  directions_.assign(dims_, {});
  for (unsigned k = 0; k < kBits; ++k) directions_[0][k] = 1u << (kBits - 1 - k);

  for (std::size_t d = 1; d < dims_; ++d) {
    const auto& prim = kJoeKuo[d - 1];
    const unsigned s = prim.degree;
    auto& v = directions_[d];
    for (unsigned k = 0; k < s && k < kBits; ++k) v[k] = prim.m[k] << (kBits - 1 - k);
    for (unsigned k = s; k < kBits; ++k) {
      std::uint32_t value = v[k - s] ^ (v[k - s] >> s);
      for (unsigned j = 1; j < s; ++j) {
        if ((prim.coeffs >> (s - 1 - j)) & 1u) value ^= v[k - j];
      }
      v[k] = value;
    }
  }
}

void SobolSequence::next(std::span<double> out) {
  if (out.size() != dims_) throw ValidationError("out", "size must equal dimensions()");
  for (std::size_t d = 0; d < dims_; ++d) {
    out[d] = static_cast<double>(state_[d] ^ shift_[d]) * kInv2Pow32;
  }
  // Gray-code update: flip the direction number of the lowest zero bit.
  const unsigned c = static_cast<unsigned>(std::countr_one(index_));
  if (c >= kBits) throw DomainError("sequence_exhausted", "Sobol sequence exhausted (2^32 points)");
  for (std::size_t d = 0; d < dims_; ++d) state_[d] ^= directions_[d][c];
  ++index_;
}

void SobolSequence::seek(std::uint64_t index) {
  const std::uint64_t gray = index ^ (index >> 1);
  for (std::size_t d = 0; d < dims_; ++d) {
    std::uint32_t x = 0;
    for (unsigned k = 0; k < kBits; ++k) {
      if ((gray >> k) & 1u) x ^= directions_[d][k];
    }
    state_[d] = x;
  }
  index_ = index;
}

}  // namespace llmroi
