#pragma once

// Shared fixtures for the unit tests.

#include <random>

#include "llmroi/econ.hpp"

namespace testing {

inline llmroi::SingleOutcomeScenario llm1() {
  return {10.0, 1.0, 0.95, llmroi::LlmPricing("llm-1", 10.0, 30.0),
          llmroi::TransactionProfile(1000, 0)};
}

inline llmroi::SingleOutcomeScenario llm2() {
  return {10.0, 1.0, 0.80, llmroi::LlmPricing("llm-2", 0.5, 1.5),
          llmroi::TransactionProfile(1000, 0)};
}

inline llmroi::BinaryOutcomeScenario classifier() {
  return {10.0, 2.0, 5.0, 0.2, 0.05, 0.05, llmroi::LlmPricing("clf", 5.0, 15.0),
          llmroi::TransactionProfile(1000, 0)};
}

struct Draw {
  std::mt19937_64 rng;
  explicit Draw(std::uint64_t seed) : rng(seed) {}
  double operator()(double lo, double hi) { return std::uniform_real_distribution<>(lo, hi)(rng); }
};

}  // namespace testing
