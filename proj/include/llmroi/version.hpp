#pragma once

namespace llmroi {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace llmroi
